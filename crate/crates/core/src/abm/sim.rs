use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_network, ExploreScope, IterationRecord, Network, SimConfig};
use crate::error::Result;
use crate::game::{Action, PayoffMatrix};

/// Probability of copying a neighbor whose total payoff is `u_neighbor`:
/// `1 / (1 + exp(-s·(u_neighbor - u_self)))`.
#[inline]
pub fn fermi_probability(u_self: f64, u_neighbor: f64, s: f64) -> f64 {
    1.0 / (1.0 + (-s * (u_neighbor - u_self)).exp())
}

/// Per-step parameters derived from a [`SimConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRules {
    pub fermi_s: f64,
    /// Exploration rate of each rate class. One entry in fixed mode.
    pub rates: Vec<f64>,
    pub evolving: bool,
    pub scope: ExploreScope,
}

impl UpdateRules {
    pub fn fixed(fermi_s: f64, mu: f64) -> Self {
        UpdateRules {
            fermi_s,
            rates: vec![mu],
            evolving: false,
            scope: ExploreScope::ActionOnly,
        }
    }

    pub fn evolving(fermi_s: f64, rates: Vec<f64>, scope: ExploreScope) -> Self {
        UpdateRules {
            fermi_s,
            rates,
            evolving: true,
            scope,
        }
    }

    /// Size of the strategy space: actions × rate classes.
    fn strategy_count(&self) -> u8 {
        (2 * self.rates.len()) as u8
    }
}

/// An agent's heritable state: its action and the index of its exploration
/// rate in the rate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentStrategy {
    pub action: Action,
    pub rate_class: u8,
}

impl AgentStrategy {
    pub fn new(action: Action, rate_class: u8) -> Self {
        AgentStrategy { action, rate_class }
    }

    pub fn exploration_rate(&self, rules: &UpdateRules) -> f64 {
        rules.rates[self.rate_class as usize]
    }

    #[inline]
    fn encode(self) -> u8 {
        (self.rate_class << 1) | self.action.index() as u8
    }

    #[inline]
    fn decode(code: u8) -> Self {
        AgentStrategy {
            action: action_of(code),
            rate_class: code >> 1,
        }
    }
}

#[inline]
fn action_of(code: u8) -> Action {
    if code & 1 == 0 {
        Action::A
    } else {
        Action::B
    }
}

/// The population of one replicate: network, strategies and the replicate's
/// random stream.
#[derive(Debug, Clone)]
pub struct AgentGrid {
    network: Network,
    codes: Vec<u8>,
    next: Vec<u8>,
    payoffs: Vec<f64>,
    rng: ChaCha8Rng,
}

impl AgentGrid {
    pub fn new(network: Network, strategies: &[AgentStrategy], rng: ChaCha8Rng) -> Self {
        assert_eq!(network.node_count(), strategies.len(), "one strategy per node");
        let n = strategies.len();
        AgentGrid {
            network,
            codes: strategies.iter().map(|s| s.encode()).collect(),
            next: vec![0; n],
            payoffs: vec![0.0; n],
            rng,
        }
    }

    /// Every agent draws uniformly from the whole strategy space.
    pub fn random(network: Network, rules: &UpdateRules, mut rng: ChaCha8Rng) -> Self {
        let k = rules.strategy_count();
        let n = network.node_count();
        let codes = (0..n).map(|_| rng.random_range(0..k)).collect();
        AgentGrid {
            network,
            codes,
            next: vec![0; n],
            payoffs: vec![0.0; n],
            rng,
        }
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn strategy(&self, i: usize) -> AgentStrategy {
        AgentStrategy::decode(self.codes[i])
    }

    pub fn strategies(&self) -> Vec<AgentStrategy> {
        self.codes.iter().map(|&c| AgentStrategy::decode(c)).collect()
    }

    pub fn count(&self, action: Action) -> usize {
        let bit = action.index() as u8;
        self.codes.iter().filter(|&&c| c & 1 == bit).count()
    }

    /// Total payoff of each agent from the most recent payoff phase.
    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    /// Every edge plays `m` once; each agent's payoff is the sum over its
    /// incident edges.
    pub fn compute_payoffs(&mut self, m: &PayoffMatrix) {
        let e = &m.entries;
        for i in 0..self.codes.len() {
            let nb = self.network.neighbors(i);
            let mut with_a = 0u32;
            for &j in nb {
                with_a += u32::from(self.codes[j as usize] & 1 == 0);
            }
            let with_b = nb.len() as u32 - with_a;
            let row = &e[(self.codes[i] & 1) as usize];
            self.payoffs[i] = f64::from(with_a) * row[0] + f64::from(with_b) * row[1];
        }
    }

    /// One synchronous iteration: payoffs, Fermi imitation from the pre-update
    /// snapshot, then exploration.
    pub fn step(&mut self, m: &PayoffMatrix, rules: &UpdateRules) {
        self.compute_payoffs(m);
        self.imitate(rules.fermi_s);
        self.explore(rules);
    }

    fn imitate(&mut self, s: f64) {
        let AgentGrid {
            network,
            codes,
            next,
            payoffs,
            rng,
        } = self;
        next.copy_from_slice(codes);
        for i in 0..codes.len() {
            let nb = network.neighbors(i);
            if nb.is_empty() {
                continue;
            }
            let j = nb[rng.random_range(0..nb.len())] as usize;
            // Copying an identical strategy changes nothing.
            if codes[j] == codes[i] {
                continue;
            }
            let p = fermi_probability(payoffs[i], payoffs[j], s);
            if rng.random::<f64>() < p {
                next[i] = codes[j];
            }
        }
        std::mem::swap(codes, next);
    }

    fn explore(&mut self, rules: &UpdateRules) {
        let k = rules.strategy_count();
        let full = rules.evolving && rules.scope == ExploreScope::FullStrategy;
        for code in self.codes.iter_mut() {
            let mu = rules.rates[(*code >> 1) as usize];
            if mu <= 0.0 || self.rng.random::<f64>() >= mu {
                continue;
            }
            *code = if full {
                self.rng.random_range(0..k)
            } else {
                (*code & !1) | self.rng.random_range(0..2u8)
            };
        }
    }

    /// Moves a uniformly chosen `share` of agents onto `action`.
    pub fn inject(&mut self, action: Action, share: f64) {
        let n = self.codes.len();
        let amount = ((share * n as f64).round() as usize).min(n);
        let bit = action.index() as u8;
        for i in sample(&mut self.rng, n, amount).iter() {
            self.codes[i] = (self.codes[i] & !1) | bit;
        }
    }

    pub fn record(&self, iteration: usize, rules: &UpdateRules) -> IterationRecord {
        let n = self.codes.len() as f64;
        let prop_a = self.count(Action::A) as f64 / n;
        let rate_shares = rules.evolving.then(|| {
            let mut counts = vec![0usize; rules.rates.len()];
            for &c in &self.codes {
                counts[(c >> 1) as usize] += 1;
            }
            counts.into_iter().map(|k| k as f64 / n).collect()
        });
        IterationRecord {
            iteration,
            prop_a,
            prop_b: 1.0 - prop_a,
            rate_shares,
        }
    }
}

/// Random stream for one replicate: seeded by `base_seed`, with the
/// replicate index selecting an independent ChaCha stream.
pub(crate) fn replicate_rng(base_seed: u64, replicate_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(replicate_index);
    rng
}

/// Runs one replicate and returns one record per iteration, taken after that
/// iteration's update. Shocks fire before the payoff phase of their iteration.
pub fn run_replicate(cfg: &SimConfig, replicate_index: u64) -> Result<Vec<IterationRecord>> {
    cfg.validate()?;
    let rules = cfg.rules();
    let mut rng = replicate_rng(cfg.base_seed, replicate_index);
    let network = build_network(&cfg.topology, &mut rng)?;
    let mut grid = AgentGrid::random(network, &rules, rng);

    let mut game = cfg.game;
    let mut matrix = game.matrix();
    let mut records = Vec::with_capacity(cfg.iterations);
    for t in 0..cfg.iterations {
        if cfg.shocks.fires_at(t) {
            game = game.shocked();
            matrix = game.matrix();
            if let (Some(share), Some(best)) = (cfg.inject, game.optimal_action()) {
                grid.inject(best, share);
            }
        }
        grid.step(&matrix, &rules);
        records.push(grid.record(t, &rules));
    }
    Ok(records)
}
