//! Finite-population simulation on a network.
//!
//! Each iteration has three phases. Every edge plays the game once and agents
//! sum what they earn. Every agent then looks at one uniformly chosen
//! neighbor and copies its strategy with the Fermi probability; all copies
//! commit together. Finally every agent explores, replacing its strategy with
//! a uniform draw with probability equal to its exploration rate.
//!
//! In the fixed mode the exploration rate is one global constant. In the
//! evolving mode it is part of the heritable strategy, drawn from a finite
//! set of rates and copied together with the action.

mod network;
mod sim;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use network::{build_network, Network, Topology};
pub use sim::{fermi_probability, run_replicate, AgentGrid, AgentStrategy, UpdateRules};

use crate::error::{Error, Result};
use crate::game::ReducedGame;

pub const DEFAULT_FERMI_S: f64 = 5.0;
pub const DEFAULT_MU: f64 = 0.01;
pub const DEFAULT_RATES: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

/// Largest number of distinct exploration rates in evolving mode.
pub const MAX_RATE_CLASSES: usize = 127;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Exploration {
    Fixed { mu: f64 },
    Evolving { rates: Vec<f64> },
}

impl Exploration {
    /// The rate set: a single entry in fixed mode.
    pub fn rates(&self) -> Vec<f64> {
        match self {
            Exploration::Fixed { mu } => vec![*mu],
            Exploration::Evolving { rates } => rates.clone(),
        }
    }

    pub fn is_evolving(&self) -> bool {
        matches!(self, Exploration::Evolving { .. })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Exploration::Fixed { mu } => {
                if !(0.0..=1.0).contains(mu) {
                    return Err(Error::config("mu", format!("{mu} is outside [0, 1]")));
                }
            }
            Exploration::Evolving { rates } => {
                if rates.is_empty() || rates.len() > MAX_RATE_CLASSES {
                    return Err(Error::config(
                        "L",
                        format!("needs between 1 and {MAX_RATE_CLASSES} rates"),
                    ));
                }
                if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                    return Err(Error::config("L", format!("rate {r} is outside [0, 1]")));
                }
                for (i, r) in rates.iter().enumerate() {
                    if rates[..i].contains(r) {
                        return Err(Error::config("L", format!("rate {r} is listed twice")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// What exploration re-draws in evolving mode. Fixed mode always re-draws
/// only the action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploreScope {
    ActionOnly,
    #[default]
    FullStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ShockSchedule {
    #[default]
    None,
    /// Explicit iteration indices, strictly increasing.
    At(Vec<usize>),
    /// Every `k`-th iteration: `k, 2k, 3k, ...`.
    Every(usize),
}

impl ShockSchedule {
    #[inline]
    pub fn fires_at(&self, iteration: usize) -> bool {
        match self {
            ShockSchedule::None => false,
            ShockSchedule::At(list) => list.binary_search(&iteration).is_ok(),
            ShockSchedule::Every(k) => iteration > 0 && iteration % k == 0,
        }
    }

    fn validate(&self, iterations: usize) -> Result<()> {
        match self {
            ShockSchedule::None => Ok(()),
            ShockSchedule::At(list) => {
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::config("shock-at", "indices must be strictly increasing"));
                }
                if let Some(&last) = list.last() {
                    if last >= iterations {
                        return Err(Error::config(
                            "shock-at",
                            format!("index {last} is not below iterations ({iterations})"),
                        ));
                    }
                }
                Ok(())
            }
            ShockSchedule::Every(0) => Err(Error::config("shock-every", "interval must be positive")),
            ShockSchedule::Every(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub game: ReducedGame,
    pub topology: Topology,
    pub iterations: usize,
    pub fermi_s: f64,
    pub exploration: Exploration,
    #[serde(default)]
    pub explore_scope: ExploreScope,
    #[serde(default)]
    pub shocks: ShockSchedule,
    pub replicates: usize,
    pub base_seed: u64,
    /// Share of agents forced onto the newly optimal action at each shock.
    #[serde(default)]
    pub inject: Option<f64>,
}

impl SimConfig {
    /// Torus run with fixed exploration, no shocks and one replicate.
    pub fn new(game: ReducedGame, topology: Topology, iterations: usize) -> Self {
        SimConfig {
            game,
            topology,
            iterations,
            fermi_s: DEFAULT_FERMI_S,
            exploration: Exploration::Fixed { mu: DEFAULT_MU },
            explore_scope: ExploreScope::default(),
            shocks: ShockSchedule::None,
            replicates: 1,
            base_seed: 0,
            inject: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        if !(self.fermi_s > 0.0 && self.fermi_s.is_finite()) {
            return Err(Error::config("s", "must be positive and finite"));
        }
        self.exploration.validate()?;
        self.shocks.validate(self.iterations)?;
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if let Some(p) = self.inject {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::config("inject", format!("{p} is outside (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn rules(&self) -> UpdateRules {
        UpdateRules {
            fermi_s: self.fermi_s,
            rates: self.exploration.rates(),
            evolving: self.exploration.is_evolving(),
            scope: self.explore_scope,
        }
    }

    /// CSV header matching [`write_records_csv`].
    pub fn csv_header(&self) -> Vec<String> {
        let mut cols = vec!["iteration".to_string(), "prop_A".into(), "prop_B".into()];
        if let Exploration::Evolving { rates } = &self.exploration {
            cols.extend(rates.iter().map(|r| format!("share_mu_{r:?}")));
        }
        cols
    }
}

/// Population summary after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub prop_a: f64,
    pub prop_b: f64,
    /// Share of agents holding each rate, in rate-set order. Evolving mode only.
    pub rate_shares: Option<Vec<f64>>,
}

impl IterationRecord {
    /// Population-mean exploration rate, when shares are tracked.
    pub fn mean_rate(&self, rates: &[f64]) -> Option<f64> {
        self.rate_shares
            .as_ref()
            .map(|s| s.iter().zip(rates).map(|(w, r)| w * r).sum())
    }
}

/// Writes `iteration,prop_A,prop_B[,share_mu_*]` rows.
pub fn write_records_csv<W: Write>(cfg: &SimConfig, records: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(cfg.csv_header())?;
    let mut row = Vec::new();
    for r in records {
        row.clear();
        row.push(r.iteration.to_string());
        row.push(r.prop_a.to_string());
        row.push(r.prop_b.to_string());
        if let Some(shares) = &r.rate_shares {
            row.extend(shares.iter().map(f64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
