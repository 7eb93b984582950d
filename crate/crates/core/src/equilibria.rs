//! Closed-form Nash equilibria of the reduced game, their stability under the
//! replicator dynamic and their ESS status.
//!
//! For `b > a` the all-`B` profile is always a strict equilibrium. The all-`A`
//! profile becomes a Nash equilibrium once `c >= (b - a) / b`, and an ESS only
//! for `c` strictly above that value: at the threshold itself an `A`
//! population earns exactly what a rare `B` invader earns against it, and the
//! invader does strictly better against its own kind. The case `a > b` is the
//! mirror image. Whenever both pure profiles are strict equilibria there is
//! also an interior mixed equilibrium, which is never stable.
//!
//! [`invasion_oracle`] and [`best_response_scan`] evaluate the same questions
//! by direct payoff arithmetic and serve as independent checks of [`analyze`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, ReducedGame};

/// Probability `q` of playing `A`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy(f64);

impl MixedStrategy {
    pub fn new(q: f64) -> Option<Self> {
        (0.0..=1.0).contains(&q).then_some(MixedStrategy(q))
    }

    pub fn pure(action: Action) -> Self {
        match action {
            Action::A => MixedStrategy(1.0),
            Action::B => MixedStrategy(0.0),
        }
    }

    #[inline]
    pub fn q(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureStatus {
    pub is_nash: bool,
    pub is_ess: bool,
    pub is_stable_fixed_point: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedStatus {
    pub q: MixedStrategy,
    pub is_nash: bool,
    pub is_ess: bool,
    pub is_stable_fixed_point: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Weight above which the all-`A` profile is an equilibrium when `b > a`.
    #[serde(rename = "c_star_A")]
    pub c_star_a: f64,
    #[serde(rename = "c_star_B")]
    pub c_star_b: f64,
    /// `c` sits exactly on the active threshold: Nash but not ESS.
    pub at_threshold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    #[serde(rename = "pure_AA")]
    pub pure_aa: PureStatus,
    #[serde(rename = "pure_BB")]
    pub pure_bb: PureStatus,
    pub mixed: Option<MixedStatus>,
    pub thresholds: Thresholds,
}

impl EquilibriumReport {
    pub fn pure(&self, action: Action) -> &PureStatus {
        match action {
            Action::A => &self.pure_aa,
            Action::B => &self.pure_bb,
        }
    }
}

/// Thresholds `(c*_A, c*_B)`; the one belonging to the optimal action is 0.
pub fn thresholds(g: &ReducedGame) -> (f64, f64) {
    let (a, b) = (g.a(), g.b());
    let c_star_a = if b > a { (b - a) / b } else { 0.0 };
    let c_star_b = if a > b { (a - b) / a } else { 0.0 };
    (c_star_a, c_star_b)
}

pub fn analyze(g: &ReducedGame) -> Result<EquilibriumReport> {
    let (a, b, c) = (g.a(), g.b(), g.c());
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::NonPositivePayoff { a, b });
    }
    let (c_star_a, c_star_b) = thresholds(g);

    let strict = PureStatus {
        is_nash: true,
        is_ess: true,
        is_stable_fixed_point: true,
    };
    let conditional = |c_star: f64| {
        let ess = c > c_star;
        PureStatus {
            is_nash: c >= c_star,
            is_ess: ess,
            is_stable_fixed_point: ess,
        }
    };

    let (pure_aa, pure_bb, active) = match g.optimal_action() {
        Some(Action::B) => (conditional(c_star_a), strict, c_star_a),
        Some(Action::A) => (strict, conditional(c_star_b), c_star_b),
        None if c > 0.0 => (strict, strict, 0.0),
        // c = 0 and a = b: every strategy earns the same, nothing resists.
        None => {
            let neutral = PureStatus {
                is_nash: true,
                is_ess: false,
                is_stable_fixed_point: false,
            };
            (neutral, neutral, 0.0)
        }
    };

    let mixed = if c > active {
        let q = if a == b {
            MixedStrategy(0.5)
        } else {
            MixedStrategy((interior_point(g)).clamp(0.0, 1.0))
        };
        Some(MixedStatus {
            q,
            is_nash: true,
            is_ess: false,
            is_stable_fixed_point: false,
        })
    } else {
        None
    };

    Ok(EquilibriumReport {
        pure_aa,
        pure_bb,
        mixed,
        thresholds: Thresholds {
            c_star_a,
            c_star_b,
            at_threshold: a != b && c == active,
        },
    })
}

/// `(b - (1-c)·a) / (c·(a + b))`, the interior root of the replicator field.
/// Meaningless for `c = 0`.
#[inline]
pub fn interior_point(g: &ReducedGame) -> f64 {
    let (a, b, c) = (g.a(), g.b(), g.c());
    (b - (1.0 - c) * a) / (c * (a + b))
}

/// The interior mixed equilibrium, when one exists in `[0, 1]`.
pub fn mixed_q(g: &ReducedGame) -> Option<MixedStrategy> {
    if g.c() <= 0.0 {
        return None;
    }
    MixedStrategy::new(interior_point(g))
}

/// Expected payoff of a player mixing with `mine` against an opponent mixing
/// with `theirs`.
pub fn expected_payoff(g: &ReducedGame, mine: MixedStrategy, theirs: MixedStrategy) -> f64 {
    let (p, q) = (mine.q(), theirs.q());
    p * (q * g.payoff(Action::A, Action::A) + (1.0 - q) * g.payoff(Action::A, Action::B))
        + (1.0 - p)
            * (q * g.payoff(Action::B, Action::A) + (1.0 - q) * g.payoff(Action::B, Action::B))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvasionOutcome {
    pub resident_payoff: f64,
    pub invader_payoff: f64,
    pub resists: bool,
}

/// Expected payoffs of residents and of a share `invader_share` of the
/// opposite action in a well-mixed population.
pub fn invasion_oracle(g: &ReducedGame, resident: Action, invader_share: f64) -> InvasionOutcome {
    let invader = resident.other();
    let eps = invader_share;
    let resident_payoff =
        (1.0 - eps) * g.payoff(resident, resident) + eps * g.payoff(resident, invader);
    let invader_payoff =
        (1.0 - eps) * g.payoff(invader, resident) + eps * g.payoff(invader, invader);
    InvasionOutcome {
        resident_payoff,
        invader_payoff,
        resists: resident_payoff > invader_payoff,
    }
}

#[derive(Debug, Clone)]
pub struct BestResponseScan {
    /// Highest payoff found over the grid.
    pub best_payoff: f64,
    pub best_q: f64,
    /// Payoffs at every grid point, in grid order.
    pub payoffs: Vec<f64>,
}

/// Evaluates every strategy on an evenly spaced grid of `points` values of `q`
/// (endpoints included) against the fixed `opponent`.
pub fn best_response_scan(
    g: &ReducedGame,
    opponent: MixedStrategy,
    points: usize,
) -> BestResponseScan {
    assert!(points >= 2, "grid needs both endpoints");
    let mut best_payoff = f64::NEG_INFINITY;
    let mut best_q = 0.0;
    let payoffs: Vec<f64> = (0..points)
        .map(|i| {
            let q = i as f64 / (points - 1) as f64;
            let u = expected_payoff(g, MixedStrategy(q), opponent);
            if u > best_payoff {
                best_payoff = u;
                best_q = q;
            }
            u
        })
        .collect();
    BestResponseScan {
        best_payoff,
        best_q,
        payoffs,
    }
}

/// Whether the symmetric profile where both play `strategy` survives a grid
/// search for a profitable deviation.
pub fn is_nash_by_scan(g: &ReducedGame, strategy: MixedStrategy, points: usize) -> bool {
    let own = expected_payoff(g, strategy, strategy);
    let scan = best_response_scan(g, strategy, points);
    scan.best_payoff <= own
}
