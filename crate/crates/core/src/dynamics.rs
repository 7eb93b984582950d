//! Replicator and replicator-mutator dynamics on an infinite well-mixed
//! population.
//!
//! The state is the share `x_A` of `A` players. Every rate has a closed form
//! in terms of `(a, b, c)` and a definitional form built from the expected
//! payoffs `E[u_A]`, `E[u_B]` and the population mean `θ` on an arbitrary
//! payoff matrix. The two are kept separate so they can check each other.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, PayoffMatrix, ReducedGame};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 200.0;

/// Share of the population playing `A`; `x_B = 1 - x_A`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PopulationState(f64);

impl PopulationState {
    pub fn new(x_a: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&x_a) {
            Ok(PopulationState(x_a))
        } else {
            Err(Error::config("x0", format!("{x_a} is outside [0, 1]")))
        }
    }

    /// Clamps into `[0, 1]`; NaN is left to the caller to detect.
    fn clamped(x_a: f64) -> Self {
        PopulationState(x_a.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn x_a(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn x_b(self) -> f64 {
        1.0 - self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    Replicator,
    ReplicatorMutator,
}

impl FromStr for DynamicsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicator" => Ok(DynamicsKind::Replicator),
            "replicator_mutator" | "replicator-mutator" | "mutator" => {
                Ok(DynamicsKind::ReplicatorMutator)
            }
            other => Err(Error::config(
                "kind",
                format!("unknown dynamics {other:?} (expected replicator or replicator_mutator)"),
            )),
        }
    }
}

impl fmt::Display for DynamicsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DynamicsKind::Replicator => "replicator",
            DynamicsKind::ReplicatorMutator => "replicator_mutator",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub kind: DynamicsKind,
    /// Exploration rate, read only by the replicator-mutator dynamic.
    pub mu: f64,
    pub dt: f64,
    pub t_max: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            kind: DynamicsKind::Replicator,
            mu: 0.0,
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
        }
    }
}

impl DynamicsParams {
    pub fn replicator(dt: f64, t_max: f64) -> Self {
        DynamicsParams {
            kind: DynamicsKind::Replicator,
            mu: 0.0,
            dt,
            t_max,
        }
    }

    pub fn mutator(mu: f64, dt: f64, t_max: f64) -> Self {
        DynamicsParams {
            kind: DynamicsKind::ReplicatorMutator,
            mu,
            dt,
            t_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be positive and finite"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::config("tmax", "must be positive and finite"));
        }
        if self.dt > self.t_max {
            return Err(Error::config("dt", "must not exceed tmax"));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::config("mu", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Right-hand side `dx_A/dt` selected by `kind`.
    pub fn rate(&self, g: &ReducedGame, x_a: f64) -> f64 {
        match self.kind {
            DynamicsKind::Replicator => replicator_rate(g, x_a),
            DynamicsKind::ReplicatorMutator => mutator_rate(g, x_a, self.mu),
        }
    }
}

/// Closed-form replicator field `x_A·x_B·(c(a+b)·x_A - (b - (1-c)·a))`.
#[inline]
pub fn replicator_rate(g: &ReducedGame, x_a: f64) -> f64 {
    let (a, b, c) = (g.a(), g.b(), g.c());
    x_a * (1.0 - x_a) * (c * (a + b) * x_a - (b - (1.0 - c) * a))
}

/// Closed-form replicator-mutator field: the replicator field plus
/// `μ·(x_A·x_B·(1-c)(b-a) + x_B²·b - x_A²·a)`.
#[inline]
pub fn mutator_rate(g: &ReducedGame, x_a: f64, mu: f64) -> f64 {
    let (a, b, c) = (g.a(), g.b(), g.c());
    let x_b = 1.0 - x_a;
    replicator_rate(g, x_a) + mu * (x_a * x_b * (1.0 - c) * (b - a) + (x_b * x_b * b - x_a * x_a * a))
}

/// `(E[u_A], E[u_B])` against a randomly drawn member of the population.
pub fn expected_payoffs(m: &PayoffMatrix, x_a: f64) -> (f64, f64) {
    let x_b = 1.0 - x_a;
    (
        x_a * m.get(Action::A, Action::A) + x_b * m.get(Action::A, Action::B),
        x_a * m.get(Action::B, Action::A) + x_b * m.get(Action::B, Action::B),
    )
}

/// Mean payoff `θ = x_A·E[u_A] + x_B·E[u_B]`.
pub fn mean_payoff(m: &PayoffMatrix, x_a: f64) -> f64 {
    let (ua, ub) = expected_payoffs(m, x_a);
    x_a * ua + (1.0 - x_a) * ub
}

/// `x_A·(E[u_A] - θ)` on any payoff matrix.
pub fn replicator_rate_from_matrix(m: &PayoffMatrix, x_a: f64) -> f64 {
    let (ua, _) = expected_payoffs(m, x_a);
    x_a * (ua - mean_payoff(m, x_a))
}

/// `(1-μ)·x_A·E[u_A] + μ·x_B·E[u_B] - x_A·θ` on any payoff matrix.
///
/// `A` players keep their action with probability `1-μ`, and `B` players
/// switch into `A` with probability `μ`.
pub fn mutator_rate_from_matrix(m: &PayoffMatrix, x_a: f64, mu: f64) -> f64 {
    let (ua, ub) = expected_payoffs(m, x_a);
    let x_b = 1.0 - x_a;
    (1.0 - mu) * x_a * ua + mu * x_b * ub - x_a * mean_payoff(m, x_a)
}

/// Roots of the replicator field that lie in `[0, 1]`, ascending and
/// deduplicated.
pub fn fixed_points(g: &ReducedGame) -> Vec<f64> {
    let mut pts = vec![0.0, 1.0];
    if g.c() > 0.0 {
        let phi = crate::equilibria::interior_point(g);
        if (0.0..=1.0).contains(&phi) {
            pts.push(phi);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Sampled solution of the dynamic. Index `k` holds the state at `times[k]`
/// and the field evaluated there.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PopulationState>,
    pub rates: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> PopulationState {
        *self.states.last().expect("trajectory has at least one sample")
    }

    /// First time `x_B` reaches `target`, linearly interpolated between
    /// samples. `None` if it never does.
    pub fn time_to_reach_b(&self, target: f64) -> Option<f64> {
        let xb: Vec<f64> = self.states.iter().map(|s| s.x_b()).collect();
        first_crossing(&self.times, &xb, target)
    }

    /// Same as [`Trajectory::time_to_reach_b`] for `x_A`.
    pub fn time_to_reach_a(&self, target: f64) -> Option<f64> {
        let xa: Vec<f64> = self.states.iter().map(|s| s.x_a()).collect();
        first_crossing(&self.times, &xa, target)
    }

    /// CSV with header `t,x_A,x_B,rate`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x_A", "x_B", "rate"])?;
        for ((t, s), r) in self.times.iter().zip(&self.states).zip(&self.rates) {
            w.write_record([
                t.to_string(),
                s.x_a().to_string(),
                s.x_b().to_string(),
                r.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// First crossing of `target` by `values` from either side, interpolated.
pub(crate) fn first_crossing(times: &[f64], values: &[f64], target: f64) -> Option<f64> {
    let first = *values.first()?;
    if first == target {
        return Some(times[0]);
    }
    let rising = first < target;
    for k in 1..values.len() {
        let (v0, v1) = (values[k - 1], values[k]);
        let crossed = if rising { v1 >= target } else { v1 <= target };
        if crossed {
            let (t0, t1) = (times[k - 1], times[k]);
            if v1 == v0 {
                return Some(t1);
            }
            return Some(t0 + (target - v0) / (v1 - v0) * (t1 - t0));
        }
    }
    None
}

/// One classical fourth-order Runge-Kutta step of size `h`.
#[inline]
pub fn rk4_step(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let k1 = f(x);
    let k2 = f(x + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h * k2);
    let k4 = f(x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates from `t = 0` to `t_max` with fixed-step RK4, clamping the state
/// into `[0, 1]` after every step. When `t_max` is not a whole number of
/// steps the last step is shortened to land on it exactly.
pub fn integrate(g: &ReducedGame, x0: f64, p: &DynamicsParams) -> Result<Trajectory> {
    p.validate()?;
    let mut x = PopulationState::new(x0)?;
    let field = |x: f64| p.rate(g, x);

    let full_steps = (p.t_max / p.dt * (1.0 + 1e-12)).floor() as usize;
    let covered = full_steps as f64 * p.dt;
    let tail = p.t_max - covered;
    let has_tail = tail > p.dt * 1e-9;
    let n = full_steps + usize::from(has_tail);

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut rates = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(x);
    rates.push(field(x.x_a()));

    for k in 1..=n {
        let (h, t) = if k <= full_steps {
            (p.dt, if k == n { p.t_max } else { k as f64 * p.dt })
        } else {
            (tail, p.t_max)
        };
        let next = rk4_step(field, x.x_a(), h);
        if !next.is_finite() {
            return Err(Error::NonFiniteState { time: t });
        }
        x = PopulationState::clamped(next);
        let r = field(x.x_a());
        if !r.is_finite() {
            return Err(Error::NonFiniteState { time: t });
        }
        times.push(t);
        states.push(x);
        rates.push(r);
    }

    Ok(Trajectory {
        times,
        states,
        rates,
    })
}

/// `dx_B/dt` under `g2` minus under `g1`, in closed form:
/// `x_B·(1-x_B)·(c2-c1)·((a+b)·x_B - b)`.
///
/// Nonpositive up to `x_B = b/(a+b)` and positive beyond it.
pub fn rate_difference(g1: &ReducedGame, g2: &ReducedGame, x_b: f64) -> Result<f64> {
    if g1.a() != g2.a() || g1.b() != g2.b() {
        return Err(Error::ConstraintViolation(format!(
            "games must share payoffs: ({}, {}) vs ({}, {})",
            g1.a(),
            g1.b(),
            g2.a(),
            g2.b()
        )));
    }
    if !(g2.c() > g1.c()) {
        return Err(Error::ConstraintViolation(format!(
            "second game must be tighter: c2 = {} <= c1 = {}",
            g2.c(),
            g1.c()
        )));
    }
    let (a, b) = (g1.a(), g1.b());
    Ok(x_b * (1.0 - x_b) * (g2.c() - g1.c()) * ((a + b) * x_b - b))
}
