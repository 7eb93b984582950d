//! The two-action game: a coordination game blended with a fixed-payoff game
//! by the need-for-coordination weight `c`.
//!
//! Two parameterizations are provided. [`GameSpec`] holds the four raw payoffs
//! of the coordination and fixed-payoff games and produces the weighted matrix
//! `c·M_c + (1-c)·M_f`. When both games share the same payoff gap between the
//! actions, that matrix is an affine shift of the simpler [`ReducedGame`]
//! matrix
//!
//! ```text
//!          A          B
//!   A      a       (1-c)·a
//!   B   (1-c)·b       b
//! ```
//!
//! which is what all of the dynamics run on.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the equal-gap condition `a_c - b_c == a_f - b_f`.
pub const REDUCTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    A,
    B,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::A, Action::B];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Action::A => 0,
            Action::B => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Action {
        match self {
            Action::A => Action::B,
            Action::B => Action::A,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::A => f.write_str("A"),
            Action::B => f.write_str("B"),
        }
    }
}

/// Row-player payoffs of a symmetric two-action game.
///
/// `entries[row][col]` is what a player choosing `row` earns against an
/// opponent choosing `col`. The column player's payoff at `(row, col)` is
/// `entries[col][row]`, so the bimatrix is symmetric by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub entries: [[f64; 2]; 2],
}

impl PayoffMatrix {
    pub fn new(aa: f64, ab: f64, ba: f64, bb: f64) -> Self {
        PayoffMatrix {
            entries: [[aa, ab], [ba, bb]],
        }
    }

    #[inline]
    pub fn get(&self, mine: Action, theirs: Action) -> f64 {
        self.entries[mine.index()][theirs.index()]
    }

    /// Payoff of the column player when the profile is `(row, col)`.
    #[inline]
    pub fn column_payoff(&self, row: Action, col: Action) -> f64 {
        self.get(col, row)
    }

    /// Adds `gamma` to every entry.
    pub fn shifted(&self, gamma: f64) -> Self {
        let mut out = *self;
        for row in out.entries.iter_mut() {
            for v in row.iter_mut() {
                *v += gamma;
            }
        }
        out
    }
}

/// Raw payoffs of the coordination game (`a_c`, `b_c`) and the fixed-payoff
/// game (`a_f`, `b_f`), plus the weight `c` on the coordination game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub a_c: f64,
    pub b_c: f64,
    pub a_f: f64,
    pub b_f: f64,
    pub c: f64,
}

impl GameSpec {
    pub fn new(a_c: f64, b_c: f64, a_f: f64, b_f: f64, c: f64) -> Result<Self> {
        let spec = GameSpec { a_c, b_c, a_f, b_f, c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_c", self.a_c),
            ("b_c", self.b_c),
            ("a_f", self.a_f),
            ("b_f", self.b_f),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        check_weight(self.c)
    }

    /// Whether the equal-gap condition holds, so the weighted matrix is a
    /// constant shift of the reduced one.
    pub fn is_reducible(&self) -> bool {
        ((self.a_c - self.b_c) - (self.a_f - self.b_f)).abs() <= REDUCTION_TOLERANCE
    }

    /// Offset between the two games' payoffs, `a_c - a_f`.
    pub fn gap(&self) -> f64 {
        self.a_c - self.a_f
    }

    /// The constant that maps the weighted matrix onto the reduced matrix,
    /// `(1-c)·(a_c - a_f)`.
    pub fn shift(&self) -> f64 {
        (1.0 - self.c) * self.gap()
    }

    pub fn weighted_matrix(&self) -> PayoffMatrix {
        weighted_matrix(self)
    }

    pub fn reduce(&self) -> Result<ReducedGame> {
        reduce(self)
    }
}

/// `c·M_c + (1-c)·M_f`.
pub fn weighted_matrix(spec: &GameSpec) -> PayoffMatrix {
    let c = spec.c;
    let w = 1.0 - c;
    PayoffMatrix::new(
        c * spec.a_c + w * spec.a_f,
        w * spec.a_f,
        w * spec.b_f,
        c * spec.b_c + w * spec.b_f,
    )
}

pub fn reduce(spec: &GameSpec) -> Result<ReducedGame> {
    spec.validate()?;
    if !spec.is_reducible() {
        return Err(Error::ConstraintViolation(format!(
            "a_c - b_c ({}) differs from a_f - b_f ({})",
            spec.a_c - spec.b_c,
            spec.a_f - spec.b_f
        )));
    }
    ReducedGame::new(spec.a_c, spec.b_c, spec.c)
}

/// The reduced game `M'` with positive action payoffs `a`, `b` and weight `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawReducedGame", into = "RawReducedGame")]
pub struct ReducedGame {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct RawReducedGame {
    a: f64,
    b: f64,
    c: f64,
}

impl TryFrom<RawReducedGame> for ReducedGame {
    type Error = Error;

    fn try_from(raw: RawReducedGame) -> Result<Self> {
        ReducedGame::new(raw.a, raw.b, raw.c)
    }
}

impl From<ReducedGame> for RawReducedGame {
    fn from(g: ReducedGame) -> Self {
        RawReducedGame {
            a: g.a,
            b: g.b,
            c: g.c,
        }
    }
}

impl ReducedGame {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::NonPositivePayoff { a, b });
        }
        check_weight(c)?;
        Ok(ReducedGame { a, b, c })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Same payoffs, different weight.
    pub fn with_c(&self, c: f64) -> Result<Self> {
        ReducedGame::new(self.a, self.b, c)
    }

    pub fn matrix(&self) -> PayoffMatrix {
        let w = 1.0 - self.c;
        PayoffMatrix::new(self.a, w * self.a, w * self.b, self.b)
    }

    #[inline]
    pub fn payoff(&self, mine: Action, theirs: Action) -> f64 {
        payoff(self, mine, theirs)
    }

    pub fn shocked(&self) -> Self {
        apply_shock(self)
    }

    /// The action whose coordinated payoff is higher, if the two differ.
    pub fn optimal_action(&self) -> Option<Action> {
        if self.a > self.b {
            Some(Action::A)
        } else if self.b > self.a {
            Some(Action::B)
        } else {
            None
        }
    }
}

/// Swaps the payoffs of the two actions. Applying it twice is the identity.
pub fn apply_shock(g: &ReducedGame) -> ReducedGame {
    ReducedGame {
        a: g.b,
        b: g.a,
        c: g.c,
    }
}

#[inline]
pub fn payoff(g: &ReducedGame, mine: Action, theirs: Action) -> f64 {
    match (mine, theirs) {
        (Action::A, Action::A) => g.a,
        (Action::A, Action::B) => (1.0 - g.c) * g.a,
        (Action::B, Action::A) => (1.0 - g.c) * g.b,
        (Action::B, Action::B) => g.b,
    }
}

fn check_weight(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::config("c", format!("{c} is outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(x: f64, y: f64) -> bool {
        (x - y).abs() <= 1e-12
    }

    #[test]
    fn uniform_payoffs_weighted_half() {
        let m = weighted_matrix(&GameSpec::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap());
        assert_eq!(m, PayoffMatrix::new(1.0, 0.5, 0.5, 1.0));
    }

    #[test]
    fn weight_zero_is_fixed_game_and_one_is_coordination() {
        let spec = GameSpec::new(1.3, 0.7, 2.0, 0.25, 0.0).unwrap();
        let m = weighted_matrix(&spec);
        assert_eq!(m, PayoffMatrix::new(2.0, 2.0, 0.25, 0.25));

        let spec = GameSpec { c: 1.0, ..spec };
        let m = weighted_matrix(&spec);
        assert_eq!(m, PayoffMatrix::new(1.3, 0.0, 0.0, 0.7));
    }

    #[test]
    fn reduce_shifts_weighted_matrix_by_gap() {
        let spec = GameSpec::new(1.0, 1.15, 0.6, 0.75, 0.5).unwrap();
        let g = reduce(&spec).unwrap();
        assert_eq!((g.a(), g.b(), g.c()), (1.0, 1.15, 0.5));
        assert!(close(spec.gap(), 0.4));
        assert!(close(spec.shift(), 0.2));

        // M' written out by hand for a = 1, b = 1.15, c = 0.5.
        let expected = PayoffMatrix::new(1.0, 0.5, 0.575, 1.15);
        let shifted = spec.weighted_matrix().shifted(spec.shift());
        for x in Action::ALL {
            for y in Action::ALL {
                assert!(close(shifted.get(x, y), expected.get(x, y)), "{x}{y}");
                assert!(close(g.payoff(x, y), expected.get(x, y)), "{x}{y}");
            }
        }
    }

    #[test]
    fn reduce_identical_games_has_zero_shift() {
        for c in [0.0, 0.3, 1.0] {
            let spec = GameSpec::new(1.0, 1.0, 1.0, 1.0, c).unwrap();
            let g = reduce(&spec).unwrap();
            assert_eq!((g.a(), g.b(), g.c()), (1.0, 1.0, c));
            assert_eq!(spec.shift(), 0.0);
        }
    }

    #[test]
    fn reduce_rejects_unequal_gaps() {
        let spec = GameSpec::new(1.0, 1.15, 0.6, 0.9, 0.5).unwrap();
        assert!(!spec.is_reducible());
        assert!(matches!(reduce(&spec), Err(Error::ConstraintViolation(_))));
    }

    #[test]
    fn reduce_rejects_nonpositive_coordination_payoffs() {
        let spec = GameSpec::new(0.0, -0.5, 0.5, 0.0, 0.5).unwrap();
        assert!(matches!(
            reduce(&spec),
            Err(Error::NonPositivePayoff { .. })
        ));
    }

    #[test]
    fn weight_out_of_range_rejected() {
        assert!(GameSpec::new(1.0, 1.0, 1.0, 1.0, 1.5).is_err());
        assert!(ReducedGame::new(1.0, 1.0, -0.1).is_err());
        assert!(ReducedGame::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn shock_swaps_payoffs() {
        let g = ReducedGame::new(1.0, 1.15, 0.75).unwrap();
        let s = apply_shock(&g);
        assert_eq!((s.a(), s.b(), s.c()), (1.15, 1.0, 0.75));

        let sym = ReducedGame::new(0.8, 0.8, 0.2).unwrap();
        assert_eq!(apply_shock(&sym), sym);

        let g = ReducedGame::new(0.4, 0.6, 0.3).unwrap();
        assert_eq!(apply_shock(&apply_shock(&g)), g);
    }

    #[test]
    fn payoff_examples() {
        let g = ReducedGame::new(1.0, 1.15, 1.0).unwrap();
        assert_eq!(payoff(&g, Action::A, Action::B), 0.0);
        let g = ReducedGame::new(1.0, 1.15, 0.0).unwrap();
        assert_eq!(payoff(&g, Action::A, Action::B), 1.0);
        let g = ReducedGame::new(1.0, 1.15, 0.5).unwrap();
        assert!(close(payoff(&g, Action::B, Action::A), 0.575));
    }

    #[test]
    fn matrix_agrees_with_payoff() {
        let g = ReducedGame::new(0.7, 2.1, 0.35).unwrap();
        let m = g.matrix();
        for x in Action::ALL {
            for y in Action::ALL {
                assert_eq!(m.get(x, y), g.payoff(x, y));
                assert_eq!(m.column_payoff(x, y), m.get(y, x));
            }
        }
    }

    #[test]
    fn serde_rejects_invalid_reduced_game() {
        let ok: ReducedGame = serde_json::from_str(r#"{"a":1.0,"b":1.15,"c":0.5}"#).unwrap();
        assert_eq!(ok.b(), 1.15);
        assert!(serde_json::from_str::<ReducedGame>(r#"{"a":0.0,"b":1.15,"c":0.5}"#).is_err());
    }

    fn reducible_spec() -> impl Strategy<Value = GameSpec> {
        (0.05f64..5.0, 0.05f64..5.0, -3.0f64..3.0, 0.0f64..=1.0).prop_map(|(a, b, gamma, c)| {
            GameSpec {
                a_c: a,
                b_c: b,
                a_f: a - gamma,
                b_f: b - gamma,
                c,
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn reduced_payoff_is_shifted_weighted_entry(spec in reducible_spec()) {
            prop_assume!(spec.is_reducible());
            let g = reduce(&spec).unwrap();
            let m = weighted_matrix(&spec);
            let gamma = spec.shift();
            for x in Action::ALL {
                for y in Action::ALL {
                    let lhs = g.payoff(x, y);
                    let rhs = m.get(x, y) + gamma;
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{} {} {} {}", x, y, lhs, rhs);
                }
            }
        }

        #[test]
        fn degenerate_weights(a in 0.05f64..5.0, b in 0.05f64..5.0) {
            let loose = ReducedGame::new(a, b, 0.0).unwrap();
            let tight = ReducedGame::new(a, b, 1.0).unwrap();
            for x in Action::ALL {
                prop_assert_eq!(loose.payoff(x, Action::A), loose.payoff(x, Action::B));
                prop_assert_eq!(tight.payoff(x, x.other()), 0.0);
            }
        }

        #[test]
        fn shock_is_involution(a in 0.05f64..5.0, b in 0.05f64..5.0, c in 0.0f64..=1.0) {
            let g = ReducedGame::new(a, b, c).unwrap();
            prop_assert_eq!(g.shocked().c(), c);
            prop_assert_eq!(g.shocked().shocked(), g);
        }
    }
}
