//! Flat key-value game description used by CLI config files.
//!
//! ```text
//! a = 1.0
//! b = 1.15
//! c = 0.5
//! ```
//!
//! A file gives either the reduced payoffs `a`, `b` or the four raw payoffs
//! `a_c`, `b_c`, `a_f`, `b_f` (which are then reduced), plus the weight `c`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, ReducedGame};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl GameConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_flat_string(&self) -> String {
        toml::to_string(self).expect("flat numeric table always serializes")
    }

    pub fn from_reduced(g: &ReducedGame) -> Self {
        GameConfig {
            a: Some(g.a()),
            b: Some(g.b()),
            c: Some(g.c()),
            ..Default::default()
        }
    }

    pub fn from_spec(spec: &GameSpec) -> Self {
        GameConfig {
            a_c: Some(spec.a_c),
            b_c: Some(spec.b_c),
            a_f: Some(spec.a_f),
            b_f: Some(spec.b_f),
            c: Some(spec.c),
            ..Default::default()
        }
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(&self, other: &GameConfig) -> GameConfig {
        GameConfig {
            a_c: other.a_c.or(self.a_c),
            b_c: other.b_c.or(self.b_c),
            a_f: other.a_f.or(self.a_f),
            b_f: other.b_f.or(self.b_f),
            a: other.a.or(self.a),
            b: other.b.or(self.b),
            c: other.c.or(self.c),
        }
    }

    /// The raw-payoff form, when all four raw payoffs and `c` are present.
    pub fn spec(&self) -> Option<GameSpec> {
        Some(GameSpec {
            a_c: self.a_c?,
            b_c: self.b_c?,
            a_f: self.a_f?,
            b_f: self.b_f?,
            c: self.c?,
        })
    }

    /// Resolves to a reduced game, preferring explicit `a`/`b` over raw payoffs.
    pub fn resolve(&self) -> Result<ReducedGame> {
        let c = self.c.ok_or_else(|| Error::config("c", "missing"))?;
        match (self.a, self.b) {
            (Some(a), Some(b)) => ReducedGame::new(a, b, c),
            (Some(_), None) => Err(Error::config("b", "missing")),
            (None, Some(_)) => Err(Error::config("a", "missing")),
            (None, None) => match self.spec() {
                Some(spec) => spec.reduce(),
                None => Err(Error::config("a", "missing (give a and b, or a_c, b_c, a_f, b_f)")),
            },
        }
    }
}
