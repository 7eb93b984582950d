//! Norm change in populations that need to coordinate.
//!
//! - [`game`]: the two-action game and its reduction to `a`, `b`, `c`.
//! - [`equilibria`]: Nash and ESS classification with brute-force oracles.
//! - [`dynamics`]: replicator and replicator-mutator ODEs, integrated by RK4.
//! - [`abm`]: Fermi-rule imitation on networks, with optional evolving
//!   exploration.
//! - [`harness`]: seeded parallel replicates, sweeps and CSV output.
//! - [`config`]: the flat game file read by the CLI.
//!
//! The guide in `book/` walks through each part with runnable examples.

pub mod abm;
pub mod config;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod harness;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/equilibria.md")]
    mod equilibria {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/abm.md")]
    mod abm {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
