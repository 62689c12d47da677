//! Under-approximate backward reachable sets of discrete-time uncertain
//! systems with constrained zonotopes.
//!
//! The crate is organised bottom-up:
//!
//! * [`lp`] — a dense two-phase simplex solver,
//! * [`sets`] — boxes, zonotopes, constrained zonotopes and H-polytopes,
//! * [`minkdiff`] — LP-based Minkowski-difference under-approximation,
//! * [`dynamics`] — interval arithmetic, system models and linearization error,
//! * [`brs`] — the backward-reachability engine (scaling and splitting),
//! * [`validation`] — independent oracles and Monte-Carlo utilities,
//! * [`scenarios`] — ready-made benchmark problems,
//! * [`acceptance`] — the pass/fail suite built on the above.

pub mod acceptance;
pub mod brs;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod minkdiff;
pub mod scenarios;
pub mod sets;
pub mod validation;

pub use error::{Error, Result};
