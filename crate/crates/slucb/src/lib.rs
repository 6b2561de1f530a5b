//! Sparse linear stochastic bandits on the l2 unit ball.
//!
//! The crate implements SL-UCB (random-projection support exploration
//! followed by a linear bandit restricted to the recovered coordinates),
//! the fixed-horizon ConfidenceBall2 subroutine it builds on, a
//! bandit-driven gradient-ascent application for functions with sparse
//! gradients, and a seeded Monte Carlo harness for regret and
//! support-recovery experiments.
//!
//! Start with the runnable examples (`cargo run --release -p slucb
//! --example <name>`):
//!
//! - `ellipsoid_subproblem`: the norm-maximization step behind arm selection
//! - `cb2_run`: a single ConfidenceBall2 run with its regret diagnostic
//! - `slucb_run`: one SL-UCB run end to end (phases, active set, regret)
//! - `support_recovery`: Monte Carlo support-recovery and phase-length stats
//! - `regret_scaling`: regret growth against the budget, with a slope fit
//! - `gradient_ascent`: high-dimensional ascent comparison (OGS/SL-UCB/BRD)
//!
//! Every simulation consumes an explicit [`rng::RngStream`] seed, and reruns
//! with the same seed are byte-identical.

// Validation uses `!(x > 0.0)` so NaN is rejected too; eigendecomposition
// loops index several parallel arrays; nalgebra expressions borrow their
// operands to avoid moves.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::op_ref)]

pub mod cb2;
pub mod cli;
pub mod config;
pub mod domain;
pub mod env;
pub mod error;
pub mod gradient;
pub mod harness;
pub mod rng;
pub mod selftest;
pub mod slucb;

pub use domain::{ArmVector, ProblemInstance};
pub use env::{NoiseKind, NoiseModel, RunRecord};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use slucb::{run_slucb, SlucbConfig, SlucbRun};
