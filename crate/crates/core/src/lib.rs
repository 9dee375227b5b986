//! Proportional odds cumulative logit models with monotonicity constraints on
//! ordinal predictors.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: specification, design encoding, likelihood, score and information.
//! * [`estimation`]: unconstrained, direction-constrained and enumerated
//!   constrained maximum likelihood, plus nuisance profiling.
//! * [`inference`]: quantiles, likelihood-ratio and Wald statistics, profile
//!   confidence regions, hypothesis tests and diagnostics.
//! * [`simulation`]: data generation from known truths and Monte Carlo
//!   coverage/rejection experiments.
//! * [`cli`]: the `poclm` command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod inference;
pub mod model;
pub mod par;
pub mod simulation;

pub use error::{Error, Result};
