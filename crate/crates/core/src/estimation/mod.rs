//! Maximum likelihood estimators and nuisance profiling.
//!
//! Every estimator is a Newton-type maximisation under linear constraints:
//! ordered intercepts always, monotone cones for ordinal blocks with a fixed
//! direction. Blocks whose direction is left to the data are handled by
//! enumerating all direction assignments and keeping the best.

pub mod fit;
pub mod profile;
pub mod qp;
pub(crate) mod solver;

pub use fit::{
    fit_constrained, fit_direction_constrained, fit_partially_constrained, fit_unconstrained,
    EstimatorKind, FitOptions, FitResult, Subproblem, TIE_TOLERANCE,
};
pub use profile::{profile_nuisance, FixedBlock, ProfileMode, ProfileResult};
