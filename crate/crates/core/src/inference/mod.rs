//! Likelihood-based inference: quantiles, test statistics, profile confidence
//! regions, hypothesis tests and the case diagnostics for a single ordinal predictor.

pub mod classify;
pub mod fits;
pub mod hypothesis;
pub mod quantile;
pub mod region;
pub mod stats;

pub use classify::{classify_case, CaseReport};
pub use fits::{Fits, SAME_MLE_TOLERANCE};
pub use hypothesis::{
    test_direction, test_monotonicity, test_no_effect, test_no_effect_in, test_non_monotonicity,
    HypothesisKind, TestOptions, TestOutcome, DECISION_ONLY,
};
pub use quantile::{chi2_quantile, mixture_quantile, QuantileFamily};
pub use region::{
    cr_grid, cr_membership, Axis, GridPoint, GridSpec, Membership, RegionGrid, RegionKind,
    RegionSpec, RegionSummary, RegionTarget,
};
pub use stats::{lr_between, lr_statistic, wald_ci, wald_statistic, LinearHypothesis};
