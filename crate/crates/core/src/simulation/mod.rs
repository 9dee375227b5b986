//! Data generation from known truths and Monte Carlo coverage and rejection
//! experiments.

pub mod experiment;
pub mod generate;
pub mod report;
pub mod truth;

pub use experiment::{
    coverage_experiment, rejection_experiment, run_experiments, ExperimentConfig, ExperimentKind,
    PredictorTruth, Preset, RejectionHypothesis, TruthConfig,
};
pub use generate::{generate_dataset, generate_design, generate_with, replicate_rng};
pub use report::{ExperimentReport, ReportRow, SizeDiagnostics, Split};
pub use truth::{CovariateLaw, Ladder, TruthSpec};
