//! Data model and likelihood computations shared by every other module.

pub mod data;
pub mod likelihood;
pub mod params;
pub mod spec;

pub use data::{encode_design, DesignData, RawTable};
pub use likelihood::{
    category_probabilities, fisher_information, log_likelihood, observed_information, score,
    FisherInformation,
};
pub use params::{
    check_membership, classify_block, follows_direction, MembershipReport, MonotoneDirection,
    Monotonicity, ParameterSet, ParameterVector,
};
pub use spec::{
    Constraint, Direction, Layout, ModelSpec, PredictorRole, PredictorSpec, ResponseSpec,
};
