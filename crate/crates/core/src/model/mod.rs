//! The logistic model with Gaussian design and its parameter geometry.

mod geometry;
mod link;
mod rng;
mod sampling;
mod types;

pub use geometry::{
    correlation, correlation_to_param_distance, disagreement_probability, error_rate_at_correlation,
    param_distance_to_correlation, population_error_rate,
};
pub use link::{bernoulli_kl_bregman, log_partition, logistic_curvature, logistic_link};
pub use rng::{label_hash, stream_hash, RngSeed};
pub use sampling::{sample_dataset, ModelSampler};
pub(crate) use types::{dot, vector_norm};
pub use types::{Dataset, InverseTemperature, Label, LabeledSample, UnitVector};
