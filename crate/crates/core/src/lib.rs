pub mod bounds;
pub mod error;
pub mod estimators;
pub mod mc;
pub mod model;
pub mod moments;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod sweep;
pub mod sphere;

pub use error::{Error, Result};
pub use scalar::Real;

pub type UnitParameter = model::UnitVector<f64>;
pub type InverseTemp = model::InverseTemperature<f64>;
pub type Sample = model::LabeledSample<f64>;
