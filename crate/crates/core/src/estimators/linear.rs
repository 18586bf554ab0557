use super::{check_nonempty, row_mean, EstimateResult, Objective};
use crate::error::{Error, Result};
use crate::model::{Dataset, UnitVector};
use crate::scalar::Real;

/// Normalized mean of `y_i x_i`, the maximizer of the empirical correlation
/// over the sphere.
pub fn linear_estimate<T: Real>(ds: &Dataset<T>) -> Result<EstimateResult<T>> {
    let theta = linear_direction(ds)?;
    Ok(EstimateResult::new(ds, theta, Objective::Correlation))
}

pub(crate) fn linear_direction<T: Real>(ds: &Dataset<T>) -> Result<UnitVector<T>> {
    check_nonempty(ds)?;
    let mean = row_mean(&ds.signed_covariates(), ds.dim());
    UnitVector::normalize(mean).map_err(|e| match e {
        Error::DegenerateVector => Error::Degenerate("mean of y_i x_i is zero".into()),
        other => other,
    })
}
