use super::link::logistic_link;
use super::types::{InverseTemperature, UnitVector};
use crate::error::{Error, Result};
use crate::quadrature::{Feature, Integrator};
use crate::scalar::Real;

/// `rho = 1 - dist^2 / 2` for two unit vectors at chord distance `dist`.
pub fn param_distance_to_correlation<T: Real>(dist: T) -> Result<T> {
    if !(dist >= T::zero() && dist <= T::lit(2.0)) {
        return Err(Error::OutOfRange {
            value: dist.as_f64(),
            range: "[0, 2]",
        });
    }
    Ok(T::one() - dist * dist / T::lit(2.0))
}

/// Inverse of [`param_distance_to_correlation`].
pub fn correlation_to_param_distance<T: Real>(rho: T) -> Result<T> {
    if !(rho >= -T::one() && rho <= T::one()) {
        return Err(Error::OutOfRange {
            value: rho.as_f64(),
            range: "[-1, 1]",
        });
    }
    Ok((T::lit(2.0) * (T::one() - rho)).sqrt())
}

/// Inner product clamped into `[-1, 1]`.
pub fn correlation<T: Real>(theta: &UnitVector<T>, truth: &UnitVector<T>) -> Result<T> {
    truth.check_len(theta.dim())?;
    Ok(theta.dot(truth).max(-T::one()).min(T::one()))
}

/// `Pr(sign(x^T theta) != sign(x^T truth)) = arccos(theta^T truth) / pi`.
pub fn disagreement_probability<T: Real>(theta: &UnitVector<T>, truth: &UnitVector<T>) -> Result<T> {
    Ok(correlation(theta, truth)?.acos() / T::PI())
}

/// Misclassification probability of `sign(x^T theta)` on samples labeled by
/// the model with parameter `truth`.
pub fn population_error_rate<T: Real>(
    theta: &UnitVector<T>,
    truth: &UnitVector<T>,
    beta: InverseTemperature<T>,
) -> Result<T> {
    let rho = correlation(theta, truth)?;
    let b = match beta {
        InverseTemperature::Infinite => return Ok(rho.acos() / T::PI()),
        InverseTemperature::Finite(b) => b.as_f64(),
    };
    error_rate_at_correlation(rho.as_f64(), b).map(T::lit)
}

/// `E[g'(-beta sign(z) z')]` with `corr(z, z') = rho`.
pub fn error_rate_at_correlation(rho: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta(beta));
    }
    let width = 1.0 / beta;
    let q = Integrator::shared();
    if rho >= 1.0 {
        return q.expect(|z| logistic_link(-beta * z.abs()), &[Feature::new(0.0, width)]);
    }
    q.expect_pair(
        |z, zp| {
            let s = if z > 0.0 { 1.0 } else { -1.0 };
            logistic_link(-beta * s * zp)
        },
        rho,
        &[Feature::new(0.0, width.min(1.0))],
        &[Feature::new(0.0, width)],
    )
}
