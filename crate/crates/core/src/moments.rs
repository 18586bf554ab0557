//! Monte Carlo checks of the moment and concentration bounds for the
//! difference of ReLU losses
//! `delta_theta = [-y x^T theta]_+ - [-y x^T truth]_+`.

use serde::{Deserialize, Serialize};

use crate::bounds::{check_beta, expected_kl, BoundReport, Method, Relation};
use crate::error::{Error, Result};
use crate::mc;
use crate::model::{InverseTemperature, Label, LabeledSample, ModelSampler, RngSeed, UnitVector};
use crate::special::SQRT_2_OVER_PI;

/// Moment orders used to calibrate the Bernstein constant.
pub const CALIBRATION_ORDERS: std::ops::RangeInclusive<u32> = 2..=8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub q: u32,
    pub empirical_moment: f64,
    pub mc_std_error: f64,
    /// The explicit three-term bound (before constants are absorbed).
    pub bound_value: f64,
    /// Smallest `C` with `(q!/2) v b^(q-2)` dominating the empirical moment,
    /// for `b = C D` and `v = C D^2 (1/beta + D)`, `D = |theta - truth|`.
    pub constant_estimate: f64,
    pub pass: bool,
}

#[inline]
pub fn delta_theta(x: &[f64], y: Label, theta: &UnitVector, truth: &UnitVector) -> f64 {
    let s = y.sign::<f64>();
    (-s * theta.dot_slice(x)).max(0.0) - (-s * truth.dot_slice(x)).max(0.0)
}

pub fn delta_theta_sample(sample: &LabeledSample, theta: &UnitVector, truth: &UnitVector) -> f64 {
    delta_theta(&sample.covariate, sample.label, theta, truth)
}

fn factorial(q: u32) -> f64 {
    (1..=q).map(f64::from).product()
}

/// Sum of the disagreement term, the label-noise term with `q!/beta^q`, and
/// the orthogonal-component term, for distance `dist = |theta - truth|`.
pub fn three_term_bound(beta: f64, dist: f64, q: u32) -> f64 {
    let qf = f64::from(q);
    let gamma = libm::tgamma((qf + 1.0) / 2.0);
    let disagreement = 2f64.powf(qf - 1.0) / (std::f64::consts::PI * 2f64.sqrt())
        * gamma
        * (std::f64::consts::PI / 2f64.sqrt() * dist).powf(qf + 1.0);
    let noise = 2f64.powf(qf - 2.0) * dist.powf(2.0 * qf) * factorial(q) / beta.powf(qf);
    let orthogonal = 2f64.powf(2.0 * (qf - 1.0))
        * dist.powf(qf)
        * (1.0 - 0.25 * dist * dist).max(0.0).powf(qf / 2.0)
        * 2f64.powf(qf / 2.0)
        / std::f64::consts::PI.sqrt()
        * gamma
        * SQRT_2_OVER_PI
        / beta;
    disagreement + noise + orthogonal
}

/// Solves `moment = (q!/2) C^(q-1) D^q (1/beta + D)` for `C`.
pub fn moment_constant(moment: f64, beta: f64, dist: f64, q: u32) -> f64 {
    if dist == 0.0 || moment <= 0.0 {
        return 0.0;
    }
    let denom = factorial(q) * dist.powi(q as i32) * (1.0 / beta + dist);
    (2.0 * moment / denom).powf(1.0 / (f64::from(q) - 1.0))
}

fn validate(beta: f64, theta: &UnitVector, truth: &UnitVector, qs: &[u32]) -> Result<()> {
    check_beta(beta)?;
    if theta.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            got: theta.dim(),
        });
    }
    if let Some(&q) = qs.iter().find(|&&q| !(2..=12).contains(&q)) {
        return Err(Error::OutOfRange {
            value: f64::from(q),
            range: "2 <= q <= 12",
        });
    }
    Ok(())
}

/// Moment reports for several orders from one shared set of draws.
pub fn verify_relu_moments_multi(
    beta: f64,
    theta: &UnitVector,
    truth: &UnitVector,
    qs: &[u32],
    n_mc: usize,
    seed: RngSeed,
) -> Result<Vec<MomentReport>> {
    validate(beta, theta, truth, qs)?;
    if n_mc < 2 {
        return Err(Error::ZeroSamples);
    }
    let sampler = ModelSampler::new(truth.clone(), InverseTemperature::finite(beta)?);
    let dim = truth.dim();
    let partial = mc::chunked(n_mc, seed, |rng, len| {
        let mut x = vec![0.0; dim];
        let mut acc = vec![(0.0f64, 0.0f64); qs.len()];
        for _ in 0..len {
            let y = sampler.draw_into(&mut x, rng);
            let a = delta_theta(&x, y, theta, truth).abs();
            if a == 0.0 {
                continue;
            }
            for (slot, &q) in acc.iter_mut().zip(qs) {
                let m = a.powi(q as i32);
                slot.0 += m;
                slot.1 += m * m;
            }
        }
        acc
    });
    let mut totals = vec![(0.0, 0.0); qs.len()];
    for chunk in partial {
        for (t, c) in totals.iter_mut().zip(chunk) {
            t.0 += c.0;
            t.1 += c.1;
        }
    }
    let dist = theta.distance(truth);
    Ok(qs
        .iter()
        .zip(totals)
        .map(|(&q, (s, s2))| {
            let (moment, se) = mc::mean_and_se(n_mc, s, s2);
            let bound = three_term_bound(beta, dist, q);
            MomentReport {
                q,
                empirical_moment: moment,
                mc_std_error: se,
                bound_value: bound,
                constant_estimate: moment_constant(moment, beta, dist, q),
                pass: moment - 4.0 * se <= bound,
            }
        })
        .collect())
}

pub fn verify_relu_moments(
    beta: f64,
    theta: &UnitVector,
    truth: &UnitVector,
    q: u32,
    n_mc: usize,
    seed: RngSeed,
) -> Result<MomentReport> {
    Ok(verify_relu_moments_multi(beta, theta, truth, &[q], n_mc, seed)?.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinOutcome {
    /// Violation frequency against `delta + 3 SE`.
    pub report: BoundReport,
    /// Constant calibrated from the moment reports (max over orders 2..=8).
    pub constant: f64,
    /// Deviation threshold `sqrt(2 v t / n) + b t / n`, `t = ln(1/delta)`.
    pub threshold: f64,
    pub expected_delta: f64,
    pub median_deviation: f64,
}

/// Draws used to calibrate the constant before the concentration run.
pub const CALIBRATION_DRAWS: usize = 1_000_000;

/// Frequency with which `E[delta] - mean_i delta_i` exceeds the Bernstein
/// threshold over `trials` datasets of size `n`.
pub fn verify_bernstein_concentration(
    beta: f64,
    theta: &UnitVector,
    truth: &UnitVector,
    n: usize,
    trials: usize,
    delta: f64,
    seed: RngSeed,
) -> Result<BernsteinOutcome> {
    validate(beta, theta, truth, &[])?;
    if n == 0 || trials == 0 {
        return Err(Error::ZeroSamples);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange {
            value: delta,
            range: "(0, 1)",
        });
    }
    let dist = theta.distance(truth);
    let orders: Vec<u32> = CALIBRATION_ORDERS.collect();
    let calibration = verify_relu_moments_multi(
        beta,
        theta,
        truth,
        &orders,
        CALIBRATION_DRAWS,
        seed.derive(&[u64::MAX]),
    )?;
    let constant = calibration
        .iter()
        .map(|r| r.constant_estimate)
        .fold(0.0, f64::max);
    let t = (1.0 / delta).ln();
    let v = constant * dist * dist * (1.0 / beta + dist);
    let b = constant * dist;
    let nf = n as f64;
    let threshold = (2.0 * v * t / nf).sqrt() + b * t / nf;
    let rho = theta.dot(truth).clamp(-1.0, 1.0);
    let expected_delta = if dist == 0.0 {
        0.0
    } else {
        expected_kl(beta, rho)?.bregman / beta
    };

    let sampler = ModelSampler::new(truth.clone(), InverseTemperature::finite(beta)?);
    let dim = truth.dim();
    let mut deviations: Vec<f64> = {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed.derive(&[i as u64]).rng();
                let mut x = vec![0.0; dim];
                let mut s = 0.0;
                for _ in 0..n {
                    let y = sampler.draw_into(&mut x, &mut rng);
                    s += delta_theta(&x, y, theta, truth);
                }
                if dist == 0.0 {
                    0.0
                } else {
                    expected_delta - s / nf
                }
            })
            .collect()
    };
    let violations = deviations.iter().filter(|&&d| d > threshold).count();
    deviations.sort_by(f64::total_cmp);
    let median_deviation = deviations[trials / 2];
    let freq = violations as f64 / trials as f64;
    let se = (delta * (1.0 - delta) / trials as f64).sqrt();
    let report = BoundReport::new(
        "bernstein.violation_rate",
        freq,
        delta + 3.0 * se,
        Relation::Le,
        Method::MonteCarlo,
        0.0,
    )
    .with_beta(beta)
    .with_rho(rho);
    Ok(BernsteinOutcome {
        report,
        constant,
        threshold,
        expected_delta,
        median_deviation,
    })
}
