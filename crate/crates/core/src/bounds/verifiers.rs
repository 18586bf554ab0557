use super::{BoundReport, Method, Relation};
use crate::error::{Error, Result};
use crate::mc;
use crate::model::{
    bernoulli_kl_bregman, correlation, logistic_curvature, logistic_link, InverseTemperature,
    ModelSampler, RngSeed, UnitVector,
};
use crate::moments::delta_theta;
use crate::quadrature::{Feature, Integrator};
use crate::special::{mills_ratio, SQRT_2_OVER_PI};

/// Slack allowed on every inequality by default.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Required agreement between the two routes to the expected KL divergence.
pub const KL_AGREEMENT: f64 = 1e-8;

/// Largest inverse temperature the verifiers accept. Beyond it the kink
/// widths fall below what the panel refinement resolves in double precision.
pub const MAX_BETA: f64 = 1e6;

/// Required agreement between the closed form for `E[exp(-beta |z|)]` and its
/// quadrature.
const EXP_ABS_AGREEMENT: f64 = 1e-10;

pub fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta(beta));
    }
    if beta > MAX_BETA {
        return Err(Error::NumericalRange(format!(
            "inverse temperature {beta:e} exceeds the verifiable range (<= {MAX_BETA:e})"
        )));
    }
    Ok(())
}

/// `E[exp(-beta |z|)] = 2 exp(beta^2/2) Pr(z >= beta) = sqrt(2/pi) R(beta)`
/// with `R` the Mills ratio, so nothing overflows for large `beta`.
pub fn expectation_exp_abs(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(SQRT_2_OVER_PI * mills_ratio(beta))
}

pub fn ln_expectation_exp_abs(beta: f64) -> Result<f64> {
    Ok(expectation_exp_abs(beta)?.ln())
}

/// Both evaluations of the expected KL divergence between the Bernoulli
/// laws at `beta z` and `beta z'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlEvaluation {
    /// Two-dimensional quadrature of the Bregman form.
    pub bregman: f64,
    /// `beta^2 (1 - rho) E[g''(beta z)]`.
    pub stein: f64,
}

impl KlEvaluation {
    pub fn disagreement(&self) -> f64 {
        (self.bregman - self.stein).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpQReport {
    pub report: BoundReport,
    /// `value * beta^(q+1) / q!`, the constant in the sharper rate.
    pub sharper_constant: f64,
    /// Informational: whether the sharper rate holds with constant 10.
    pub sharper_holds: bool,
}

fn factorial(q: u32) -> f64 {
    (1..=q).map(f64::from).product()
}

/// Verifier settings shared across a batch.
#[derive(Clone, Debug)]
pub struct Verifier<'a> {
    pub integrator: &'a Integrator,
    pub tolerance: f64,
}

impl Default for Verifier<'static> {
    fn default() -> Self {
        Self {
            integrator: Integrator::shared(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl<'a> Verifier<'a> {
    pub fn new(integrator: &'a Integrator, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid tolerance {tolerance}")));
        }
        Ok(Self { integrator, tolerance })
    }

    fn kink(beta: f64) -> [Feature; 1] {
        [Feature::new(0.0, (1.0 / beta).min(1.0))]
    }

    fn report(&self, name: &str, lhs: f64, rhs: f64, rel: Relation, method: Method) -> BoundReport {
        BoundReport::new(name, lhs, rhs, rel, method, self.tolerance)
    }

    /// Tail sandwich at `t`. Both sides are divided by `phi(t)` so that the
    /// comparison stays meaningful where the tail underflows.
    pub fn normal_tail(&self, t: f64) -> Result<Vec<BoundReport>> {
        check_beta(t).map_err(|e| match e {
            Error::InvalidBeta(v) => Error::OutOfRange {
                value: v,
                range: "(0, inf)",
            },
            other => other,
        })?;
        let scaled_tail = mills_ratio(t);
        let lower = (1.0 - 1.0 / (t * t)) / t;
        let upper = 1.0 / t;
        Ok(vec![
            self.report("normal_tail.lower", scaled_tail, lower, Relation::Ge, Method::ClosedForm)
                .with_beta(t),
            self.report("normal_tail.upper", scaled_tail, upper, Relation::Le, Method::ClosedForm)
                .with_beta(t),
        ])
    }

    pub fn exp_abs_quadrature(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        self.integrator
            .expect(|z| (-beta * z.abs()).exp(), &Self::kink(beta))
    }

    pub fn curvature_expectation(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        self.integrator
            .expect(|z| logistic_curvature(beta * z), &Self::kink(beta))
    }

    /// Bounds on `E[g''(beta z)]` in terms of `E[exp(-beta |z|)]`, and the
    /// two-sided bound on the latter.
    pub fn g_second_moment(&self, beta: f64) -> Result<Vec<BoundReport>> {
        check_beta(beta)?;
        let curv = self.curvature_expectation(beta)?;
        let exp_quad = self.exp_abs_quadrature(beta)?;
        let exp_closed = expectation_exp_abs(beta)?;
        if (exp_quad - exp_closed).abs() > EXP_ABS_AGREEMENT {
            return Err(Error::IdentityMismatch {
                name: "exp_abs.closed_form",
                left: exp_closed,
                right: exp_quad,
            });
        }
        let r = SQRT_2_OVER_PI / beta;
        Ok(vec![
            self.report("g2.lower", curv, 0.25 * exp_quad, Relation::Ge, Method::Quadrature),
            self.report("g2.upper", curv, exp_quad.min(0.5), Relation::Le, Method::Quadrature),
            self.report("exp_abs.lower", exp_closed, r * (1.0 - 1.0 / (beta * beta)), Relation::Ge, Method::ClosedForm),
            self.report("exp_abs.upper", exp_closed, r, Relation::Le, Method::ClosedForm),
            self.report(
                "exp_abs.closed_form",
                (exp_quad - exp_closed).abs(),
                EXP_ABS_AGREEMENT,
                Relation::Le,
                Method::Quadrature,
            ),
        ]
        .into_iter()
        .map(|r| r.with_beta(beta))
        .collect())
    }

    pub fn g_prime_abs(&self, beta: f64) -> Result<BoundReport> {
        check_beta(beta)?;
        let value = self
            .integrator
            .expect(|z| logistic_link(-beta * z.abs()), &Self::kink(beta))?;
        let taylor = 0.5 - 0.25 * beta * SQRT_2_OVER_PI * (1.0 - beta * beta / 6.0);
        let bound = 0.5f64.min(taylor).min(SQRT_2_OVER_PI / beta);
        Ok(self
            .report("g_prime_abs.upper", value, bound, Relation::Le, Method::Quadrature)
            .with_beta(beta))
    }

    pub fn exp_q_moment(&self, beta: f64, q: u32) -> Result<ExpQReport> {
        check_beta(beta)?;
        if q > 12 {
            return Err(Error::OutOfRange {
                value: f64::from(q),
                range: "q <= 12",
            });
        }
        let qi = q as i32;
        let features = [
            Self::kink(beta)[0],
            Feature::new(f64::from(q) / beta, (1.0 / beta).min(1.0)),
            Feature::new(-f64::from(q) / beta, (1.0 / beta).min(1.0)),
        ];
        let value = self
            .integrator
            .expect(|z| (-beta * z.abs()).exp() * z.abs().powi(qi), &features)?;
        let qf = factorial(q);
        let bound = qf / beta.powi(qi);
        let sharper_constant = value * beta.powi(qi + 1) / qf;
        Ok(ExpQReport {
            report: self
                .report("exp_q_moment.upper", value, bound, Relation::Le, Method::Quadrature)
                .with_beta(beta)
                .with_q(q),
            sharper_constant,
            sharper_holds: sharper_constant <= 10.0,
        })
    }

    /// Expected KL divergence for correlated standard normals, both ways.
    pub fn expected_kl(&self, beta: f64, rho: f64) -> Result<KlEvaluation> {
        check_beta(beta)?;
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::OutOfRange {
                value: rho,
                range: "[-1, 1]",
            });
        }
        let width = 1.0 / beta;
        let bregman = if rho == 1.0 {
            0.0
        } else {
            self.integrator.expect_pair(
                |z, zp| bernoulli_kl_bregman(beta * z, beta * zp),
                rho,
                &[Feature::new(0.0, width.min(1.0))],
                &[Feature::new(0.0, width)],
            )?
        };
        let stein = beta * beta * (1.0 - rho) * self.curvature_expectation(beta)?;
        Ok(KlEvaluation { bregman, stein })
    }

    pub fn kl_sandwich(&self, beta: f64, rho: f64) -> Result<Vec<BoundReport>> {
        let kl = self.expected_kl(beta, rho)?;
        if kl.disagreement() > KL_AGREEMENT {
            return Err(Error::IdentityMismatch {
                name: "kl.identity",
                left: kl.bregman,
                right: kl.stein,
            });
        }
        let lower = 0.25 * beta * (1.0 - rho) * (1.0 - 1.0 / (beta * beta)) * SQRT_2_OVER_PI;
        let upper = 0.5 * beta * (1.0 - rho) * beta.min(2.0 * SQRT_2_OVER_PI);
        Ok(vec![
            self.report("kl.identity", kl.disagreement(), KL_AGREEMENT, Relation::Le, Method::Quadrature),
            self.report("kl.lower", kl.bregman, lower, Relation::Ge, Method::Quadrature),
            self.report("kl.upper", kl.bregman, upper, Relation::Le, Method::Quadrature),
        ]
        .into_iter()
        .map(|r| r.with_beta(beta).with_rho(rho))
        .collect())
    }

    /// Monte Carlo mean of `delta_theta` against `E[KL] / beta`, and the
    /// quadratic lower bound on the mean when `beta > 1`.
    pub fn param_diff_identity(
        &self,
        beta: f64,
        theta: &UnitVector,
        truth: &UnitVector,
        n_mc: usize,
        seed: RngSeed,
    ) -> Result<Vec<BoundReport>> {
        check_beta(beta)?;
        if n_mc < 2 {
            return Err(Error::ZeroSamples);
        }
        let rho = correlation(theta, truth)?;
        let dist = theta.distance(truth);
        let kl = self.expected_kl(beta, rho)?;
        let expected = kl.bregman / beta;
        let sampler = ModelSampler::new(truth.clone(), InverseTemperature::finite(beta)?);
        let (sum, sum_sq) = mc::moments(n_mc, seed, truth.dim(), |rng, x| {
            let y = sampler.draw_into(x, rng);
            delta_theta(x, y, theta, truth)
        });
        let (mean, se) = mc::mean_and_se(n_mc, sum, sum_sq);
        let mut out = vec![BoundReport::new(
            "paramdiff.identity",
            (mean - expected).abs(),
            4.0 * se,
            Relation::Le,
            Method::MonteCarlo,
            self.tolerance,
        )];
        if beta > 1.0 {
            let lower = 0.125 * SQRT_2_OVER_PI * (1.0 - 1.0 / (beta * beta)) * dist * dist;
            out.push(BoundReport::new(
                "paramdiff.lower",
                mean,
                lower,
                Relation::Ge,
                Method::MonteCarlo,
                4.0 * se + self.tolerance,
            ));
        }
        Ok(out.into_iter().map(|r| r.with_beta(beta).with_rho(rho)).collect())
    }
}

pub fn verify_normal_tail(t: f64) -> Result<Vec<BoundReport>> {
    Verifier::default().normal_tail(t)
}

pub fn verify_g_second_moment(beta: f64) -> Result<Vec<BoundReport>> {
    Verifier::default().g_second_moment(beta)
}

pub fn verify_g_prime_abs(beta: f64) -> Result<BoundReport> {
    Verifier::default().g_prime_abs(beta)
}

pub fn verify_exp_q_moment(beta: f64, q: u32) -> Result<ExpQReport> {
    Verifier::default().exp_q_moment(beta, q)
}

pub fn verify_kl_sandwich(beta: f64, rho: f64) -> Result<Vec<BoundReport>> {
    Verifier::default().kl_sandwich(beta, rho)
}

pub fn expected_kl(beta: f64, rho: f64) -> Result<KlEvaluation> {
    Verifier::default().expected_kl(beta, rho)
}

pub fn verify_param_diff_identity(
    beta: f64,
    theta: &UnitVector,
    truth: &UnitVector,
    n_mc: usize,
    seed: RngSeed,
) -> Result<Vec<BoundReport>> {
    Verifier::default().param_diff_identity(beta, theta, truth, n_mc, seed)
}
