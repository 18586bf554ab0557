//! Estimators mapping a dataset to a point on the sphere.
//!
//! All objectives depend on the data only through `s_i = y_i x_i`, except
//! the zero-one count, which also needs the label to resolve points on the
//! decision boundary (`h(x) = -1` there).

mod linear;
mod oracle;
mod relu;
mod zero_one;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, Dataset, Label, UnitVector};
use crate::scalar::Real;

pub use linear::linear_estimate;
pub use oracle::{net_oracle_estimate, NetLoss};
pub use relu::{relu_erm_estimate, relu_erm_from};
pub use zero_one::{enumerate_arc_midpoints, zero_one_erm_estimate, zero_one_sweep_2d};

/// Training error rate above which the adaptive estimator takes the linear
/// branch: `sqrt(2/pi) / 2`.
pub const ADAPTIVE_THRESHOLD: f64 = 0.398_942_280_401_432_7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Linear,
    ReluErm,
    ZeroOneErm,
    Adaptive,
}

impl EstimatorKind {
    pub const ALL: [Self; 4] = [Self::Linear, Self::ReluErm, Self::ZeroOneErm, Self::Adaptive];

    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::ReluErm => "relu_erm",
            Self::ZeroOneErm => "zero_one_erm",
            Self::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "relu_erm" | "relu" => Ok(Self::ReluErm),
            "zero_one_erm" | "zero_one" => Ok(Self::ZeroOneErm),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::InvalidConfig(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Estimator choice and optimizer controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    /// Starting points for the ReLU descent: the linear estimate, then
    /// uniform random points.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Step size is `step_scale / sqrt(t)`; `None` uses `1 / mean |x_i|`.
    pub step_scale: Option<f64>,
    /// Rounds of exact great-circle line search after the descent.
    pub polish_rounds: usize,
    /// Proposals allowed in the zero-one local search (`d >= 4`).
    pub local_search_budget: usize,
    /// When set, the ReLU and zero-one estimators are replaced by the
    /// brute-force net oracle at this resolution.
    pub net_resolution: Option<f64>,
    pub seed: u64,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        Self {
            kind: EstimatorKind::Linear,
            restarts: 3,
            max_iterations: 500,
            step_scale: None,
            polish_rounds: 50,
            local_search_budget: 5000,
            net_resolution: None,
            seed: 0,
        }
    }
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if let Some(c) = self.step_scale {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!("step_scale must be positive, got {c}")));
            }
        }
        if let Some(r) = self.net_resolution {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!("net_resolution must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// The empirical objective an estimate was selected by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `(1/n) sum y_i x_i^T theta`, maximized.
    Correlation,
    /// `(1/n) sum [-y_i x_i^T theta]_+`, minimized.
    Relu,
    /// Training error rate, minimized.
    ZeroOne,
}

/// Branch taken by the adaptive estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    HighTemperature,
    ModerateLow,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HighTemperature => "high_temperature",
            Self::ModerateLow => "moderate_low",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult<T: Real = f64> {
    pub estimate: UnitVector<T>,
    /// The objective re-evaluated at `estimate`.
    pub objective_value: f64,
    pub objective: Objective,
    pub restarts_used: usize,
    pub converged: bool,
    /// Set when the minimizer is heuristic (zero-one local search).
    pub approximate: bool,
    pub branch: Option<Branch>,
    pub training_error: Option<f64>,
    pub threshold: Option<f64>,
}

impl<T: Real> EstimateResult<T> {
    pub(crate) fn new(ds: &Dataset<T>, estimate: UnitVector<T>, objective: Objective) -> Self {
        let objective_value = evaluate(ds, &estimate, objective).as_f64();
        Self {
            estimate,
            objective_value,
            objective,
            restarts_used: 1,
            converged: true,
            approximate: false,
            branch: None,
            training_error: None,
            threshold: None,
        }
    }
}

pub fn evaluate<T: Real>(ds: &Dataset<T>, theta: &UnitVector<T>, objective: Objective) -> T {
    match objective {
        Objective::Correlation => correlation_objective(ds, theta),
        Objective::Relu => relu_risk(ds, theta),
        Objective::ZeroOne => zero_one_risk(ds, theta),
    }
}

pub(crate) fn check_nonempty<T: Real>(ds: &Dataset<T>) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

pub fn correlation_objective<T: Real>(ds: &Dataset<T>, theta: &UnitVector<T>) -> T {
    let total = ds
        .iter()
        .fold(T::zero(), |acc, (x, y)| acc + y.sign::<T>() * theta.dot_slice(x));
    total / T::lit(ds.len() as f64)
}

/// Empirical ReLU risk `(1/n) sum [-y_i x_i^T theta]_+`.
pub fn relu_risk<T: Real>(ds: &Dataset<T>, theta: &UnitVector<T>) -> T {
    let total = ds.iter().fold(T::zero(), |acc, (x, y)| {
        let m = y.sign::<T>() * theta.dot_slice(x);
        if m < T::zero() {
            acc - m
        } else {
            acc
        }
    });
    total / T::lit(ds.len() as f64)
}

#[inline]
pub(crate) fn is_error<T: Real>(score: T, y: Label) -> bool {
    Label::from_score(score) != y
}

pub fn zero_one_errors<T: Real>(ds: &Dataset<T>, theta: &UnitVector<T>) -> usize {
    ds.iter().filter(|(x, y)| is_error(theta.dot_slice(x), *y)).count()
}

pub fn zero_one_risk<T: Real>(ds: &Dataset<T>, theta: &UnitVector<T>) -> T {
    T::lit(zero_one_errors(ds, theta) as f64 / ds.len() as f64)
}

/// Dispatches on `spec.kind`.
pub fn estimate<T: Real>(ds: &Dataset<T>, spec: &EstimatorSpec) -> Result<EstimateResult<T>> {
    spec.validate()?;
    match spec.kind {
        EstimatorKind::Linear => linear_estimate(ds),
        EstimatorKind::ReluErm => match spec.net_resolution {
            Some(r) => net_oracle_estimate(ds, NetLoss::Relu, r),
            None => relu_erm_estimate(ds, spec),
        },
        EstimatorKind::ZeroOneErm => match spec.net_resolution {
            Some(r) => net_oracle_estimate(ds, NetLoss::ZeroOne, r),
            None => zero_one_erm_estimate(ds, spec),
        },
        EstimatorKind::Adaptive => adaptive_estimate(ds, spec),
    }
}

/// Chooses between the linear and ReLU estimators from the zero-one
/// training error: above [`ADAPTIVE_THRESHOLD`] the data look high
/// temperature and the linear estimate is returned.
pub fn adaptive_estimate<T: Real>(ds: &Dataset<T>, spec: &EstimatorSpec) -> Result<EstimateResult<T>> {
    check_nonempty(ds)?;
    let erm = zero_one_erm_estimate(ds, spec)?;
    let rate = erm.objective_value;
    let (mut out, branch) = if rate > ADAPTIVE_THRESHOLD {
        (linear_estimate(ds)?, Branch::HighTemperature)
    } else {
        (relu_erm_estimate(ds, spec)?, Branch::ModerateLow)
    };
    out.branch = Some(branch);
    out.training_error = Some(rate);
    out.threshold = Some(ADAPTIVE_THRESHOLD);
    Ok(out)
}

/// `(1/n) sum s_i` over rows of a row-major matrix.
pub(crate) fn row_mean<T: Real>(rows: &[T], dim: usize) -> Vec<T> {
    let n = rows.len() / dim;
    let mut m = vec![T::zero(); dim];
    for r in rows.chunks_exact(dim) {
        for (a, &b) in m.iter_mut().zip(r) {
            *a = *a + b;
        }
    }
    let nf = T::lit(n as f64);
    m.iter_mut().for_each(|a| *a = *a / nf);
    m
}

#[inline]
pub(crate) fn row_dot<T: Real>(row: &[T], v: &[T]) -> T {
    dot(row, v)
}
