use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionMode {
    /// Median of `|theta_hat - theta*|` over trials is at most epsilon.
    MedianError,
    /// At least half of the trials reach error at most epsilon.
    ProbabilityHalf,
    /// Mean error over trials is at most epsilon.
    ExpectedError,
}

impl CriterionMode {
    pub const ALL: [Self; 3] = [Self::MedianError, Self::ProbabilityHalf, Self::ExpectedError];

    pub fn name(self) -> &'static str {
        match self {
            Self::MedianError => "median_error",
            Self::ProbabilityHalf => "probability_half",
            Self::ExpectedError => "expected_error",
        }
    }
}

impl fmt::Display for CriterionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown criterion '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessCriterion {
    pub mode: CriterionMode,
    pub epsilon: f64,
}

impl SuccessCriterion {
    pub fn new(mode: CriterionMode, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { mode, epsilon })
    }

    /// Whether a probe with these per-trial errors meets the criterion.
    pub fn is_met(&self, errors: &[f64]) -> bool {
        if errors.is_empty() {
            return false;
        }
        match self.mode {
            CriterionMode::ProbabilityHalf => {
                let hits = errors.iter().filter(|&&e| e <= self.epsilon).count();
                2 * hits >= errors.len()
            }
            CriterionMode::MedianError => median(errors) <= self.epsilon,
            CriterionMode::ExpectedError => errors.iter().sum::<f64>() / errors.len() as f64 <= self.epsilon,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
