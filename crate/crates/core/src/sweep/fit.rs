use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::search::SweepCell;
use crate::error::{Error, Result};
use crate::model::InverseTemperature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeAxis {
    Beta,
    InvEpsilon,
    Dimension,
}

impl SlopeAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::InvEpsilon => "inv_epsilon",
            Self::Dimension => "dimension",
        }
    }

    pub fn value(self, cell: &SweepCell) -> Result<f64> {
        match self {
            Self::Beta => match cell.spec.beta {
                InverseTemperature::Finite(b) => Ok(b),
                InverseTemperature::Infinite => Err(Error::Degenerate("infinite beta on the beta axis".into())),
            },
            Self::InvEpsilon => Ok(1.0 / cell.spec.criterion.epsilon),
            Self::Dimension => Ok(cell.spec.d as f64),
        }
    }
}

impl fmt::Display for SlopeAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SlopeAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Self::Beta),
            "inv_epsilon" | "epsilon" => Ok(Self::InvEpsilon),
            "dimension" | "d" => Ok(Self::Dimension),
            other => Err(Error::InvalidConfig(format!("unknown slope axis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub axis: SlopeAxis,
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    /// `(ln axis value, ln n*)` per cell.
    pub points: Vec<(f64, f64)>,
}

/// Least squares fit of `ln n*` on `ln axis`, with the usual standard error
/// of the slope.
///
/// Requires at least four resolved cells that agree on everything except
/// the chosen axis, at distinct axis values.
pub fn fit_regime_slope(cells: &[SweepCell], axis: SlopeAxis) -> Result<SlopeFit> {
    if cells.len() < 4 {
        return Err(Error::Degenerate(format!("slope fit needs at least 4 cells, got {}", cells.len())));
    }
    let first = &cells[0].spec;
    let mut points = Vec::with_capacity(cells.len());
    for c in cells {
        let s = &c.spec;
        let n_star = c
            .n_star
            .filter(|_| c.is_resolved())
            .ok_or_else(|| Error::Unresolved(format!("d={} beta={} epsilon={}", s.d, s.beta, s.criterion.epsilon)))?;
        let same = s.estimator.kind == first.estimator.kind
            && s.criterion.mode == first.criterion.mode
            && (axis == SlopeAxis::Beta || s.beta == first.beta)
            && (axis == SlopeAxis::InvEpsilon || s.criterion.epsilon == first.criterion.epsilon)
            && (axis == SlopeAxis::Dimension || s.d == first.d);
        if !same {
            return Err(Error::Degenerate(format!("cells vary along more than the {axis} axis")));
        }
        points.push((axis.value(c)?.ln(), (n_star as f64).ln()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Degenerate(format!("repeated {axis} values")));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (rss / (k - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        axis,
        slope,
        std_error,
        intercept,
        points,
    })
}
