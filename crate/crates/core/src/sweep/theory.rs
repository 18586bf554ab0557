//! Sample-size expressions from the lower and upper bound theorems.
//!
//! Lower bounds carry their explicit constants. Upper bounds are shapes with
//! the unspecified absolute constant set to 1 and the failure probability
//! set to 1/2; they are for context only.

use serde::{Deserialize, Serialize};

use crate::model::InverseTemperature;
use crate::special::SQRT_2_OVER_PI;

/// Failure probability used in the upper-bound shapes.
pub const SHAPE_DELTA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Lower,
    UpperShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub name: &'static str,
    pub kind: BoundKind,
    /// `None` when `(d, beta, epsilon)` is outside the statement's range.
    pub value: Option<f64>,
    /// The value is the theorem's bound itself, with no constant or
    /// vanishing term dropped.
    pub exact: bool,
}

impl TheoryRow {
    pub fn applicable(&self) -> bool {
        self.value.is_some()
    }
}

/// `((d-1) ln 2 - ln 4) / (32 eps^2 beta min(beta, 2 sqrt(2/pi)))`, for
/// `eps in (0, 1)` and finite beta.
pub fn moderate_temperature_floor(d: usize, beta: f64, epsilon: f64) -> f64 {
    let num = (d as f64 - 1.0) * std::f64::consts::LN_2 - 4f64.ln();
    num / (32.0 * epsilon * epsilon * beta * beta.min(2.0 * SQRT_2_OVER_PI))
}

/// `(d-1) / (8 e eps)`, the noiseless floor.
pub fn noiseless_floor(d: usize, epsilon: f64) -> f64 {
    (d as f64 - 1.0) / (8.0 * std::f64::consts::E * epsilon)
}

fn in_unit(epsilon: f64) -> bool {
    epsilon > 0.0 && epsilon < 1.0
}

/// Every expression evaluated at `(d, beta, epsilon)`, in a fixed order.
pub fn theoretical_bound_table(d: usize, beta: InverseTemperature<f64>, epsilon: f64) -> Vec<TheoryRow> {
    let dd = d as f64;
    let eps_ok = in_unit(epsilon);
    let b = beta.value();
    let log_term = dd * (dd / epsilon).ln() + (1.0 / SHAPE_DELTA).ln();

    let moderate_lower = match b {
        Some(b) if eps_ok => Some(moderate_temperature_floor(d, b, epsilon)),
        _ => None,
    };
    let low_lower = if !eps_ok {
        None
    } else {
        match b {
            None => Some(noiseless_floor(d, epsilon)),
            // the (1 + o(1)) factor is taken as 1
            Some(b) if b >= 4.0 * SQRT_2_OVER_PI / epsilon => {
                let l = (2.0 * std::f64::consts::E / epsilon).ln();
                Some((dd - 1.0) / epsilon * (l.ln() - (16.0 * std::f64::consts::E).ln()) / l)
            }
            Some(_) => None,
        }
    };
    let high_upper = eps_ok.then(|| {
        let inv_b2 = b.map_or(0.0, |b| 1.0 / (b * b));
        inv_b2.max(1.0) * dd / (epsilon * epsilon)
    });
    let moderate_upper = match b {
        _ if !eps_ok => None,
        Some(b) if b <= 1.0 => None,
        _ => {
            let inv_b = b.map_or(0.0, |b| 1.0 / b);
            Some(log_term * (inv_b / (epsilon * epsilon) + 1.0 / epsilon))
        }
    };
    let low_upper = match b {
        _ if !eps_ok => None,
        Some(b) if b < 4.0 * (2.0 * std::f64::consts::PI).sqrt() / epsilon => None,
        _ => Some((dd * (1.0 / epsilon).ln() + (1.0 / SHAPE_DELTA).ln()) / epsilon),
    };
    vec![
        TheoryRow {
            name: "moderate_temperature_lower",
            kind: BoundKind::Lower,
            value: moderate_lower,
            exact: true,
        },
        TheoryRow {
            name: "low_temperature_lower",
            kind: BoundKind::Lower,
            value: low_lower,
            exact: beta.is_infinite(),
        },
        TheoryRow {
            name: "high_temperature_upper",
            kind: BoundKind::UpperShape,
            value: high_upper,
            exact: false,
        },
        TheoryRow {
            name: "moderate_temperature_upper",
            kind: BoundKind::UpperShape,
            value: moderate_upper,
            exact: false,
        },
        TheoryRow {
            name: "low_temperature_upper",
            kind: BoundKind::UpperShape,
            value: low_upper,
            exact: false,
        },
    ]
}

/// A resolved `n*` below an applicable lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorViolation {
    pub name: &'static str,
    pub n_star: usize,
    pub floor: f64,
}

/// Checks a resolved `n*` against every applicable exact lower bound.
pub fn audit_lower_bounds(d: usize, beta: InverseTemperature<f64>, epsilon: f64, n_star: usize) -> Vec<FloorViolation> {
    theoretical_bound_table(d, beta, epsilon)
        .into_iter()
        .filter(|r| r.kind == BoundKind::Lower && r.exact)
        .filter_map(|r| {
            let floor = r.value?;
            ((n_star as f64) < floor).then_some(FloorViolation {
                name: r.name,
                n_star,
                floor,
            })
        })
        .collect()
}
