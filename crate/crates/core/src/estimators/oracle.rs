use serde::{Deserialize, Serialize};

use super::{check_nonempty, relu_risk, zero_one_errors, EstimateResult, Objective};
use crate::error::{Error, Result};
use crate::model::{Dataset, UnitVector};
use crate::scalar::Real;
use crate::sphere::grid_cover;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetLoss {
    Relu,
    ZeroOne,
}

/// Brute-force minimizer over a cover of the sphere at `resolution`. Only
/// for validation: the net grows like `resolution^(1-d)`.
pub fn net_oracle_estimate<T: Real>(ds: &Dataset<T>, loss: NetLoss, resolution: f64) -> Result<EstimateResult<T>> {
    check_nonempty(ds)?;
    if ds.dim() > 3 {
        return Err(Error::OutOfRange {
            value: ds.dim() as f64,
            range: "d <= 3",
        });
    }
    let net = grid_cover(ds.dim(), resolution)?;
    let mut best: Option<(UnitVector<T>, f64)> = None;
    for p in net {
        let theta: UnitVector<T> = p.cast();
        let value = match loss {
            NetLoss::Relu => relu_risk(ds, &theta).as_f64(),
            NetLoss::ZeroOne => zero_one_errors(ds, &theta) as f64,
        };
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((theta, value));
        }
    }
    let (theta, _) = best.expect("net is nonempty");
    let objective = match loss {
        NetLoss::Relu => Objective::Relu,
        NetLoss::ZeroOne => Objective::ZeroOne,
    };
    Ok(EstimateResult::new(ds, theta, objective))
}
