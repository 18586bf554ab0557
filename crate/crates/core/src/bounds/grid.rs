use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::verifiers::Verifier;
use super::{sort_reports, BoundReport};
use crate::error::{Error, Result};

/// Parameter grid for the inequality suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundGrid {
    pub betas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub qs: Vec<u32>,
}

impl Default for BoundGrid {
    fn default() -> Self {
        default_grid()
    }
}

pub fn default_grid() -> BoundGrid {
    BoundGrid {
        betas: vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
        rhos: vec![-0.5, 0.0, 0.5, 0.9, 0.99, 1.0],
        qs: (0..=8).collect(),
    }
}

impl BoundGrid {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.rhos.is_empty() || self.qs.is_empty() {
            return Err(Error::InvalidConfig("bound grid axes must be nonempty".into()));
        }
        Ok(())
    }

    /// Rows per beta: two tail rows, five for `g''` and `exp(-beta|z|)`, one
    /// for `g'`, one per `q`; plus three KL rows per `(beta, rho)`.
    pub fn row_count(&self) -> usize {
        self.betas.len() * (8 + self.qs.len()) + 3 * self.betas.len() * self.rhos.len()
    }
}

enum Cell {
    Beta(f64),
    Moment(f64, u32),
    Kl(f64, f64),
}

/// Runs every verifier on the grid; rows come back sorted.
pub fn run_grid(verifier: &Verifier<'_>, grid: &BoundGrid) -> Result<Vec<BoundReport>> {
    grid.validate()?;
    let mut cells = Vec::new();
    for &b in &grid.betas {
        cells.push(Cell::Beta(b));
        for &q in &grid.qs {
            cells.push(Cell::Moment(b, q));
        }
        for &r in &grid.rhos {
            cells.push(Cell::Kl(b, r));
        }
    }
    let rows: Vec<Vec<BoundReport>> = cells
        .par_iter()
        .map(|cell| match *cell {
            Cell::Beta(b) => {
                let mut out = verifier.normal_tail(b)?;
                out.extend(verifier.g_second_moment(b)?);
                out.push(verifier.g_prime_abs(b)?);
                Ok(out)
            }
            Cell::Moment(b, q) => Ok(vec![verifier.exp_q_moment(b, q)?.report]),
            Cell::Kl(b, r) => verifier.kl_sandwich(b, r),
        })
        .collect::<Result<_>>()?;
    let mut flat: Vec<BoundReport> = rows.into_iter().flatten().collect();
    sort_reports(&mut flat);
    Ok(flat)
}
