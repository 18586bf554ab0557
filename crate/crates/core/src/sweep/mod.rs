//! Empirical sample complexity: success probabilities, the search for `n*`,
//! slope fits and the theoretical expressions they are compared with.

mod criterion;
mod fit;
mod search;
mod theory;

use rayon::prelude::*;

pub use criterion::{median, CriterionMode, SuccessCriterion};
pub use fit::{fit_regime_slope, SlopeAxis, SlopeFit};
pub use search::{
    find_n_star, success_probability, CellSpec, CellStatus, ProbeOutcome, SweepCell, TruthMode, FAILED_TRIAL_ERROR,
    MIN_TRIALS,
};
pub use theory::{
    audit_lower_bounds, moderate_temperature_floor, noiseless_floor, theoretical_bound_table, BoundKind,
    FloorViolation, TheoryRow, SHAPE_DELTA,
};

use crate::error::Result;

/// Runs every cell; results come back in input order.
pub fn run_cells(cells: &[CellSpec]) -> Result<Vec<SweepCell>> {
    cells.par_iter().map(find_n_star).collect()
}

#[cfg(test)]
mod tests;
