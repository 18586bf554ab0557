//! Numerical verification of the Gaussian integral inequalities.
//!
//! Each verifier evaluates the left-hand quantity independently of the bound
//! (quadrature, a closed form, or Monte Carlo) and emits one
//! [`BoundReport`] per one-sided inequality. Two-sided statements are split
//! into a `.lower` and an `.upper` row so that every row carries a single
//! relation.

mod grid;
mod verifiers;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use grid::{default_grid, run_grid, BoundGrid};
pub use verifiers::{
    check_beta, expectation_exp_abs, expected_kl, ln_expectation_exp_abs, verify_exp_q_moment,
    verify_g_prime_abs, verify_g_second_moment, verify_kl_sandwich, verify_normal_tail,
    verify_param_diff_identity, ExpQReport, KlEvaluation, Verifier, DEFAULT_TOLERANCE, KL_AGREEMENT,
    MAX_BETA,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    /// `lhs <= rhs`
    #[serde(rename = "<=")]
    Le,
    /// `lhs >= rhs`
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Le => "<=",
            Self::Ge => ">=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quadrature => "quadrature",
            Self::ClosedForm => "closed_form",
            Self::MonteCarlo => "monte_carlo",
        })
    }
}

/// Verdict for one inequality. `lhs` is the computed quantity and `rhs` the
/// bound; `margin` is the slack in the direction of `relation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub q: Option<u32>,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub method: Method,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, relation: Relation, method: Method, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
        };
        Self {
            name: name.into(),
            beta: None,
            rho: None,
            q: None,
            lhs,
            rhs,
            relation,
            margin,
            method,
            tolerance,
            pass: margin >= -tolerance,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_q(mut self, q: u32) -> Self {
        self.q = Some(q);
        self
    }

    fn sort_key(&self) -> (&str, f64, f64, u32) {
        (
            &self.name,
            self.beta.unwrap_or(f64::NEG_INFINITY),
            self.rho.unwrap_or(f64::NEG_INFINITY),
            self.q.unwrap_or(0),
        )
    }
}

/// Sorts by `(name, beta, rho, q)`; missing coordinates sort first.
pub fn sort_reports(reports: &mut [BoundReport]) {
    reports.sort_by(|a, b| {
        let (an, ab, ar, aq) = a.sort_key();
        let (bn, bb, br, bq) = b.sort_key();
        an.cmp(bn)
            .then(ab.total_cmp(&bb))
            .then(ar.total_cmp(&br))
            .then(aq.cmp(&bq))
    });
}
