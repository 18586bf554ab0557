//! Monte Carlo success probabilities and the search for `n*`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::criterion::{median, SuccessCriterion};
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorSpec};
use crate::model::{label_hash, stream_hash, InverseTemperature, ModelSampler, RngSeed, UnitVector};

/// Fewest trials accepted per probe.
pub const MIN_TRIALS: usize = 50;
/// Error recorded for a trial whose estimator rejected the data.
pub const FAILED_TRIAL_ERROR: f64 = 2.0;

// Seed tags separating first passes from bracket re-runs.
const TAG_PROBE: u64 = 0;
const TAG_BRACKET: u64 = 1;
// Upper limit on search iterations; each one probes a new n or confirms one.
const MAX_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthMode {
    /// A fresh uniform `theta*` per trial.
    Random,
    /// `theta* = e_1` in every trial.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub d: usize,
    pub beta: InverseTemperature<f64>,
    pub criterion: SuccessCriterion,
    pub estimator: EstimatorSpec,
    pub trials: usize,
    /// Trials for the re-run of the two probes bracketing `n*`.
    pub bracket_trials: usize,
    pub max_n: usize,
    /// Bisection stops once the bracket is narrower than this fraction of
    /// its upper end.
    pub resolution: f64,
    pub master_seed: u64,
    pub truth: TruthMode,
    /// First probe of the exponential search; `None` starts at `d`.
    pub n_min: Option<usize>,
    /// Record wall time. Off by default so that reports are reproducible.
    pub timing: bool,
}

impl CellSpec {
    pub fn new(d: usize, beta: InverseTemperature<f64>, criterion: SuccessCriterion, estimator: EstimatorSpec) -> Self {
        Self {
            d,
            beta,
            criterion,
            estimator,
            trials: 200,
            bracket_trials: 800,
            max_n: 1_000_000,
            resolution: 0.05,
            master_seed: 0,
            truth: TruthMode::Random,
            n_min: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::DimensionTooSmall(self.d));
        }
        if self.trials < MIN_TRIALS || self.bracket_trials < MIN_TRIALS {
            return Err(Error::InvalidConfig(format!("trials per probe must be at least {MIN_TRIALS}")));
        }
        if !(self.resolution > 0.0 && self.resolution < 1.0) {
            return Err(Error::InvalidConfig("resolution must lie in (0, 1)".into()));
        }
        let n0 = self.start();
        if n0 == 0 || n0 > self.max_n {
            return Err(Error::InvalidConfig(format!("probe range [{n0}, {}] is empty", self.max_n)));
        }
        SuccessCriterion::new(self.criterion.mode, self.criterion.epsilon)?;
        self.estimator.validate()
    }

    fn start(&self) -> usize {
        self.n_min.unwrap_or(self.d)
    }

    /// Stream id of the cell, from its coordinates. Independent of the
    /// position of the cell in a grid and of scheduling.
    pub fn stream_id(&self) -> u64 {
        let beta = match self.beta {
            InverseTemperature::Infinite => u64::MAX,
            InverseTemperature::Finite(b) => b.to_bits(),
        };
        stream_hash(&[
            label_hash(self.estimator.kind.name()),
            label_hash(self.criterion.mode.name()),
            self.d as u64,
            beta,
            self.criterion.epsilon.to_bits(),
            match self.truth {
                TruthMode::Random => 0,
                TruthMode::Fixed => 1,
            },
        ])
    }

    fn seed(&self) -> RngSeed {
        RngSeed::new(self.master_seed, self.stream_id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub n: usize,
    pub successes: usize,
    pub trials: usize,
    /// Trials where the estimator rejected the data.
    pub failed_fits: usize,
    pub mean_error: f64,
    pub median_error: f64,
    pub pass: bool,
}

impl ProbeOutcome {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of the success rate.
    pub fn std_error(&self) -> f64 {
        let p = self.success_rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Runs `trials` independent fits at sample size `n`. Trial `k` draws
/// everything from `seed.derive([n, tag, k])`, so the outcome does not
/// depend on thread scheduling.
pub fn success_probability(cell: &CellSpec, n: usize, trials: usize, tag: u64) -> Result<ProbeOutcome> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidConfig(format!("trials per probe must be at least {MIN_TRIALS}")));
    }
    if n == 0 {
        return Err(Error::ZeroSamples);
    }
    let base = cell.seed();
    let errors: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|k| trial_error(cell, n, base.derive(&[n as u64, tag, k as u64])))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let eps = cell.criterion.epsilon;
    Ok(ProbeOutcome {
        n,
        successes: values.iter().filter(|&&e| e <= eps).count(),
        trials,
        failed_fits: errors.iter().filter(|e| e.1).count(),
        mean_error: values.iter().sum::<f64>() / trials as f64,
        median_error: median(&values),
        pass: cell.criterion.is_met(&values),
    })
}

fn trial_error(cell: &CellSpec, n: usize, seed: RngSeed) -> Result<(f64, bool)> {
    let mut rng = seed.rng();
    let truth = match cell.truth {
        TruthMode::Random => UnitVector::uniform(cell.d, &mut rng)?,
        TruthMode::Fixed => UnitVector::basis(cell.d, 0)?,
    };
    let ds = ModelSampler::new(truth.clone(), cell.beta).dataset(n, &mut rng)?;
    let spec = EstimatorSpec {
        seed: seed.stream_id,
        ..cell.estimator.clone()
    };
    match estimate(&ds, &spec) {
        Ok(r) => Ok((r.estimate.distance(&truth), false)),
        Err(Error::Degenerate(_)) => Ok((FAILED_TRIAL_ERROR, true)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Resolved,
    Unresolved,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Resolved => "resolved",
            Self::Unresolved => "unresolved",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub spec: CellSpec,
    pub n_star: Option<usize>,
    pub status: CellStatus,
    /// Every probe in the order run, re-runs included.
    pub probes: Vec<ProbeOutcome>,
    pub wall_ms: u64,
}

impl SweepCell {
    pub fn is_resolved(&self) -> bool {
        self.status == CellStatus::Resolved
    }

    /// `n:successes/trials` per probe, `;`-separated.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.probes.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            let _ = write!(out, "{}:{}/{}", p.n, p.successes, p.trials);
        }
        out
    }
}

/// Smallest probed `n` meeting the criterion.
///
/// Doubles from the first probe until a pass, then bisects between the
/// largest failure below the smallest pass and that pass until the gap is
/// within `resolution`. Both bracketing probes are then re-run at
/// `bracket_trials` with fresh streams; a re-run result replaces the first
/// one and the search resumes if the bracket moved. Reaching `max_n`
/// without a pass leaves the cell unresolved.
pub fn find_n_star(cell: &CellSpec) -> Result<SweepCell> {
    cell.validate()?;
    let started = Instant::now();
    // n -> (pass, confirmed by a bracket re-run)
    let mut status: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
    let mut probes = Vec::new();
    let mut run = |n: usize, bracket: bool, status: &mut BTreeMap<usize, (bool, bool)>| -> Result<()> {
        let (trials, tag) = if bracket {
            (cell.bracket_trials, TAG_BRACKET)
        } else {
            (cell.trials, TAG_PROBE)
        };
        let p = success_probability(cell, n, trials, tag)?;
        status.insert(n, (p.pass, bracket));
        probes.push(p);
        Ok(())
    };
    let mut n_star = None;
    for _ in 0..MAX_STEPS {
        let hi = status.iter().find(|(_, s)| s.0).map(|(&n, &s)| (n, s.1));
        let Some((hi, hi_confirmed)) = hi else {
            let next = match status.keys().next_back() {
                None => cell.start(),
                Some(&top) if top >= cell.max_n => break,
                Some(&top) => (2 * top).min(cell.max_n),
            };
            run(next, false, &mut status)?;
            continue;
        };
        let lo = status.range(..hi).rev().find(|(_, s)| !s.0).map(|(&n, &s)| (n, s.1));
        if let Some((lo, _)) = lo {
            let gap = hi - lo;
            if gap > 1 && gap as f64 > cell.resolution * hi as f64 {
                run(lo + gap / 2, false, &mut status)?;
                continue;
            }
        }
        if !hi_confirmed {
            run(hi, true, &mut status)?;
            continue;
        }
        if let Some((lo, false)) = lo {
            run(lo, true, &mut status)?;
            continue;
        }
        n_star = Some(hi);
        break;
    }
    let wall_ms = if cell.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(SweepCell {
        spec: cell.clone(),
        n_star,
        status: if n_star.is_some() {
            CellStatus::Resolved
        } else {
            CellStatus::Unresolved
        },
        probes,
        wall_ms,
    })
}
