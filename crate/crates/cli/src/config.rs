//! Run configuration, read from a TOML file and overridden by global flags.

use std::fs;
use std::path::{Path, PathBuf};

use logit_complexity::bounds::{default_grid, BoundGrid, DEFAULT_TOLERANCE};
use logit_complexity::estimators::{EstimatorKind, EstimatorSpec};
use logit_complexity::model::InverseTemperature;
use logit_complexity::sphere::NetKind;
use logit_complexity::sweep::{CellSpec, CriterionMode, SuccessCriterion, TruthMode};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub strict: bool,
    pub verify_bounds: VerifyBoundsConfig,
    pub sweep: SweepConfig,
    pub estimate: EstimateConfig,
    pub sample: SampleConfig,
    pub net: NetConfig,
}

/// Global flags; each one present replaces the file value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Reads the file named by `--config`, if any, then applies the flags.
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if flags.seed.is_some() {
            cfg.seed = flags.seed;
        }
        if flags.out.is_some() {
            cfg.out.clone_from(&flags.out);
        }
        if flags.jobs.is_some() {
            cfg.jobs = flags.jobs;
        }
        cfg.strict |= flags.strict;
        if cfg.jobs == Some(0) {
            return Err(CliError::Usage("jobs must be at least 1".into()));
        }
        Ok(cfg)
    }

    /// There is no wall-clock fallback: every random stream needs this.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage("a seed is required (--seed or `seed` in the config file)".into()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Creates the output directory and checks that it accepts files.
    pub fn prepare_out_dir(&self) -> Result<PathBuf, CliError> {
        let dir = self.out_dir();
        let unwritable = |e: std::io::Error| CliError::Usage(format!("output directory {}: {e}", dir.display()));
        fs::create_dir_all(&dir).map_err(unwritable)?;
        let probe = dir.join(".logit-sc-write-check");
        fs::write(&probe, b"").map_err(unwritable)?;
        fs::remove_file(&probe).map_err(unwritable)?;
        Ok(dir)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyBoundsConfig {
    pub betas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub qs: Vec<u32>,
    pub tolerance: f64,
    /// Optional Monte Carlo rows appended after the grid.
    pub moments: Option<MomentRows>,
    pub param_diff: Option<ParamDiffRows>,
}

impl Default for VerifyBoundsConfig {
    fn default() -> Self {
        let g = default_grid();
        Self {
            betas: g.betas,
            rhos: g.rhos,
            qs: g.qs,
            tolerance: DEFAULT_TOLERANCE,
            moments: None,
            param_diff: None,
        }
    }
}

impl VerifyBoundsConfig {
    pub fn grid(&self) -> Result<BoundGrid, CliError> {
        let grid = BoundGrid {
            betas: self.betas.clone(),
            rhos: self.rhos.clone(),
            qs: self.qs.clone(),
        };
        grid.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Usage(format!("tolerance must be finite and >= 0, got {}", self.tolerance)));
        }
        Ok(grid)
    }
}

/// ReLU-difference moment checks at `theta*` fixed and `theta` at each
/// distance.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentRows {
    pub d: usize,
    pub betas: Vec<f64>,
    pub distances: Vec<f64>,
    pub qs: Vec<u32>,
    pub draws: usize,
}

impl Default for MomentRows {
    fn default() -> Self {
        Self {
            d: 3,
            betas: vec![2.0, 4.0, 8.0],
            distances: vec![0.1, 0.3, 0.6],
            qs: vec![2, 3, 4],
            draws: 1_000_000,
        }
    }
}

/// Random `(beta, theta, theta*)` cells for the parameter-difference
/// identity.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamDiffRows {
    pub d: usize,
    pub cells: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub draws: usize,
}

impl Default for ParamDiffRows {
    fn default() -> Self {
        Self {
            d: 3,
            cells: 10,
            beta_min: 1.5,
            beta_max: 16.0,
            draws: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub estimators: Vec<EstimatorKind>,
    pub criterion: CriterionMode,
    pub d: Vec<usize>,
    pub beta: Vec<InverseTemperature<f64>>,
    pub epsilon: Vec<f64>,
    pub trials: usize,
    pub bracket_trials: usize,
    pub max_n: usize,
    pub resolution: f64,
    pub truth: TruthMode,
    pub n_min: Option<usize>,
    pub timing: bool,
    /// Optimizer controls shared by every cell; `kind` and `seed` are
    /// ignored here.
    pub estimator: EstimatorSpec,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let base = CellSpec::new(
            8,
            InverseTemperature::Infinite,
            SuccessCriterion {
                mode: CriterionMode::ProbabilityHalf,
                epsilon: 0.3,
            },
            EstimatorSpec::default(),
        );
        Self {
            estimators: vec![EstimatorKind::Linear],
            criterion: CriterionMode::ProbabilityHalf,
            d: vec![8],
            beta: [0.05, 0.1, 0.2, 0.4].map(InverseTemperature::Finite).to_vec(),
            epsilon: vec![0.3],
            trials: base.trials,
            bracket_trials: base.bracket_trials,
            max_n: base.max_n,
            resolution: base.resolution,
            truth: base.truth,
            n_min: None,
            timing: false,
            estimator: EstimatorSpec::default(),
        }
    }
}

impl SweepConfig {
    /// Cells in grid order: estimator, then epsilon, d, beta.
    pub fn cells(&self, master_seed: u64) -> Result<Vec<CellSpec>, CliError> {
        for (name, empty) in [
            ("estimators", self.estimators.is_empty()),
            ("d", self.d.is_empty()),
            ("beta", self.beta.is_empty()),
            ("epsilon", self.epsilon.is_empty()),
        ] {
            if empty {
                return Err(CliError::Usage(format!("sweep grid `{name}` is empty")));
            }
        }
        let mut out = Vec::new();
        for &kind in &self.estimators {
            for &eps in &self.epsilon {
                let criterion = SuccessCriterion::new(self.criterion, eps).map_err(|e| CliError::Usage(e.to_string()))?;
                for &d in &self.d {
                    for &beta in &self.beta {
                        let mut estimator = self.estimator.clone();
                        estimator.kind = kind;
                        let mut cell = CellSpec::new(d, beta, criterion, estimator);
                        cell.trials = self.trials;
                        cell.bracket_trials = self.bracket_trials;
                        cell.max_n = self.max_n;
                        cell.resolution = self.resolution;
                        cell.master_seed = master_seed;
                        cell.truth = self.truth;
                        cell.n_min = self.n_min;
                        cell.timing = self.timing;
                        cell.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                        out.push(cell);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub data: Option<PathBuf>,
    /// `seed` inside this table is replaced by the run seed.
    pub estimator: EstimatorSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub d: usize,
    pub beta: InverseTemperature<f64>,
    pub n: usize,
    /// Drawn uniformly from the seed when absent.
    pub truth: Option<Vec<f64>>,
    pub file: String,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            d: 3,
            beta: InverseTemperature::Finite(1.0),
            n: 100,
            truth: None,
            file: "dataset.txt".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub d: usize,
    pub epsilon: f64,
    pub kind: NetKind,
    /// Cap cover only: center is the first basis vector.
    pub cap_radius: Option<f64>,
    pub probes: usize,
    pub file: String,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            d: 3,
            epsilon: 0.3,
            kind: NetKind::Packing,
            cap_radius: None,
            probes: logit_complexity::sphere::CERTIFICATE_PROBES,
            file: "net.txt".into(),
        }
    }
}
