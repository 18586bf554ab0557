//! The subcommands. Each returns its results; `main` prints and maps them to
//! exit codes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use logit_complexity::bounds::{run_grid, sort_reports, BoundReport, Method, Relation, Verifier};
use logit_complexity::estimators::{estimate, EstimateResult, EstimatorKind};
use logit_complexity::model::{
    label_hash, param_distance_to_correlation, sample_dataset, Dataset, InverseTemperature, RngSeed, UnitVector,
};
use logit_complexity::moments::verify_relu_moments_multi;
use logit_complexity::quadrature::Integrator;
use logit_complexity::sphere::{
    build_cap_cover, build_packing, cover_certificate, min_pairwise_distance, NetKind, SphereNet,
};
use logit_complexity::sweep::{audit_lower_bounds, fit_regime_slope, run_cells, FloorViolation, SlopeAxis, SweepCell};
use rand::Rng;
use serde::Serialize;

use crate::config::{MomentRows, ParamDiffRows, RunConfig};
use crate::dataset_io::{read_dataset, write_dataset};
use crate::report::{self, fmt_f64, SeriesFit};
use crate::svg::{self, Series};
use crate::CliError;

pub const PHASE_SVG: &str = "phase.svg";

pub struct VerifyOutcome {
    pub rows: Vec<BoundReport>,
    /// Rows that come from the grid itself, before any Monte Carlo rows.
    pub grid_rows: usize,
    pub path: PathBuf,
}

impl VerifyOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &BoundReport> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

pub fn cmd_verify_bounds(cfg: &RunConfig) -> Result<VerifyOutcome, CliError> {
    let vb = &cfg.verify_bounds;
    let grid = vb.grid()?;
    let dir = cfg.prepare_out_dir()?;
    let verifier = Verifier::new(Integrator::shared(), vb.tolerance)?;
    let mut rows = run_grid(&verifier, &grid)?;
    let grid_rows = rows.len();
    let mut extra = Vec::new();
    if let Some(m) = &vb.moments {
        extra.extend(moment_rows(m, cfg.require_seed()?)?);
    }
    if let Some(p) = &vb.param_diff {
        extra.extend(param_diff_rows(&verifier, p, cfg.require_seed()?)?);
    }
    sort_reports(&mut extra);
    rows.extend(extra);
    let path = dir.join(report::BOUNDS_REPORT);
    report::write_file(&dir, report::BOUNDS_REPORT, &report::bounds_report_csv(&rows)?)?;
    Ok(VerifyOutcome { rows, grid_rows, path })
}

/// One row per `(beta, distance, q)`: the Monte Carlo moment minus four
/// standard errors against the three-term bound.
fn moment_rows(m: &MomentRows, seed: u64) -> Result<Vec<BoundReport>, CliError> {
    let truth = UnitVector::basis(m.d, 0)?;
    let base = RngSeed::new(seed, label_hash("relu-moments"));
    let mut out = Vec::new();
    for (i, &beta) in m.betas.iter().enumerate() {
        for (j, &dist) in m.distances.iter().enumerate() {
            let theta = truth.rotate_towards(UnitVector::basis(m.d, 1)?.coords(), 2.0 * (dist / 2.0).asin())?;
            let rho = param_distance_to_correlation(dist)?;
            let seed = base.derive(&[i as u64, j as u64]);
            for r in verify_relu_moments_multi(beta, &theta, &truth, &m.qs, m.draws, seed)? {
                let row = BoundReport::new(
                    "relu_moment",
                    r.empirical_moment,
                    r.bound_value,
                    Relation::Le,
                    Method::MonteCarlo,
                    4.0 * r.mc_std_error,
                );
                out.push(row.with_beta(beta).with_rho(rho).with_q(r.q));
            }
        }
    }
    Ok(out)
}

fn param_diff_rows(verifier: &Verifier<'_>, p: &ParamDiffRows, seed: u64) -> Result<Vec<BoundReport>, CliError> {
    if !(p.beta_min > 0.0 && p.beta_min <= p.beta_max) {
        return Err(CliError::Usage("param_diff needs 0 < beta_min <= beta_max".into()));
    }
    let base = RngSeed::new(seed, label_hash("param-diff"));
    let mut rng = base.rng();
    let mut out = Vec::new();
    for k in 0..p.cells {
        let beta = rng.random_range(p.beta_min..=p.beta_max);
        let truth = UnitVector::uniform(p.d, &mut rng)?;
        let theta = UnitVector::uniform(p.d, &mut rng)?;
        out.extend(verifier.param_diff_identity(beta, &theta, &truth, p.draws, base.derive(&[k as u64]))?);
    }
    Ok(out)
}

pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    pub fits: Vec<SeriesFit>,
    pub violations: Vec<(usize, FloorViolation)>,
    pub skipped_fits: Vec<String>,
    pub dir: PathBuf,
}

impl SweepOutcome {
    pub fn unresolved(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_resolved()).count()
    }
}

fn axis_value_key(c: &SweepCell, axis: SlopeAxis) -> String {
    let s = &c.spec;
    let mut parts = Vec::new();
    if axis != SlopeAxis::Dimension {
        parts.push(format!("d={}", s.d));
    }
    if axis != SlopeAxis::Beta {
        parts.push(format!("beta={}", s.beta));
    }
    if axis != SlopeAxis::InvEpsilon {
        parts.push(format!("epsilon={}", fmt_f64(s.criterion.epsilon)));
    }
    parts.join(";")
}

/// Axes with more than one grid value, in plotting priority.
fn varying_axes(cfg: &RunConfig) -> Vec<SlopeAxis> {
    let sw = &cfg.sweep;
    let distinct_f = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    let finite_betas: Vec<f64> = sw.beta.iter().filter_map(|b| b.value()).collect();
    let mut out = Vec::new();
    if distinct_f(&finite_betas) > 1 {
        out.push(SlopeAxis::Beta);
    }
    if distinct_f(&sw.epsilon) > 1 {
        out.push(SlopeAxis::InvEpsilon);
    }
    let mut ds = sw.d.clone();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() > 1 {
        out.push(SlopeAxis::Dimension);
    }
    out
}

/// Groups cells that differ only along `axis`, in first-seen order.
fn series_groups(cells: &[SweepCell], axis: SlopeAxis) -> Vec<((String, String, String), Vec<SweepCell>)> {
    let mut order: Vec<(String, String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String, String), Vec<SweepCell>> = BTreeMap::new();
    for c in cells {
        if axis == SlopeAxis::Beta && c.spec.beta.is_infinite() {
            continue;
        }
        let key = (
            c.spec.estimator.kind.to_string(),
            c.spec.criterion.mode.to_string(),
            axis_value_key(c, axis),
        );
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(c.clone());
    }
    order
        .into_iter()
        .map(|k| {
            let v = groups.remove(&k).expect("grouped");
            (k, v)
        })
        .collect()
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepOutcome, CliError> {
    let seed = cfg.require_seed()?;
    let specs = cfg.sweep.cells(seed)?;
    let dir = cfg.prepare_out_dir()?;
    let cells = run_cells(&specs)?;

    let mut violations = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if let (true, Some(n)) = (c.is_resolved(), c.n_star) {
            let s = &c.spec;
            violations.extend(
                audit_lower_bounds(s.d, s.beta, s.criterion.epsilon, n)
                    .into_iter()
                    .map(|v| (i, v)),
            );
        }
    }

    let axes = varying_axes(cfg);
    let mut fits = Vec::new();
    let mut skipped_fits = Vec::new();
    let mut plot: Vec<Series> = Vec::new();
    for (a, &axis) in axes.iter().enumerate() {
        for ((estimator, criterion, fixed), group) in series_groups(&cells, axis) {
            if group.len() < 2 {
                continue;
            }
            let label = format!("{estimator} {}", fixed.replace(';', " "));
            let fit = match fit_regime_slope(&group, axis) {
                Ok(f) => Some(f),
                Err(e) => {
                    skipped_fits.push(format!("{label} along {axis}: {e}"));
                    None
                }
            };
            if a == 0 {
                let points = group
                    .iter()
                    .filter(|c| c.is_resolved())
                    .filter_map(|c| Some(((axis.value(c).ok()?).ln(), (c.n_star? as f64).ln())))
                    .collect();
                plot.push(Series {
                    label,
                    points,
                    fit: fit.as_ref().map(|f| (f.slope, f.std_error, f.intercept)),
                });
            }
            if let Some(fit) = fit {
                fits.push(SeriesFit {
                    estimator,
                    criterion,
                    fixed,
                    fit,
                });
            }
        }
    }

    report::write_file(&dir, report::SWEEP, &report::sweep_csv(&cells)?)?;
    report::write_file(&dir, report::BOUNDS_TABLE, &report::bounds_table_csv(&cells)?)?;
    report::write_file(&dir, report::SLOPES, &report::slopes_csv(&fits)?)?;
    let plot_axis = axes.first().copied().unwrap_or(SlopeAxis::Beta);
    report::write_file(&dir, PHASE_SVG, &svg::phase_plot(plot_axis, &plot))?;
    Ok(SweepOutcome {
        cells,
        fits,
        violations,
        skipped_fits,
        dir,
    })
}

#[derive(Serialize)]
pub struct EstimateOutput {
    pub estimator: EstimatorKind,
    pub d: usize,
    pub n: usize,
    #[serde(flatten)]
    pub result: EstimateResult,
}

pub fn cmd_estimate(cfg: &RunConfig, data: &Path, kind: Option<EstimatorKind>) -> Result<EstimateOutput, CliError> {
    let text = std::fs::read_to_string(data).map_err(|e| CliError::Io(format!("{}: {e}", data.display())))?;
    let ds: Dataset = read_dataset(&text)?;
    let mut spec = cfg.estimate.estimator.clone();
    if let Some(k) = kind {
        spec.kind = k;
    }
    spec.seed = cfg.require_seed()?;
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = estimate(&ds, &spec)?;
    Ok(EstimateOutput {
        estimator: spec.kind,
        d: ds.dim(),
        n: ds.len(),
        result,
    })
}

#[derive(Serialize)]
pub struct SampleOutput {
    pub file: PathBuf,
    pub d: usize,
    pub n: usize,
    pub beta: InverseTemperature<f64>,
    pub truth: UnitVector,
}

pub fn sample_truth(cfg: &RunConfig) -> Result<UnitVector, CliError> {
    let s = &cfg.sample;
    match &s.truth {
        Some(v) => {
            if v.len() != s.d {
                return Err(CliError::Usage(format!("truth has {} coordinates, d = {}", v.len(), s.d)));
            }
            UnitVector::normalize(v.clone()).map_err(|e| CliError::Usage(format!("truth: {e}")))
        }
        None => {
            let mut rng = RngSeed::new(cfg.require_seed()?, label_hash("sample-truth")).rng();
            Ok(UnitVector::uniform(s.d, &mut rng)?)
        }
    }
}

pub fn sample_data(cfg: &RunConfig) -> Result<(UnitVector, Dataset), CliError> {
    let truth = sample_truth(cfg)?;
    let seed = RngSeed::new(cfg.require_seed()?, label_hash("sample-data"));
    let ds = sample_dataset(&truth, cfg.sample.beta, cfg.sample.n, seed)?;
    Ok((truth, ds))
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<SampleOutput, CliError> {
    let (truth, ds) = sample_data(cfg)?;
    let dir = cfg.prepare_out_dir()?;
    report::write_file(&dir, &cfg.sample.file, &write_dataset(&ds))?;
    Ok(SampleOutput {
        file: dir.join(&cfg.sample.file),
        d: ds.dim(),
        n: ds.len(),
        beta: cfg.sample.beta,
        truth,
    })
}

#[derive(Serialize)]
pub struct NetOutput {
    pub file: PathBuf,
    pub kind: NetKind,
    pub d: usize,
    pub radius: f64,
    pub points: usize,
    pub construction: String,
    /// Packings only.
    pub min_distance: Option<f64>,
    /// Covers only.
    pub probes: Option<usize>,
    pub uncovered: Option<usize>,
    pub pass: bool,
}

pub fn cmd_net(cfg: &RunConfig) -> Result<NetOutput, CliError> {
    let n = &cfg.net;
    let seed = cfg.require_seed()?;
    let dir = cfg.prepare_out_dir()?;
    let build = RngSeed::new(seed, label_hash("net-build"));
    let check = RngSeed::new(seed, label_hash("net-check"));
    let center = UnitVector::basis(n.d.max(2), 0)?;
    let net: SphereNet = match (n.kind, n.cap_radius) {
        (NetKind::Packing, Some(_)) => {
            return Err(CliError::Usage("cap_radius applies to covers only".into()));
        }
        (NetKind::Packing, None) => build_packing(n.d, n.epsilon, build)?,
        (NetKind::Cover, Some(cap)) => build_cap_cover(&center, cap, n.epsilon, build)?,
        // a cap of radius 2 is the whole sphere; the greedy packing alone
        // only covers up to the radius of its repair grid beyond epsilon
        (NetKind::Cover, None) => build_cap_cover(&center, 2.0, n.epsilon, build)?,
    };
    let (min_distance, probes, uncovered, pass) = match net.kind {
        NetKind::Packing => {
            let m = min_pairwise_distance(&net, check);
            (Some(m), None, None, m >= net.radius)
        }
        NetKind::Cover => {
            let cap = n.cap_radius.map(|r| (&center, r));
            let cert = cover_certificate(&net, cap, n.probes, check)?;
            (None, Some(cert.probes), Some(cert.uncovered), cert.passed())
        }
    };
    report::write_file(&dir, &n.file, &net.to_text())?;
    Ok(NetOutput {
        file: dir.join(&n.file),
        kind: net.kind,
        d: net.dim(),
        radius: net.radius,
        points: net.len(),
        construction: net.construction.clone(),
        min_distance,
        probes,
        uncovered,
        pass,
    })
}

/// Matched schema file name and row count, or what is wrong.
pub type SchemaVerdict = Result<(&'static str, usize), String>;

pub fn cmd_schema_check(files: &[PathBuf]) -> Vec<(PathBuf, SchemaVerdict)> {
    files
        .iter()
        .map(|f| {
            let res = std::fs::read_to_string(f)
                .map_err(|e| e.to_string())
                .and_then(|text| report::check_csv(&text));
            (f.clone(), res)
        })
        .collect()
}
