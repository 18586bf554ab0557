//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that the criteria execute in order
//! and report timings; the process exits nonzero if any criterion fails.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use logit_complexity::bounds::{default_grid, run_grid, Verifier, KL_AGREEMENT};
use logit_complexity::estimators::{
    enumerate_arc_midpoints, net_oracle_estimate, relu_erm_estimate, relu_risk, zero_one_errors, zero_one_sweep_2d,
    EstimatorKind, EstimatorSpec, NetLoss,
};
use logit_complexity::model::{
    bernoulli_kl_bregman, label_hash, sample_dataset, InverseTemperature, RngSeed, UnitVector,
};
use logit_complexity::moments::verify_relu_moments_multi;
use logit_complexity::sphere::{build_packing, count_halfspace_labelings, winder_bound};
use logit_complexity::sweep::{
    audit_lower_bounds, fit_regime_slope, run_cells, CellSpec, CriterionMode, SlopeAxis, SuccessCriterion, SweepCell,
};
use rand::Rng;

const SEED: u64 = 2024;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed.as_secs() < limit_s
}

fn c1_inequality_suite() -> Verdict {
    let start = Instant::now();
    let grid = default_grid();
    let rows = match run_grid(&Verifier::default(), &grid) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("grid run failed: {e}")),
    };
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let t = start.elapsed();
    verdict(
        failed.is_empty() && rows.len() == grid.row_count() && within(t, 60),
        format!("{} rows, {} failed {:?}, {:.1}s", rows.len(), failed.len(), failed, t.as_secs_f64()),
    )
}

/// Two-outcome sum with log-probabilities from `ln(1 + e^x)`.
fn kl_direct(eta: f64, eta2: f64) -> f64 {
    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    let p = 1.0 / (1.0 + (-eta).exp());
    // ln p = -softplus(-eta), ln(1-p) = -softplus(eta)
    p * (softplus(-eta2) - softplus(-eta)) + (1.0 - p) * (softplus(eta2) - softplus(eta))
}

fn c2_kl_identities() -> Verdict {
    let mut rng = RngSeed::new(SEED, label_hash("kl-pairs")).rng();
    let mut worst_pair: f64 = 0.0;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(-8.0..8.0);
        let b: f64 = rng.random_range(-8.0..8.0);
        worst_pair = worst_pair.max((bernoulli_kl_bregman(a, b) - kl_direct(a, b)).abs());
    }
    let v = Verifier::default();
    let grid = default_grid();
    let mut worst_stein: f64 = 0.0;
    for &beta in &grid.betas {
        for &rho in &grid.rhos {
            match v.expected_kl(beta, rho) {
                Ok(kl) => worst_stein = worst_stein.max(kl.disagreement()),
                Err(e) => return verdict(false, format!("expected_kl({beta}, {rho}): {e}")),
            }
        }
    }
    verdict(
        worst_pair <= 1e-12 && worst_stein <= KL_AGREEMENT,
        format!("max pair gap {worst_pair:.2e}, max Stein/quadrature gap {worst_stein:.2e}"),
    )
}

fn c3_param_diff() -> Verdict {
    let start = Instant::now();
    let v = Verifier::default();
    let base = RngSeed::new(SEED, label_hash("param-diff"));
    let mut rng = base.rng();
    let mut failures = Vec::new();
    for k in 0..10u64 {
        let beta = rng.random_range(1.5..=16.0);
        let d = rng.random_range(2..=6);
        let truth = UnitVector::uniform(d, &mut rng).unwrap();
        let theta = UnitVector::uniform(d, &mut rng).unwrap();
        match v.param_diff_identity(beta, &theta, &truth, 1_000_000, base.derive(&[k])) {
            Ok(rows) => {
                for r in rows.iter().filter(|r| r.name == "paramdiff.identity" && !r.pass) {
                    failures.push(format!("beta={beta:.2} gap={:.2e} > 4se={:.2e}", r.lhs, r.rhs));
                }
            }
            Err(e) => failures.push(format!("beta={beta:.2}: {e}")),
        }
    }
    let t = start.elapsed();
    verdict(
        failures.is_empty() && within(t, 120),
        format!("10 cells, failures {failures:?}, {:.1}s", t.as_secs_f64()),
    )
}

fn c4_relu_moments() -> Verdict {
    let start = Instant::now();
    let d = 3;
    let truth = UnitVector::basis(d, 0).unwrap();
    let toward = UnitVector::basis(d, 1).unwrap();
    let base = RngSeed::new(SEED, label_hash("relu-moments"));
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut worst_constant: f64 = 0.0;
    for (i, &beta) in [2.0, 4.0, 8.0].iter().enumerate() {
        for (j, &dist) in [0.1f64, 0.3, 0.6].iter().enumerate() {
            let theta = truth.rotate_towards(toward.coords(), 2.0 * (dist / 2.0).asin()).unwrap();
            let seed = base.derive(&[i as u64, j as u64]);
            match verify_relu_moments_multi(beta, &theta, &truth, &[2, 3, 4], 10_000_000, seed) {
                Ok(reports) => {
                    for r in reports {
                        checked += 1;
                        worst_constant = worst_constant.max(r.constant_estimate);
                        if !r.pass {
                            failures.push(format!("beta={beta} dist={dist} q={}", r.q));
                        }
                    }
                }
                Err(e) => failures.push(format!("beta={beta} dist={dist}: {e}")),
            }
        }
    }
    let t = start.elapsed();
    verdict(
        failures.is_empty() && checked == 27 && within(t, 600),
        format!(
            "{checked} checks, failures {failures:?}, largest fitted constant {worst_constant:.3}, {:.1}s",
            t.as_secs_f64()
        ),
    )
}

/// ReLU ERM never loses to the net oracle by more than 1e-6, and the oracle
/// is never better than the continuum optimum can allow given its
/// resolution.
fn c5_oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let resolution = 1e-3;
    let betas = [
        InverseTemperature::Finite(1.5),
        InverseTemperature::Finite(4.0),
        InverseTemperature::Infinite,
    ];
    let ns = [20, 50, 100, 200];
    let mut rng = RngSeed::new(SEED, label_hash("oracle-truths")).rng();
    let mut worse = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_advantage: f64 = 0.0;
    let mut inconsistent = 0;
    for k in 0..100u64 {
        let truth = UnitVector::uniform(2, &mut rng).unwrap();
        let beta = betas[k as usize % 3];
        let n = ns[(k as usize / 3) % 4];
        let ds = sample_dataset(&truth, beta, n, RngSeed::new(SEED, k)).unwrap();
        let spec = EstimatorSpec::new(EstimatorKind::ReluErm).with_seed(k);
        let erm = relu_erm_estimate(&ds, &spec).unwrap();
        let net = net_oracle_estimate(&ds, NetLoss::Relu, resolution).unwrap();
        let f_erm = relu_risk(&ds, &erm.estimate);
        let f_net = relu_risk(&ds, &net.estimate);
        let excess = f_erm - f_net;
        max_excess = max_excess.max(excess);
        if excess > 1e-6 {
            worse += 1;
        }
        let lipschitz = ds.iter().map(|(x, _)| x.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>() / n as f64;
        max_advantage = max_advantage.max(-excess);
        if -excess > lipschitz * resolution + 1e-12 {
            inconsistent += 1;
        }
    }
    let mut sweep_mismatch = 0;
    for k in 0..200u64 {
        let truth = UnitVector::uniform(2, &mut rng).unwrap();
        let beta = betas[k as usize % 3];
        let n = 5 + (k as usize * 7) % 196;
        let ds = sample_dataset(&truth, beta, n, RngSeed::new(SEED + 1, k)).unwrap();
        let (angle, count) = zero_one_sweep_2d(&ds).unwrap();
        let enumerated = enumerate_arc_midpoints(&ds).unwrap();
        let best = enumerated.iter().map(|a| a.1).min().unwrap();
        let (s, c) = angle.sin_cos();
        let at = zero_one_errors(&ds, &UnitVector::normalize(vec![c, s]).unwrap());
        if count != best || at != count {
            sweep_mismatch += 1;
        }
    }
    let t = start.elapsed();
    verdict(
        worse == 0 && inconsistent == 0 && sweep_mismatch == 0 && within(t, 300),
        format!(
            "relu: {worse}/100 worse than net by >1e-6 (max excess {max_excess:.2e}, max ERM advantage {max_advantage:.2e}); \
             zero-one: {sweep_mismatch}/200 mismatches; {:.1}s",
            t.as_secs_f64()
        ),
    )
}

fn cell(d: usize, beta: InverseTemperature<f64>, eps: f64, kind: EstimatorKind) -> CellSpec {
    let criterion = SuccessCriterion::new(CriterionMode::ProbabilityHalf, eps).unwrap();
    let mut c = CellSpec::new(d, beta, criterion, EstimatorSpec::new(kind));
    c.master_seed = SEED;
    c
}

fn finite(b: f64) -> InverseTemperature<f64> {
    InverseTemperature::Finite(b)
}

struct SlopeRun {
    cells: Vec<SweepCell>,
    verdict: Verdict,
}

fn slope_check(specs: Vec<CellSpec>, axis: SlopeAxis, target: f64, band: f64, limit_s: u64) -> SlopeRun {
    let start = Instant::now();
    let cells = match run_cells(&specs) {
        Ok(c) => c,
        Err(e) => {
            return SlopeRun {
                cells: Vec::new(),
                verdict: verdict(false, format!("sweep failed: {e}")),
            }
        }
    };
    let n_stars: Vec<String> = cells
        .iter()
        .map(|c| c.n_star.map_or("unresolved".into(), |n| n.to_string()))
        .collect();
    let t = start.elapsed();
    let verdict = match fit_regime_slope(&cells, axis) {
        Ok(f) => verdict(
            (f.slope - target).abs() <= band && within(t, limit_s),
            format!(
                "slope {:.3} ± {:.3} (target {target} ± {band}), n* = [{}], {:.1}s",
                f.slope,
                f.std_error,
                n_stars.join(", "),
                t.as_secs_f64()
            ),
        ),
        Err(e) => verdict(false, format!("fit failed: {e}; n* = [{}]", n_stars.join(", "))),
    };
    SlopeRun { cells, verdict }
}

fn c6_high_temperature() -> SlopeRun {
    let specs = [0.05, 0.1, 0.2, 0.4]
        .iter()
        .map(|&b| cell(8, finite(b), 0.3, EstimatorKind::Linear))
        .collect();
    slope_check(specs, SlopeAxis::Beta, -2.0, 0.4, 1800)
}

fn c7_moderate_temperature() -> SlopeRun {
    let specs = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&b| {
            let mut c = cell(5, finite(b), 0.15, EstimatorKind::ReluErm);
            c.estimator.restarts = 1;
            c
        })
        .collect();
    slope_check(specs, SlopeAxis::Beta, -1.0, 0.4, 3600)
}

fn c8_low_temperature() -> SlopeRun {
    let eps = [0.4, 0.2, 0.1, 0.05];
    let specs = eps
        .iter()
        .map(|&e| cell(3, InverseTemperature::Infinite, e, EstimatorKind::ZeroOneErm))
        .collect();
    let mut run = slope_check(specs, SlopeAxis::InvEpsilon, 1.0, 0.3, 1800);
    let below: Vec<String> = run
        .cells
        .iter()
        .filter_map(|c| {
            let n = c.n_star.filter(|_| c.is_resolved())?;
            let floor = logit_complexity::sweep::noiseless_floor(c.spec.d, c.spec.criterion.epsilon);
            ((n as f64) < floor).then(|| format!("eps={} n*={n} < {floor:.3}", c.spec.criterion.epsilon))
        })
        .collect();
    let resolved = run.cells.iter().filter(|c| c.is_resolved()).count();
    run.verdict.pass &= below.is_empty() && resolved > 0;
    run.verdict.detail.push_str(&format!("; noiseless floor violations {below:?}"));
    run
}

fn c9_dimension() -> SlopeRun {
    let specs = [4, 8, 16, 32]
        .iter()
        .map(|&d| cell(d, finite(0.2), 0.3, EstimatorKind::Linear))
        .collect();
    slope_check(specs, SlopeAxis::Dimension, 1.0, 0.3, 1800)
}

fn c10_lower_bound_audit(cells: &[SweepCell]) -> Verdict {
    let mut audited = 0;
    let mut violations = Vec::new();
    for c in cells {
        let Some(n) = c.n_star.filter(|_| c.is_resolved()) else {
            continue;
        };
        audited += 1;
        let s = &c.spec;
        for v in audit_lower_bounds(s.d, s.beta, s.criterion.epsilon, n) {
            violations.push(format!("d={} beta={} eps={}: {} {} < {:.3}", s.d, s.beta, s.criterion.epsilon, v.name, n, v.floor));
        }
    }
    verdict(
        violations.is_empty() && audited > 0,
        format!("{audited} resolved cells audited, violations {violations:?}"),
    )
}

fn c11_shattering_and_packing() -> Verdict {
    let start = Instant::now();
    let mut rng = RngSeed::new(SEED, label_hash("shatter-instances")).rng();
    let mut over = Vec::new();
    let mut errors = Vec::new();
    let mut instances = 0;
    for d in [2usize, 3] {
        for n in 3..=12usize {
            let cap = winder_bound(n, d);
            for k in 0..200u64 {
                let pts: Vec<Vec<f64>> = (0..n)
                    .map(|_| UnitVector::uniform(d, &mut rng).unwrap().into_inner())
                    .collect();
                match count_halfspace_labelings(&pts, RngSeed::new(SEED, k)) {
                    Ok(count) => {
                        instances += 1;
                        if count as f64 > cap {
                            over.push(format!("d={d} n={n}: {count} > {cap:.1}"));
                        }
                    }
                    Err(e) => errors.push(format!("d={d} n={n}: {e}")),
                }
            }
        }
    }
    let mut small = Vec::new();
    let mut packings = 0;
    for d in 2..=4usize {
        for eps in [0.3, 0.4, 0.5, 0.7, 0.9] {
            match build_packing(d, eps, RngSeed::new(SEED, label_hash("packing")).derive(&[d as u64])) {
                Ok(net) => {
                    packings += 1;
                    let floor = (1.0 / eps).powi(d as i32 - 1);
                    if (net.len() as f64) < floor {
                        small.push(format!("d={d} eps={eps}: {} < {floor:.1}", net.len()));
                    }
                }
                Err(e) => errors.push(format!("packing d={d} eps={eps}: {e}")),
            }
        }
    }
    let t = start.elapsed();
    verdict(
        over.is_empty() && small.is_empty() && errors.is_empty() && within(t, 120),
        format!(
            "{instances} labeling counts, over Winder {over:?}; {packings} packings, under floor {small:?}; \
             errors {errors:?}; {:.1}s",
            t.as_secs_f64()
        ),
    )
}

fn c12_determinism() -> Verdict {
    let tmp = tempfile::tempdir().expect("temp dir");
    let cfg = tmp.path().join("sweep.toml");
    let text = r#"
seed = 99
[sweep]
estimators = ["linear", "relu_erm"]
d = [3]
beta = [0.5, 2.0, "inf"]
epsilon = [0.3]
trials = 60
bracket_trials = 120

[sweep.estimator]
restarts = 1
"#;
    fs::write(&cfg, text).expect("write config");
    let mut outputs = Vec::new();
    for name in ["first", "second"] {
        let dir = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_logit-sc"))
            .arg("sweep")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&dir)
            .output()
            .expect("run binary");
        if !status.status.success() {
            return verdict(false, format!("sweep exited {:?}", status.status.code()));
        }
        let files: Vec<Vec<u8>> = ["sweep.csv", "bounds_table.csv", "slopes.csv", "phase.svg"]
            .iter()
            .map(|f| fs::read(dir.join(f)).unwrap_or_default())
            .collect();
        outputs.push(files);
    }
    let rows = String::from_utf8_lossy(&outputs[0][0]).lines().count().saturating_sub(1);
    verdict(
        outputs[0] == outputs[1] && rows == 6,
        format!("{rows} sweep rows, identical = {}", outputs[0] == outputs[1]),
    )
}

fn report(id: u32, title: &str, v: &Verdict) -> bool {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {title}: {}", v.detail);
    v.pass
}

fn main() {
    let mut all = true;
    all &= report(1, "inequality suite", &c1_inequality_suite());
    all &= report(2, "KL identities", &c2_kl_identities());
    all &= report(3, "parameter-difference identity", &c3_param_diff());
    all &= report(4, "ReLU-difference moments", &c4_relu_moments());
    all &= report(5, "optimizer oracles", &c5_oracle_equivalence());
    let mut cells = Vec::new();
    let c6 = c6_high_temperature();
    all &= report(6, "high-temperature beta slope", &c6.verdict);
    cells.extend(c6.cells);
    let c7 = c7_moderate_temperature();
    all &= report(7, "moderate-temperature beta slope", &c7.verdict);
    cells.extend(c7.cells);
    let c8 = c8_low_temperature();
    all &= report(8, "low-temperature epsilon slope", &c8.verdict);
    cells.extend(c8.cells);
    let c9 = c9_dimension();
    all &= report(9, "dimension slope", &c9.verdict);
    cells.extend(c9.cells);
    all &= report(10, "lower-bound audit", &c10_lower_bound_audit(&cells));
    all &= report(11, "shattering and packing", &c11_shattering_and_packing());
    all &= report(12, "sweep determinism", &c12_determinism());
    if !all {
        println!("acceptance: some criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 12 criteria passed");
}
