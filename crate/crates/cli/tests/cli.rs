use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use logit_complexity::bounds::BoundGrid;
use logit_complexity::estimators::{estimate, EstimatorKind, EstimatorSpec};
use logit_complexity_cli::commands::sample_data;
use logit_complexity_cli::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logit-sc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

const SMALL_SWEEP: &str = r#"
seed = 3
[sweep]
estimators = ["zero_one_erm"]
d = [3]
beta = ["inf"]
epsilon = [0.4, 0.3, 0.2, 0.15]
trials = 50
bracket_trials = 100
"#;

#[test]
fn sweep_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.toml");
    fs::write(&cfg, SMALL_SWEEP).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(&["sweep", "--config", path_str(&cfg), "--out", path_str(dir)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["sweep.csv", "bounds_table.csv", "slopes.csv", "phase.svg"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let check = run(&[
        "schema-check",
        path_str(&a.join("sweep.csv")),
        path_str(&a.join("bounds_table.csv")),
        path_str(&a.join("slopes.csv")),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stdout));
}

#[test]
fn svg_annotations_match_fitted_slopes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.toml");
    fs::write(&cfg, SMALL_SWEEP).unwrap();
    let out = run(&["sweep", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(0));
    let slopes = fs::read_to_string(tmp.path().join("slopes.csv")).unwrap();
    let svg = fs::read_to_string(tmp.path().join("phase.svg")).unwrap();
    let rows: Vec<&str> = slopes.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    let slope: f64 = fields[4].parse().unwrap();
    let se: f64 = fields[5].parse().unwrap();
    let expected = format!("slope {slope:.3} ± {se:.3}");
    assert!(svg.contains(&expected), "missing '{expected}'");
}

#[test]
fn empty_beta_grid_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "seed = 1\n[sweep]\nbeta = []\n").unwrap();
    let out = run(&["sweep", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "seed = 1\n[sweep]\nbetas = [1.0]\n").unwrap();
    let out = run(&["sweep", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_seed_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["sample", "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn strict_flag_fails_on_unresolved_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("tight.toml");
    let text = "seed = 2\n[sweep]\nd = [8]\nbeta = [0.05]\nepsilon = [0.3]\ntrials = 50\nmax_n = 64\n";
    fs::write(&cfg, text).unwrap();
    let lax = run(&["sweep", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(lax.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",unresolved,"));
    let strict = run(&["sweep", "--strict", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn sample_then_estimate_matches_in_process_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = path_str(tmp.path());
    let out = run(&["sample", "--seed", "21", "--d", "4", "--beta", "2.5", "--n", "300", "--out", dir]);
    assert_eq!(out.status.code(), Some(0));
    let data = tmp.path().join("dataset.txt");

    let mut cfg = RunConfig {
        seed: Some(21),
        ..RunConfig::default()
    };
    cfg.sample.d = 4;
    cfg.sample.beta = "2.5".parse().unwrap();
    cfg.sample.n = 300;
    let (_, ds) = sample_data(&cfg).unwrap();

    for kind in ["linear", "relu_erm"] {
        let out = run(&["estimate", "--seed", "21", "--estimator", kind, "--data", path_str(&data)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let got: Vec<f64> = v["estimate"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let spec = EstimatorSpec::new(kind.parse::<EstimatorKind>().unwrap()).with_seed(21);
        let want = estimate(&ds, &spec).unwrap();
        let want: Vec<u64> = want.estimate.coords().iter().map(|x| x.to_bits()).collect();
        let got: Vec<u64> = got.iter().map(|x| x.to_bits()).collect();
        assert_eq!(got, want, "{kind}");
    }
}

#[test]
fn unknown_estimator_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.txt");
    fs::write(&data, "# logit-dataset v1 d=2 n=1\n1 0.5 0.5\n").unwrap();
    let out = run(&["estimate", "--seed", "1", "--estimator", "lasso", "--data", path_str(&data)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_dataset_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.txt");
    fs::write(&data, "# logit-dataset v1 d=2 n=2\n1 0.5 0.5\n-1 0.5 x\n").unwrap();
    let out = run(&["estimate", "--seed", "1", "--data", path_str(&data)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn adaptive_on_noiseless_data_takes_the_moderate_low_branch() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = path_str(tmp.path());
    let out = run(&["sample", "--seed", "8", "--d", "3", "--beta", "inf", "--n", "60", "--out", dir]);
    assert_eq!(out.status.code(), Some(0));
    let data = tmp.path().join("dataset.txt");
    let out = run(&["estimate", "--seed", "8", "--estimator", "adaptive", "--data", path_str(&data)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["branch"], "moderate_low");
}

#[test]
fn huge_beta_with_zero_tolerance_surfaces_a_range_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["verify-bounds", "--tolerance", "0", "--beta", "1e9", "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical range"));
}

#[test]
fn report_rows_equal_grid_cardinality() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("vb.toml");
    fs::write(&cfg, "[verify_bounds]\nbetas = [0.5, 4.0]\nrhos = [0.0, 0.9]\nqs = [0, 1, 2]\n").unwrap();
    let out = run(&["verify-bounds", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("bounds_report.csv")).unwrap();
    let grid = BoundGrid {
        betas: vec![0.5, 4.0],
        rhos: vec![0.0, 0.9],
        qs: vec![0, 1, 2],
    };
    assert_eq!(csv.lines().count() - 1, grid.row_count());
    assert!(!csv.contains('\r'));
}

#[test]
fn schema_check_rejects_a_corrupted_report() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("sweep.csv");
    fs::write(
        &csv,
        "estimator,criterion,d,beta,epsilon,n_star,status,trials_per_probe,probes,master_seed,wall_ms\n\
         linear,probability_half,3,infinite,0.3,10,resolved,200,5:1/200,1,0\n",
    )
    .unwrap();
    let out = run(&["schema-check", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("column beta"));
}

#[test]
fn net_reports_a_passing_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["net", "--seed", "4", "--d", "3", "--epsilon", "0.4", "--kind", "cover", "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["uncovered"], 0);
    let text = fs::read_to_string(tmp.path().join("net.txt")).unwrap();
    assert!(text.starts_with("# d=3 radius=0.4 kind=cover"));
}
