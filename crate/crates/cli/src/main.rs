use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logit_complexity::estimators::EstimatorKind;
use logit_complexity::model::InverseTemperature;
use logit_complexity::sphere::NetKind;
use logit_complexity_cli::commands::{self, PHASE_SVG};
use logit_complexity_cli::config::{Overrides, RunConfig};
use logit_complexity_cli::report::{self, fmt_f64};
use logit_complexity_cli::{CliError, EXIT_FAILURE};

/// Sample complexity experiments for logistic regression on the sphere.
#[derive(Parser)]
#[command(name = "logit-sc", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML file with any RunConfig keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Treat unresolved sweep cells as a failure.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Gaussian integral inequalities on a grid; writes bounds_report.csv.
    VerifyBounds {
        #[arg(long)]
        tolerance: Option<f64>,
        /// Replaces the beta axis of the grid.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
    },
    /// Search n* over a grid; writes sweep.csv, bounds_table.csv, slopes.csv and phase.svg.
    Sweep {
        /// Record wall time per cell (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Fit one estimator to a dataset file and print the result as JSON.
    Estimate {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_parser = parse_estimator)]
        estimator: Option<EstimatorKind>,
    },
    /// Draw a dataset from the model and write it in the dataset format.
    Sample {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_parser = parse_beta)]
        beta: Option<InverseTemperature<f64>>,
        #[arg(long)]
        n: Option<usize>,
        /// File name inside the output directory.
        #[arg(long)]
        file: Option<String>,
    },
    /// Build a packing or cover of the sphere and certify it.
    Net {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_parser = parse_net_kind)]
        kind: Option<NetKind>,
        #[arg(long)]
        cap_radius: Option<f64>,
    },
    /// Validate CSV reports against their schemas.
    SchemaCheck {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: logit_complexity::Error| e.to_string())
}

fn parse_beta(s: &str) -> Result<InverseTemperature<f64>, String> {
    s.parse().map_err(|e: logit_complexity::Error| e.to_string())
}

fn parse_net_kind(s: &str) -> Result<NetKind, String> {
    s.parse().map_err(|e: logit_complexity::Error| e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let g = cli.global;
    let mut cfg = RunConfig::resolve(&Overrides {
        config: g.config,
        seed: g.seed,
        out: g.out,
        strict: g.strict,
        jobs: g.jobs,
    })?;
    if let Some(k) = cfg.jobs {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match cli.command {
        Command::VerifyBounds { tolerance, beta } => {
            if let Some(t) = tolerance {
                cfg.verify_bounds.tolerance = t;
            }
            if !beta.is_empty() {
                cfg.verify_bounds.betas = beta;
            }
            let out = commands::cmd_verify_bounds(&cfg)?;
            let failures: Vec<_> = out.failures().collect();
            for r in &failures {
                eprintln!(
                    "FAIL {} beta={} rho={} q={}: lhs={} {} rhs={} (margin {}, tolerance {})",
                    r.name,
                    r.beta.map(fmt_f64).unwrap_or_default(),
                    r.rho.map(fmt_f64).unwrap_or_default(),
                    r.q.map(|q| q.to_string()).unwrap_or_default(),
                    fmt_f64(r.lhs),
                    r.relation,
                    fmt_f64(r.rhs),
                    fmt_f64(r.margin),
                    fmt_f64(r.tolerance)
                );
            }
            println!(
                "{}: {} rows ({} from the grid), {} failed",
                out.path.display(),
                out.rows.len(),
                out.grid_rows,
                failures.len()
            );
            Ok(if failures.is_empty() { 0 } else { EXIT_FAILURE })
        }
        Command::Sweep { timing } => {
            cfg.sweep.timing |= timing;
            let out = commands::cmd_sweep(&cfg)?;
            for c in &out.cells {
                let s = &c.spec;
                println!(
                    "{} {} d={} beta={} epsilon={}: n*={} ({})",
                    s.estimator.kind,
                    s.criterion.mode,
                    s.d,
                    s.beta,
                    fmt_f64(s.criterion.epsilon),
                    c.n_star.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
                    c.status
                );
            }
            for f in &out.fits {
                println!(
                    "slope {} along {} [{}]: {:.3} ± {:.3}",
                    f.estimator, f.fit.axis, f.fixed, f.fit.slope, f.fit.std_error
                );
            }
            for s in &out.skipped_fits {
                eprintln!("no fit: {s}");
            }
            for (i, v) in &out.violations {
                eprintln!("lower bound violated at cell {i}: {} n*={} < {}", v.name, v.n_star, fmt_f64(v.floor));
            }
            println!(
                "wrote {}, {}, {}, {} in {}",
                report::SWEEP,
                report::BOUNDS_TABLE,
                report::SLOPES,
                PHASE_SVG,
                out.dir.display()
            );
            let unresolved = out.unresolved();
            if unresolved > 0 {
                eprintln!("{unresolved} unresolved cell(s)");
            }
            let failed = !out.violations.is_empty() || (cfg.strict && unresolved > 0);
            Ok(if failed { EXIT_FAILURE } else { 0 })
        }
        Command::Estimate { data, estimator } => {
            let data = data
                .or_else(|| cfg.estimate.data.clone())
                .ok_or_else(|| CliError::Usage("estimate needs --data <file>".into()))?;
            let out = commands::cmd_estimate(&cfg, &data, estimator)?;
            println!("{}", json(&out)?);
            Ok(0)
        }
        Command::Sample { d, beta, n, file } => {
            let s = &mut cfg.sample;
            s.d = d.unwrap_or(s.d);
            s.beta = beta.unwrap_or(s.beta);
            s.n = n.unwrap_or(s.n);
            if let Some(f) = file {
                s.file = f;
            }
            println!("{}", json(&commands::cmd_sample(&cfg)?)?);
            Ok(0)
        }
        Command::Net {
            d,
            epsilon,
            kind,
            cap_radius,
        } => {
            let n = &mut cfg.net;
            n.d = d.unwrap_or(n.d);
            n.epsilon = epsilon.unwrap_or(n.epsilon);
            n.kind = kind.unwrap_or(n.kind);
            n.cap_radius = cap_radius.or(n.cap_radius);
            let out = commands::cmd_net(&cfg)?;
            println!("{}", json(&out)?);
            Ok(if out.pass { 0 } else { EXIT_FAILURE })
        }
        Command::SchemaCheck { files } => {
            let mut ok = true;
            for (f, res) in commands::cmd_schema_check(&files) {
                match res {
                    Ok((schema, rows)) => println!("ok {}: {schema} schema, {rows} rows", f.display()),
                    Err(e) => {
                        ok = false;
                        println!("invalid {}: {e}", f.display());
                    }
                }
            }
            Ok(if ok { 0 } else { EXIT_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
