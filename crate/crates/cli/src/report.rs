//! CSV report files and their schemas.
//!
//! Every file is UTF-8 with LF line endings. Missing values are empty
//! fields, and an infinite inverse temperature is the token `inf`.

use std::path::Path;

use logit_complexity::bounds::BoundReport;
use logit_complexity::sweep::{theoretical_bound_table, BoundKind, SlopeFit, SweepCell};

use crate::CliError;

pub const BOUNDS_REPORT: &str = "bounds_report.csv";
pub const SWEEP: &str = "sweep.csv";
pub const BOUNDS_TABLE: &str = "bounds_table.csv";
pub const SLOPES: &str = "slopes.csv";

/// Shortest round-trip text, switching to exponent form for very large or
/// very small magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).map_err(CliError::csv)?;
    for row in rows {
        w.write_record(&row).map_err(CliError::csv)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn bounds_report_csv(rows: &[BoundReport]) -> Result<String, CliError> {
    to_csv(
        BOUNDS_REPORT_SCHEMA.header().as_slice(),
        rows.iter().map(|r| {
            vec![
                r.name.clone(),
                opt(r.beta, fmt_f64),
                opt(r.rho, fmt_f64),
                opt(r.q, |q| q.to_string()),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                r.relation.to_string(),
                fmt_f64(r.margin),
                r.method.to_string(),
                fmt_f64(r.tolerance),
                r.pass.to_string(),
            ]
        }),
    )
}

fn cell_key(c: &SweepCell) -> Vec<String> {
    let s = &c.spec;
    vec![
        s.estimator.kind.to_string(),
        s.criterion.mode.to_string(),
        s.d.to_string(),
        s.beta.to_string(),
        fmt_f64(s.criterion.epsilon),
    ]
}

pub fn sweep_csv(cells: &[SweepCell]) -> Result<String, CliError> {
    to_csv(
        SWEEP_SCHEMA.header().as_slice(),
        cells.iter().map(|c| {
            let mut row = cell_key(c);
            row.extend([
                opt(c.n_star, |n| n.to_string()),
                c.status.to_string(),
                c.spec.trials.to_string(),
                c.transcript(),
                c.spec.master_seed.to_string(),
                c.wall_ms.to_string(),
            ]);
            row
        }),
    )
}

/// Each cell next to every theoretical expression at its parameters.
/// `satisfied` is filled for exact lower bounds at resolved cells only.
pub fn bounds_table_csv(cells: &[SweepCell]) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for c in cells {
        let s = &c.spec;
        let n_star = c.n_star.filter(|_| c.is_resolved());
        for t in theoretical_bound_table(s.d, s.beta, s.criterion.epsilon) {
            let satisfied = match (t.kind, t.exact, t.value, n_star) {
                (BoundKind::Lower, true, Some(v), Some(n)) => Some(n as f64 >= v),
                _ => None,
            };
            let mut row = cell_key(c);
            row.extend([
                opt(n_star, |n| n.to_string()),
                t.name.to_string(),
                match t.kind {
                    BoundKind::Lower => "lower".into(),
                    BoundKind::UpperShape => "upper_shape".into(),
                },
                opt(t.value, fmt_f64),
                t.exact.to_string(),
                opt(t.value.zip(n_star).map(|(v, n)| n as f64 / v), fmt_f64),
                opt(satisfied, |b| b.to_string()),
            ]);
            rows.push(row);
        }
    }
    to_csv(BOUNDS_TABLE_SCHEMA.header().as_slice(), rows)
}

/// One fitted series: the shared coordinates and the fit.
pub struct SeriesFit {
    pub estimator: String,
    pub criterion: String,
    /// The coordinates held fixed, as `name=value` joined by `;`.
    pub fixed: String,
    pub fit: SlopeFit,
}

pub fn slopes_csv(fits: &[SeriesFit]) -> Result<String, CliError> {
    to_csv(
        SLOPES_SCHEMA.header().as_slice(),
        fits.iter().map(|s| {
            vec![
                s.estimator.clone(),
                s.criterion.clone(),
                s.fit.axis.to_string(),
                s.fixed.clone(),
                fmt_f64(s.fit.slope),
                fmt_f64(s.fit.std_error),
                fmt_f64(s.fit.intercept),
                s.fit.points.len().to_string(),
            ]
        }),
    )
}

#[derive(Clone, Copy, Debug)]
pub enum Column {
    Text,
    Choice(&'static [&'static str]),
    Count,
    OptCount,
    Float,
    OptFloat,
    /// Positive float or `inf`.
    Beta,
    Bool,
    OptBool,
    /// `n:successes/trials` separated by `;`.
    Transcript,
}

pub struct Schema {
    pub file: &'static str,
    pub columns: &'static [(&'static str, Column)],
}

impl Schema {
    pub fn header(&self) -> Vec<&'static str> {
        self.columns.iter().map(|c| c.0).collect()
    }
}

const ESTIMATORS: &[&str] = &["linear", "relu_erm", "zero_one_erm", "adaptive"];
const CRITERIA: &[&str] = &["median_error", "probability_half", "expected_error"];

pub const BOUNDS_REPORT_SCHEMA: Schema = Schema {
    file: BOUNDS_REPORT,
    columns: &[
        ("name", Column::Text),
        ("beta", Column::OptFloat),
        ("rho", Column::OptFloat),
        ("q", Column::OptCount),
        ("lhs", Column::Float),
        ("rhs", Column::Float),
        ("relation", Column::Choice(&["<=", ">="])),
        ("margin", Column::Float),
        ("method", Column::Choice(&["quadrature", "closed_form", "monte_carlo"])),
        ("tolerance", Column::Float),
        ("pass", Column::Bool),
    ],
};

pub const SWEEP_SCHEMA: Schema = Schema {
    file: SWEEP,
    columns: &[
        ("estimator", Column::Choice(ESTIMATORS)),
        ("criterion", Column::Choice(CRITERIA)),
        ("d", Column::Count),
        ("beta", Column::Beta),
        ("epsilon", Column::Float),
        ("n_star", Column::OptCount),
        ("status", Column::Choice(&["resolved", "unresolved"])),
        ("trials_per_probe", Column::Count),
        ("probes", Column::Transcript),
        ("master_seed", Column::Count),
        ("wall_ms", Column::Count),
    ],
};

pub const BOUNDS_TABLE_SCHEMA: Schema = Schema {
    file: BOUNDS_TABLE,
    columns: &[
        ("estimator", Column::Choice(ESTIMATORS)),
        ("criterion", Column::Choice(CRITERIA)),
        ("d", Column::Count),
        ("beta", Column::Beta),
        ("epsilon", Column::Float),
        ("n_star", Column::OptCount),
        ("bound", Column::Text),
        ("kind", Column::Choice(&["lower", "upper_shape"])),
        ("value", Column::OptFloat),
        ("exact", Column::Bool),
        ("ratio", Column::OptFloat),
        ("satisfied", Column::OptBool),
    ],
};

pub const SLOPES_SCHEMA: Schema = Schema {
    file: SLOPES,
    columns: &[
        ("estimator", Column::Choice(ESTIMATORS)),
        ("criterion", Column::Choice(CRITERIA)),
        ("axis", Column::Choice(&["beta", "inv_epsilon", "dimension"])),
        ("fixed", Column::Text),
        ("slope", Column::Float),
        ("std_error", Column::Float),
        ("intercept", Column::Float),
        ("cells", Column::Count),
    ],
};

pub const SCHEMAS: [&Schema; 4] = [&BOUNDS_REPORT_SCHEMA, &SWEEP_SCHEMA, &BOUNDS_TABLE_SCHEMA, &SLOPES_SCHEMA];

fn check_value(col: Column, v: &str) -> Result<(), String> {
    let float = |s: &str| s.parse::<f64>().map(|_| ()).map_err(|_| format!("'{s}' is not a number"));
    let count = |s: &str| s.parse::<u64>().map(|_| ()).map_err(|_| format!("'{s}' is not a nonnegative integer"));
    let boolean = |s: &str| match s {
        "true" | "false" => Ok(()),
        _ => Err(format!("'{s}' is not true/false")),
    };
    match col {
        Column::Text => Ok(()),
        Column::Choice(options) if options.contains(&v) => Ok(()),
        Column::Choice(options) => Err(format!("'{v}' is not one of {}", options.join("|"))),
        Column::Count => count(v),
        Column::Float => float(v),
        Column::Bool => boolean(v),
        Column::OptCount | Column::OptFloat | Column::OptBool if v.is_empty() => Ok(()),
        Column::OptCount => count(v),
        Column::OptFloat => float(v),
        Column::OptBool => boolean(v),
        Column::Beta if v == "inf" => Ok(()),
        Column::Beta => match v.parse::<f64>() {
            Ok(b) if b > 0.0 && b.is_finite() => Ok(()),
            _ => Err(format!("'{v}' is not a positive number or inf")),
        },
        Column::Transcript => {
            for probe in v.split(';').filter(|p| !p.is_empty()) {
                let ok = probe
                    .split_once(':')
                    .and_then(|(n, rest)| rest.split_once('/').map(|(s, t)| [n, s, t]))
                    .is_some_and(|parts| parts.iter().all(|p| p.parse::<u64>().is_ok()));
                if !ok {
                    return Err(format!("malformed probe '{probe}'"));
                }
            }
            Ok(())
        }
    }
}

/// Picks the schema from the header and checks every row against it.
/// Returns the matched schema's file name and the row count.
pub fn check_csv(text: &str) -> Result<(&'static str, usize), String> {
    if text.contains('\r') {
        return Err("CR line ending found".into());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let schema = SCHEMAS
        .iter()
        .find(|s| s.header() == header)
        .ok_or_else(|| format!("header matches no known schema: {}", header.join(",")))?;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format!("line {line}: {e}"))?;
        if record.len() != schema.columns.len() {
            return Err(format!("line {line}: expected {} fields, got {}", schema.columns.len(), record.len()));
        }
        for ((name, col), v) in schema.columns.iter().zip(record.iter()) {
            check_value(*col, v).map_err(|e| format!("line {line}, column {name}: {e}"))?;
        }
        rows += 1;
    }
    Ok((schema.file, rows))
}
