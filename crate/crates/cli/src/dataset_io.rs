//! Plain-text dataset files.
//!
//! ```text
//! # logit-dataset v1 d=<d> n=<n>
//! <y> <x_1> ... <x_d>
//! ```
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so a write/read cycle is exact.

use std::collections::HashMap;
use std::fmt::Write as _;

use logit_complexity::model::{Dataset, Label};
use logit_complexity::{Error, Result};

const MAGIC: &str = "logit-dataset";
const VERSION: &str = "v1";

pub fn write_dataset(ds: &Dataset) -> String {
    let mut out = String::with_capacity(ds.len() * (ds.dim() + 1) * 20);
    let _ = writeln!(out, "# {MAGIC} {VERSION} d={} n={}", ds.dim(), ds.len());
    for (x, y) in ds.iter() {
        let _ = write!(out, "{}", y.as_int());
        for v in x {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_dataset(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let bad_header = || parse_err(1, format!("expected '# {MAGIC} {VERSION} d=<d> n=<n>'"));
    let mut words = header.strip_prefix('#').ok_or_else(bad_header)?.split_whitespace();
    if words.next() != Some(MAGIC) {
        return Err(bad_header());
    }
    match words.next() {
        Some(VERSION) => {}
        Some(other) => return Err(parse_err(1, format!("unsupported version '{other}'"))),
        None => return Err(bad_header()),
    }
    let fields: HashMap<&str, &str> = words.filter_map(|w| w.split_once('=')).collect();
    let field = |k: &str| -> Result<usize> {
        fields
            .get(k)
            .ok_or_else(bad_header)?
            .parse()
            .map_err(|_| parse_err(1, format!("invalid {k}")))
    };
    let (d, n) = (field("d")?, field("n")?);
    let mut ds = Dataset::with_capacity(d, n).map_err(|e| parse_err(1, e.to_string()))?;
    let mut x = Vec::with_capacity(d);
    let mut last = 1;
    for (line_no, line) in lines {
        last = line_no;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut tokens = t.split_whitespace();
        let y_tok = tokens.next().expect("nonempty line");
        let y = match y_tok {
            "1" | "+1" => Label::Positive,
            "-1" => Label::Negative,
            other => return Err(parse_err(line_no, format!("label must be -1 or 1, got '{other}'"))),
        };
        x.clear();
        for tok in tokens {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid number '{tok}'")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite covariate '{tok}'")));
            }
            x.push(v);
        }
        if x.len() != d {
            return Err(parse_err(line_no, format!("expected {d} covariates, got {}", x.len())));
        }
        if ds.len() == n {
            return Err(parse_err(line_no, format!("more than the {n} samples declared in the header")));
        }
        ds.push(&x, y).map_err(|e| parse_err(line_no, e.to_string()))?;
    }
    if ds.len() != n {
        return Err(parse_err(last, format!("header declares {n} samples, found {}", ds.len())));
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use logit_complexity::model::{sample_dataset, InverseTemperature, RngSeed, UnitVector};

    #[test]
    fn round_trip_is_exact() {
        let truth = UnitVector::basis(4, 2).unwrap();
        let ds = sample_dataset(&truth, InverseTemperature::Finite(2.0), 50, RngSeed::new(3, 4)).unwrap();
        let back = read_dataset(&write_dataset(&ds)).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn errors_name_the_line() {
        let text = "# logit-dataset v1 d=2 n=2\n1 0.5 0.25\n0 1 2\n";
        match read_dataset(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = "# logit-dataset v1 d=2 n=2\n1 0.5\n";
        assert!(matches!(read_dataset(short), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_dataset("d=2 n=1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sample_count_must_match_header() {
        let text = "# logit-dataset v1 d=2 n=3\n1 0.5 0.25\n-1 1 2\n";
        assert!(matches!(read_dataset(text), Err(Error::Parse { line: 3, .. })));
    }
}
