use super::*;
use crate::error::Error;
use crate::estimators::{EstimatorKind, EstimatorSpec};
use crate::model::InverseTemperature;

fn fin(b: f64) -> InverseTemperature<f64> {
    InverseTemperature::finite(b).unwrap()
}

fn cell(d: usize, beta: InverseTemperature<f64>, eps: f64, kind: EstimatorKind) -> CellSpec {
    let crit = SuccessCriterion::new(CriterionMode::ProbabilityHalf, eps).unwrap();
    CellSpec {
        trials: 50,
        bracket_trials: 100,
        master_seed: 11,
        ..CellSpec::new(d, beta, crit, EstimatorSpec::new(kind))
    }
}

fn synthetic(beta: f64, n_star: Option<usize>) -> SweepCell {
    SweepCell {
        spec: cell(4, fin(beta), 0.3, EstimatorKind::Linear),
        n_star,
        status: if n_star.is_some() {
            CellStatus::Resolved
        } else {
            CellStatus::Unresolved
        },
        probes: Vec::new(),
        wall_ms: 0,
    }
}

#[test]
fn criteria() {
    let errs = [0.1, 0.2, 0.3, 0.9];
    let at = |mode, eps| SuccessCriterion::new(mode, eps).unwrap().is_met(&errs);
    assert!(at(CriterionMode::ProbabilityHalf, 0.2));
    assert!(!at(CriterionMode::ProbabilityHalf, 0.15));
    assert!(at(CriterionMode::MedianError, 0.25));
    assert!(!at(CriterionMode::MedianError, 0.24));
    assert!(at(CriterionMode::ExpectedError, 0.375));
    assert!(!at(CriterionMode::ExpectedError, 0.37));
    assert!(SuccessCriterion::new(CriterionMode::ExpectedError, 0.0).is_err());
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
}

#[test]
fn probes_are_deterministic_and_bounded() {
    let c = cell(3, fin(1.0), 0.5, EstimatorKind::Linear);
    let a = success_probability(&c, 40, 60, 0).unwrap();
    let b = success_probability(&c, 40, 60, 0).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, success_probability(&c, 40, 60, 1).unwrap());
    assert!(matches!(success_probability(&c, 40, 49, 0), Err(Error::InvalidConfig(_))));
    let easy = cell(3, fin(1.0), 2.0, EstimatorKind::Linear);
    let p = success_probability(&easy, 3, 50, 0).unwrap();
    assert_eq!(p.successes, 50);
}

#[test]
fn consistency_at_large_n() {
    let c = cell(3, fin(1.0), 0.5, EstimatorKind::Linear);
    let p = success_probability(&c, 1_000_000, 50, 0).unwrap();
    assert!(p.success_rate() >= 0.95);
}

#[test]
fn trivial_epsilon_gives_probe_floor() {
    for kind in [EstimatorKind::Linear, EstimatorKind::ReluErm] {
        let c = cell(4, fin(1.0), 1.9, kind);
        let r = find_n_star(&c).unwrap();
        assert_eq!(r.n_star, Some(4), "{kind}");
    }
}

#[test]
fn search_resolves_and_is_consistent() {
    let c = cell(10, fin(0.5), 0.5, EstimatorKind::Linear);
    let r = find_n_star(&c).unwrap();
    let n_star = r.n_star.unwrap();
    assert!(r.is_resolved());
    // every probe below n* failed in its latest run; n* passed in its latest run
    let mut last = std::collections::BTreeMap::new();
    for p in &r.probes {
        last.insert(p.n, p.pass);
    }
    assert!(last[&n_star]);
    assert!(last.range(..n_star).all(|(_, &pass)| !pass));
    let below = last.range(..n_star).next_back().map(|(&n, _)| n).unwrap();
    assert!((n_star - below) as f64 <= 0.05 * n_star as f64 || n_star - below == 1);
    // both bracketing probes were re-run at the larger trial count
    assert!(r.probes.iter().any(|p| p.n == n_star && p.trials == c.bracket_trials));
    assert!(r.probes.iter().any(|p| p.n == below && p.trials == c.bracket_trials));
    assert_eq!(find_n_star(&c).unwrap(), r);
    assert!(r.transcript().starts_with("10:"));
}

#[test]
fn harder_epsilon_needs_more_samples() {
    let hard = find_n_star(&cell(3, fin(2.0), 0.1, EstimatorKind::Linear)).unwrap();
    let easy = find_n_star(&cell(3, fin(2.0), 0.2, EstimatorKind::Linear)).unwrap();
    assert!(hard.n_star.unwrap() >= easy.n_star.unwrap());
}

#[test]
fn exhausted_budget_is_unresolved() {
    let c = CellSpec {
        max_n: 40,
        ..cell(5, fin(0.1), 0.05, EstimatorKind::Linear)
    };
    let r = find_n_star(&c).unwrap();
    assert_eq!(r.status, CellStatus::Unresolved);
    assert_eq!(r.n_star, None);
    assert_eq!(r.probes.last().unwrap().n, 40);
}

#[test]
fn grid_results_do_not_depend_on_order() {
    let cells = vec![
        cell(3, fin(1.0), 0.5, EstimatorKind::Linear),
        cell(4, InverseTemperature::Infinite, 0.4, EstimatorKind::ZeroOneErm),
    ];
    let all = run_cells(&cells).unwrap();
    let rev: Vec<CellSpec> = cells.iter().rev().cloned().collect();
    let mut back = run_cells(&rev).unwrap();
    back.reverse();
    assert_eq!(all, back);
    assert_ne!(cells[0].stream_id(), cells[1].stream_id());
}

#[test]
fn slope_fit() {
    let cells: Vec<SweepCell> = [0.05, 0.1, 0.2, 0.4]
        .iter()
        .map(|&b| synthetic(b, Some((50.0 / (b * b)).round() as usize)))
        .collect();
    let f = fit_regime_slope(&cells, SlopeAxis::Beta).unwrap();
    assert!((f.slope + 2.0).abs() < 1e-3, "{}", f.slope);
    assert!(f.std_error < 1e-3);

    let dup = vec![synthetic(0.1, Some(10)); 4];
    assert!(matches!(fit_regime_slope(&dup, SlopeAxis::Beta), Err(Error::Degenerate(_))));
    assert!(fit_regime_slope(&cells[..3], SlopeAxis::Beta).is_err());
    let mut open = cells.clone();
    open[2] = synthetic(0.2, None);
    assert!(matches!(fit_regime_slope(&open, SlopeAxis::Beta), Err(Error::Unresolved(_))));
    let mut mixed = cells.clone();
    mixed[1].spec.d = 9;
    assert!(fit_regime_slope(&mixed, SlopeAxis::Beta).is_err());
}

#[test]
fn slope_fit_matches_hand_computation() {
    // n* = 3, 5, 11, 17 at beta = 1, 2, 4, 8
    let cells: Vec<SweepCell> = [(1.0, 3), (2.0, 5), (4.0, 11), (8.0, 17)]
        .iter()
        .map(|&(b, n)| synthetic(b, Some(n)))
        .collect();
    let f = fit_regime_slope(&cells, SlopeAxis::Beta).unwrap();
    let xs = [0.0f64, 1.0, 2.0, 3.0].map(|k| k * std::f64::consts::LN_2);
    let ys = [3.0f64, 5.0, 11.0, 17.0].map(f64::ln);
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    assert!((f.slope - slope).abs() < 1e-12);
    assert!((f.slope - 0.86450045).abs() < 1e-7);
}

#[test]
fn theory_examples() {
    let t = theoretical_bound_table(11, fin(1.0), 0.1);
    let floor = t[0].value.unwrap();
    assert!((floor - 17.328679513998633).abs() < 1e-9, "{floor}");
    assert!(t[1].value.is_none());
    let t = theoretical_bound_table(11, InverseTemperature::Infinite, 0.1);
    assert!((t[1].value.unwrap() - 4.5984930146430285).abs() < 1e-12);
    assert!(t[1].exact);
    assert!(t[0].value.is_none());
    assert!(t[4].value.is_some());
    // high-temperature shape at beta = 0.5: 4 d / eps^2
    let t = theoretical_bound_table(8, fin(0.5), 0.3);
    assert!((t[2].value.unwrap() - 4.0 * 8.0 / 0.09).abs() < 1e-9);
    assert!(t[3].value.is_none());
    assert!(theoretical_bound_table(8, fin(0.5), 1.5).iter().all(|r| !r.applicable()));
    assert_eq!(audit_lower_bounds(11, fin(1.0), 0.1, 17).len(), 1);
    assert!(audit_lower_bounds(11, fin(1.0), 0.1, 18).is_empty());
}
