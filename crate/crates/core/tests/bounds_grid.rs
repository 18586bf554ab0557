use logit_complexity::bounds::{default_grid, run_grid, Verifier, KL_AGREEMENT};

#[test]
fn default_grid_has_no_failures() {
    let grid = default_grid();
    let rows = run_grid(&Verifier::default(), &grid).unwrap();
    assert_eq!(rows.len(), grid.row_count());
    let failing: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    assert!(failing.is_empty(), "{failing:#?}");
    for r in rows.iter().filter(|r| r.name == "kl.identity") {
        assert!(r.lhs <= KL_AGREEMENT);
    }
}
