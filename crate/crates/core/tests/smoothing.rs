use rieszwave::experiments::{run_smoothing_bounds, StudyConfig};

// Each active mode j ≤ n is a unit vector of ℋ and contributes 2ⁿ − 1 in
// expectation, one per interval after the first.
#[test]
fn smoothed_energy_matches_mode_count_identity() {
    let cfg = StudyConfig { grid: 16, fine_level: 8, window_side: 0.5, levels: vec![3, 4, 5], replicas: 300, ..StudyConfig::default() };
    let res = run_smoothing_bounds(&cfg).unwrap();
    let rows: Vec<_> = res.aggregates("w_energy_mean").collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let n = row.n.unwrap();
        let want = n as f64 * ((1u64 << n) - 1) as f64;
        let hw = row.ci_high.unwrap() - row.estimate;
        assert!((row.estimate - want).abs() <= 2.0 * hw, "n={n}: {} vs {want} (half width {hw})", row.estimate);
    }
    let exact: Vec<f64> = (3..=7).map(|n: u32| (n as f64 * ((1u64 << n) - 1) as f64).log2()).collect();
    let xs: Vec<f64> = (3..=7).map(f64::from).collect();
    let slope = rieszwave::stats::ols(&xs, &exact).unwrap().slope;
    assert!((slope - 1.3463).abs() < 1e-4, "{slope}");
}
