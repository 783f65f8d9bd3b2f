use proptest::prelude::*;

use rieszwave::experiments::{StudyConfig, StudyKind, MAX_SEED};
use rieszwave::lattice::{h_inner_spectral, h_norm_spectral, make_weights, CellRule, Field, TorusGrid};
use rieszwave::noise::dyadic_floor;
use rieszwave::norms::{frac_sobolev, holder_norm, CellSet, SpaceTimeSamples};
use rieszwave::stats::wilson;

fn samples(values: Vec<f64>) -> SpaceTimeSamples {
    SpaceTimeSamples::new(vec![0.25, 0.5, 0.75], [0.0; 3], 0.25, [3, 3, 3], values).unwrap()
}

fn cube_set(side: i64) -> CellSet {
    let g = TorusGrid::new(4.0, 16).unwrap();
    let cells = (0..side).flat_map(|i| (0..side).flat_map(move |j| (0..side).map(move |k| [i, j, k])));
    CellSet::new(g, cells)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn holder_seminorm_ignores_constants_and_scales(
        v in prop::collection::vec(-1.0f64..1.0, 81),
        shift in -5.0f64..5.0,
        scale in 0.1f64..10.0,
    ) {
        let base = holder_norm(&samples(v.clone()), 0.3).unwrap();
        let shifted = holder_norm(&samples(v.iter().map(|x| x + shift).collect()), 0.3).unwrap();
        let scaled = holder_norm(&samples(v.iter().map(|x| x * scale).collect()), 0.3).unwrap();
        prop_assert!((base.seminorm - shifted.seminorm).abs() <= 1e-9 * (1.0 + base.seminorm));
        prop_assert!((scaled.seminorm - scale * base.seminorm).abs() <= 1e-9 * (1.0 + scaled.seminorm));
        prop_assert!(base.exhaustive);
        prop_assert!(base.norm >= base.sup && base.norm >= base.seminorm);
    }

    #[test]
    fn sobolev_seminorm_ignores_constants(
        v in prop::collection::vec(-1.0f64..1.0, 64),
        shift in -3.0f64..3.0,
        p in 2.0f64..9.0,
    ) {
        let set = cube_set(4);
        let a = frac_sobolev(&v, &set, 0.05, p).unwrap();
        let b = frac_sobolev(&v.iter().map(|x| x + shift).collect::<Vec<_>>(), &set, 0.05, p).unwrap();
        prop_assert!((a.seminorm - b.seminorm).abs() <= 1e-9 * (1.0 + a.seminorm));
        prop_assert!(a.full >= a.lp && a.full >= a.seminorm);
    }

    #[test]
    fn h_norm_is_quadratic_and_polarises(c in -4.0f64..4.0, beta in 0.1f64..1.9, a in 0.1f64..1.0) {
        let g = TorusGrid::new(4.0, 8).unwrap();
        let w = make_weights(&g, beta, CellRule::CellAverage).unwrap();
        let phi = Field::from_fn(g, |x| (a * x[0]).sin() + (x[1] * x[2]).cos());
        let psi = Field::from_fn(g, |x| (-(x[0] - 2.0).powi(2)).exp() * a);
        let n1 = h_norm_spectral(&phi, &w).unwrap();
        let nc = h_norm_spectral(&phi.scale(c), &w).unwrap();
        prop_assert!((nc - c * c * n1).abs() <= 1e-10 * (1.0 + nc));
        let ip = h_inner_spectral(&phi, &psi, &w).unwrap();
        let pol = 0.25 * (h_norm_spectral(&phi.add(&psi).unwrap(), &w).unwrap() - h_norm_spectral(&phi.sub(&psi).unwrap(), &w).unwrap());
        prop_assert!((ip - pol).abs() <= 1e-8 * (1.0 + ip.abs()));
    }

    #[test]
    fn dyadic_floor_brackets_t(t in 0.0f64..=1.0, n in 1u32..10) {
        let (floor, prev) = dyadic_floor(t, n, 1.0).unwrap();
        let width = 1.0 / (1u64 << n) as f64;
        prop_assert!(floor <= t && (t < floor + width || t == 1.0));
        prop_assert!(prev == 0.0 || (floor - prev - width).abs() < 1e-15);
    }

    #[test]
    fn wilson_interval_contains_the_proportion(n in 1usize..500, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as usize;
        let (lo, hi) = wilson(k, n, 0.95);
        let phat = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= phat + 1e-12 && phat <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn config_round_trips_through_canonical_text(
        seed in 0..=MAX_SEED,
        replicas in 1usize..1000,
        beta in 0.05f64..1.95,
        levels in prop::collection::vec(1u32..8, 1..5),
    ) {
        let cfg = StudyConfig { seed, replicas, beta, levels, ..StudyConfig::default() };
        let back = StudyConfig::from_toml_str(&cfg.canonical()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn seeds_beyond_toml_range_are_rejected(seed in (MAX_SEED + 1)..=u64::MAX) {
        let cfg = StudyConfig { seed, ..StudyConfig::default() };
        prop_assert!(cfg.for_study(StudyKind::Rate).is_err());
    }
}
