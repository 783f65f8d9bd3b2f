use rieszwave::lattice::{Field, TorusGrid};
use rieszwave::wavekernel::{initial_field, spherical_mean_with, InitialData, Interp};

fn bump(g: TorusGrid, sigma: f64) -> Field {
    Field::from_fn(g, |p| {
        let r2: f64 = p.iter().map(|x| (x - 2.0).powi(2)).sum();
        (-0.5 * r2 / (sigma * sigma)).exp()
    })
}

#[test]
fn velocity_bump_stays_inside_the_light_cone() {
    let g = TorusGrid::new(4.0, 32).unwrap();
    let sigma = 0.15;
    let data = InitialData::new(Field::zeros(g), bump(g, sigma), 1.0, 1.0).unwrap();
    for t in [0.25, 0.5, 0.75] {
        let x = initial_field(&data, t).unwrap();
        let peak = x.max_abs();
        let mut outside = 0.0f64;
        let mut inside_hole = 0.0f64;
        for i in 0..g.len() {
            let r = g.torus_distance(g.point(i), [2.0; 3]);
            if r > t + 6.0 * sigma {
                outside = outside.max(x.values()[i].abs());
            }
            // strong Huygens: the interior of the shell empties once t exceeds the bump width
            if t > 6.0 * sigma && r < t - 6.0 * sigma {
                inside_hole = inside_hole.max(x.values()[i].abs());
            }
        }
        assert!(outside < 2e-3 * peak, "t={t}: {outside} vs peak {peak}");
        assert!(inside_hole < 2e-3 * peak, "t={t}: {inside_hole} vs peak {peak}");
    }
}

#[test]
fn trilinear_kirchhoff_error_is_second_order() {
    // spectral evaluation is the reference; trilinear interpolation loses O(h²)
    let mut errs = Vec::new();
    for n in [32, 64] {
        let g = TorusGrid::new(4.0, n).unwrap();
        let f = bump(g, 0.5);
        let x = [1.6, 2.3, 2.1];
        let a = spherical_mean_with(&f, x, 0.5, 16, Interp::Spectral).unwrap();
        let b = spherical_mean_with(&f, x, 0.5, 16, Interp::Trilinear).unwrap();
        errs.push((a - b).abs());
    }
    println!("trilinear error N=32 {:.3e}, N=64 {:.3e}", errs[0], errs[1]);
    let order = (errs[0] / errs[1]).log2();
    assert!((order - 2.0).abs() < 0.3, "observed order {order}");
}
