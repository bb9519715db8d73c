use num_complex::Complex64 as C64;
use ws_acoustics::bem::*;
use ws_acoustics::fields::*;
use ws_acoustics::specfun::{cyl_bessel, cyl_bessel_dx, BesselKind};
use ws_acoustics::wigner_smith::CMat;
use ws_acoustics::*;

fn circle_run(bc: BoundaryCondition) -> BemScattering {
    let g = make_geometry(&GeometrySpec::Circle { radius: 2.0 }, bc).unwrap();
    bem_scattering(&g, bc, 1.0, &ModeSet::cylindrical(6, 1.0), &BemConfig::default()).unwrap()
}

/// Closed-form total field of excitation `n` around a circle of radius `a`.
fn circle_total(bc: BoundaryCondition, n: i32, k: f64, a: f64, x: [f64; 2]) -> C64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let th = x[1].atan2(x[0]);
    let jr = cyl_bessel(BesselKind::RegularJ, n, k * r).unwrap();
    let hr = cyl_bessel(BesselKind::Hankel2, n, k * r).unwrap();
    let ratio = match bc {
        BoundaryCondition::SoundSoft => cyl_bessel(BesselKind::RegularJ, n, k * a).unwrap() / cyl_bessel(BesselKind::Hankel2, n, k * a).unwrap(),
        BoundaryCondition::SoundHard => cyl_bessel_dx(BesselKind::RegularJ, n, k * a).unwrap() / cyl_bessel_dx(BesselKind::Hankel2, n, k * a).unwrap(),
    };
    excitation_amplitude(n, k) * (jr - ratio * hr) * C64::from_polar(1.0, n as f64 * th)
}

#[test]
fn circle_fields_match_closed_form_including_near_boundary() {
    for bc in [BoundaryCondition::SoundSoft, BoundaryCondition::SoundHard] {
        let sc = circle_run(bc);
        let grid = GridSpec { origin: [-4.0, -4.0], spacing: 8.0 / 40.0, nx: 41, ny: 41 };
        let coeffs = CMat::identity(13, 13);
        let fields = coefficient_fields(&sc, &coeffs, &grid).unwrap();
        let mut worst: f64 = 0.0;
        for (f, mode) in fields.iter().zip(&sc.modes.modes) {
            let n = match mode {
                ModeIndex::Cyl { n } => *n,
                _ => unreachable!(),
            };
            for idx in 0..grid.len() {
                let x = grid.point(idx);
                let inside = x[0].hypot(x[1]) < 2.0 + 1e-12;
                assert_eq!(f.masked[idx], inside);
                if !inside {
                    worst = worst.max((f.values[idx] - circle_total(bc, n, 1.0, 2.0, x)).norm());
                }
            }
        }
        assert!(worst < 1e-6, "{bc:?}: worst field error {worst:e}");
        // points a hair outside the surface
        for &eps in &[1e-2, 1e-4] {
            let g1 = GridSpec { origin: [2.0 + eps, 0.3], spacing: 1.0, nx: 1, ny: 1 };
            let p = sc.modes.index_of(ModeIndex::Cyl { n: 2 }).unwrap();
            let f = ws_mode_field(&sc, &coeffs, p, &g1).unwrap();
            let exact = circle_total(bc, 2, 1.0, 2.0, g1.point(0));
            assert!((f.values[0] - exact).norm() < 1e-6, "{bc:?} eps {eps}: {:?} vs {exact:?}", f.values[0]);
        }
    }
}

#[test]
fn fields_are_linear_in_the_coefficients() {
    let sc = circle_run(BoundaryCondition::SoundSoft);
    let grid = GridSpec::square(6.0, 15).unwrap();
    let m = 13;
    let u = CMat::from_fn(m, 1, |i, _| C64::new((i as f64 * 0.7).sin(), (i as f64).cos()));
    let v = CMat::from_fn(m, 1, |i, _| C64::new(1.0 / (1.0 + i as f64), 0.3));
    let (a, b) = (C64::new(0.4, -1.1), C64::new(-2.0, 0.5));
    let fu = coefficient_fields(&sc, &u, &grid).unwrap().remove(0);
    let fv = coefficient_fields(&sc, &v, &grid).unwrap().remove(0);
    let fw = coefficient_fields(&sc, &(&u * a + &v * b), &grid).unwrap().remove(0);
    let scale = fw.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for idx in 0..grid.len() {
        let lin = fu.values[idx] * a + fv.values[idx] * b;
        assert!((fw.values[idx] - lin).norm() <= 1e-10 * scale);
    }
}

#[test]
fn mode_energies_sum_like_excitation_energies() {
    use ws_acoustics::wigner_smith::*;
    let bc = BoundaryCondition::SoundHard;
    let sc = circle_run(bc);
    let modes = ModeSet::cylindrical(6, 1.0);
    let s = mie::mie_smatrix(2, bc, 1.0, 2.0, &modes).unwrap();
    let sp = mie::mie_smatrix_deriv(2, bc, 1.0, 2.0, &modes).unwrap();
    let d = ws_decompose(&q_matrix(&s, &sp).unwrap(), &s).unwrap();
    let grid = GridSpec::square(8.0, 31).unwrap();
    let by_mode: f64 = coefficient_fields(&sc, &d.w, &grid).unwrap().iter().map(FieldGrid::energy).sum();
    let by_port: f64 = coefficient_fields(&sc, &CMat::identity(13, 13), &grid).unwrap().iter().map(FieldGrid::energy).sum();
    assert!((by_mode - by_port).abs() <= 1e-6 * by_port, "{by_mode} vs {by_port}");
}

#[test]
fn uniform_field_shares_equal_area_ratios() {
    let g = make_geometry(&GeometrySpec::Cavity { w: 3.0 }, BoundaryCondition::SoundSoft).unwrap();
    let grid = GridSpec::square(25.0, 51).unwrap();
    let masked: Vec<bool> = (0..grid.len()).map(|i| g.contains(grid.point(i))).collect();
    let f = FieldGrid { spec: grid, values: masked.iter().map(|&m| C64::new(if m { 0.0 } else { 1.0 }, 0.0)).collect(), masked };
    let m = localization_metrics(&f, &g, 1.0);
    assert!((m.boundary - m.boundary_baseline).abs() < 1e-12);
    assert!((m.interior.unwrap() - m.interior_baseline.unwrap()).abs() < 1e-12);
    assert!((m.edge + m.corner - m.boundary).abs() <= m.corner);
}

fn metrics(boundary: f64, corner: f64, interior: Option<f64>) -> LocalizationMetrics {
    LocalizationMetrics { boundary, corner, edge: boundary - corner, interior, boundary_baseline: 0.1, interior_baseline: interior.map(|_| 0.1) }
}

#[test]
fn classification_rules() {
    let t = Thresholds::default();
    let cases = [
        (-10.0, metrics(0.6, 0.5, None), ModeLabel::Corner, false),
        (-1.0, metrics(0.5, 0.05, None), ModeLabel::Ballistic, false),
        (0.1, metrics(0.05, 0.0, None), ModeLabel::NonPropagating, false),
        (5.0, metrics(0.7, 0.1, None), ModeLabel::SurfaceWave, false),
        (300.0, metrics(0.3, 0.1, Some(0.9)), ModeLabel::Cavity, false),
        (-10.0, metrics(0.05, 0.0, None), ModeLabel::Corner, true),
    ];
    for (delay, m, label, warn) in cases {
        let c = classify_modes(&[delay], &[m], &t).unwrap();
        assert_eq!((c.modes[0].label, c.modes[0].warning), (label, warn), "delay {delay}");
    }
    assert!(classify_modes(&[1.0], &[], &t).is_err());
}
