use num_complex::Complex64 as C64;
use ws_acoustics::mie::*;
use ws_acoustics::modal::{conjugate_mode, incoming_wave, outgoing_wave, ModeIndex, ModeSet};
use ws_acoustics::wigner_smith::{q_matrix, validate_smatrix};
use ws_acoustics::{BoundaryCondition::*, WsError};

/// Exact outgoing wave whose far field is the outgoing template of port `m`.
fn template_exact(m: ModeIndex, k: f64, pt: &[f64]) -> C64 {
    let (mt, sign) = conjugate_mode(m);
    let c = match m {
        ModeIndex::Sph { l, .. } => C64::from(sign * if l % 2 == 0 { -1.0 } else { 1.0 }),
        ModeIndex::Cyl { n } => C64::new(0.0, -1.0) * if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 },
    };
    outgoing_wave(mt, k, pt).unwrap() * c
}

fn total_field(s: &ws_acoustics::SMatrix, p: usize, pt: &[f64]) -> C64 {
    let k = s.k;
    let mut v = incoming_wave(s.modes.modes[p], k, pt).unwrap();
    for (m, &q) in s.modes.modes.iter().enumerate() {
        if s.data[(m, p)] != C64::new(0.0, 0.0) {
            v += s.data[(m, p)] * template_exact(q, k, pt);
        }
    }
    v
}

fn sphere_point(r: f64, t: f64, ph: f64) -> Vec<f64> {
    vec![r * t.sin() * ph.cos(), r * t.sin() * ph.sin(), r * t.cos()]
}

#[test]
fn soft_sphere_monopole_reflection() {
    let a = modal_reflection(3, SoundSoft, 0, 2.0).unwrap();
    assert!((a - C64::from_polar(1.0, 4.0)).norm() < 1e-14);
}

#[test]
fn reflection_is_unimodular() {
    for dim in [2, 3] {
        for bc in [SoundSoft, SoundHard] {
            for order in 0..30 {
                let a = modal_reflection(dim, bc, order, 5.3).unwrap();
                assert!((a.norm() - 1.0).abs() < 1e-13, "dim={dim} {bc:?} order={order}");
            }
        }
    }
    assert!(matches!(modal_reflection(3, SoundSoft, 0, 0.0), Err(WsError::Domain(_))));
    assert!(matches!(modal_reflection(2, SoundHard, 1, -1.0), Err(WsError::Domain(_))));
}

#[test]
fn high_order_reflection_is_free() {
    for bc in [SoundSoft, SoundHard] {
        let a = modal_reflection(3, bc, 40, 5.0).unwrap();
        assert!(a.arg().abs() < 1e-12, "{bc:?}: {a}");
        let a = modal_reflection(2, bc, 40, 5.0).unwrap();
        assert!(a.arg().abs() < 1e-12);
    }
}

#[test]
fn free_space_smatrix() {
    for set in [ModeSet::spherical(4, 1.0), ModeSet::cylindrical(6, 1.0)] {
        let s = free_smatrix(&set, 1.0).unwrap();
        let r = validate_smatrix(&s, 1e-12);
        assert_eq!(r.unitarity, 0.0);
        assert_eq!(r.symmetry, 0.0);
        let zero = ws_acoustics::SMatrix { data: s.data.map(|_| C64::new(0.0, 0.0)), ..s.clone() };
        let q = q_matrix(&s, &zero).unwrap();
        assert_eq!(q.data.norm(), 0.0);
    }
}

#[test]
fn mie_smatrix_quality() {
    let set = ModeSet::spherical(4, 1.0);
    let s = mie_smatrix(3, SoundSoft, 1.0, 1.0, &set).unwrap();
    let r = validate_smatrix(&s, 1e-13);
    assert!(r.pass, "{r:?}");
    for (dim, set) in [(3, ModeSet::spherical(6, 1.3)), (2, ModeSet::cylindrical(10, 1.3))] {
        for bc in [SoundSoft, SoundHard] {
            let s = mie_smatrix(dim, bc, 1.3, 2.1, &set).unwrap();
            let r = validate_smatrix(&s, 1e-12);
            assert!(r.pass, "dim={dim} {bc:?} {r:?}");
            for j in 0..s.dim() {
                let nz = (0..s.dim()).filter(|&i| s.data[(i, j)].norm() > 0.0).count();
                assert_eq!(nz, 1);
            }
        }
    }
    assert!(matches!(mie_smatrix(2, SoundSoft, 1.0, 1.0, &set), Err(WsError::Contract(_))));
}

#[test]
fn soft_total_field_vanishes_on_surface() {
    for (dim, set, a) in [(3, ModeSet::spherical(4, 1.0), 1.0), (2, ModeSet::cylindrical(6, 1.0), 2.0)] {
        let s = mie_smatrix(dim, SoundSoft, 1.0, a, &set).unwrap();
        for p in 0..set.len() {
            for &(t, ph) in &[(0.4, 1.1), (2.0, 4.0)] {
                let pt = if dim == 3 { sphere_point(a, t, ph) } else { vec![a * ph.cos(), a * ph.sin()] };
                let v = total_field(&s, p, &pt);
                let scale = incoming_wave(set.modes[p], 1.0, &pt).unwrap().norm();
                assert!(v.norm() < 1e-10 * scale.max(1.0), "dim={dim} p={p}: {}", v.norm());
            }
        }
    }
}

#[test]
fn hard_total_field_has_zero_normal_derivative() {
    let h = 1e-5;
    for (dim, set, a) in [(3, ModeSet::spherical(3, 1.0), 1.0), (2, ModeSet::cylindrical(5, 1.0), 2.0)] {
        let s = mie_smatrix(dim, SoundHard, 1.0, a, &set).unwrap();
        for p in 0..set.len() {
            let (t, ph) = (0.9, 2.3);
            let at = |r: f64| {
                let pt = if dim == 3 { sphere_point(r, t, ph) } else { vec![r * ph.cos(), r * ph.sin()] };
                total_field(&s, p, &pt)
            };
            let dr = (at(a + h) - at(a - h)) / (2.0 * h);
            let scale = at(a).norm().max(1e-3);
            assert!(dr.norm() < 1e-7 * scale.max(1.0), "dim={dim} p={p}: {}", dr.norm());
        }
    }
}

#[test]
fn soft_monopole_delay_is_minus_two_a() {
    for ka in [0.3, 1.0, 2.0, 7.5] {
        let d = modal_delay(3, SoundSoft, 0, ka, 1.0).unwrap();
        assert!((d + 2.0).abs() < 1e-12, "ka={ka}: {d}");
        let d = modal_delay(3, SoundSoft, 0, ka / 2.0, 2.0).unwrap();
        assert!((d + 4.0).abs() < 1e-12);
    }
}

#[test]
fn derivative_matches_finite_difference() {
    let set = ModeSet::spherical(3, 2.0);
    let (k, a, dk) = (2.0, 1.0, 1e-5);
    let d = mie_smatrix_deriv(3, SoundSoft, k, a, &set).unwrap();
    let fd = (mie_smatrix(3, SoundSoft, k + dk, a, &set).unwrap().data - mie_smatrix(3, SoundSoft, k - dk, a, &set).unwrap().data)
        / C64::from(2.0 * dk);
    assert!((&d.data - &fd).norm() / d.data.norm() < 1e-8);

    let set = ModeSet::cylindrical(5, 4.0);
    let d = mie_smatrix_deriv(2, SoundHard, 4.0, 1.0, &set).unwrap();
    let fd = (mie_smatrix(2, SoundHard, 4.0 + dk, 1.0, &set).unwrap().data - mie_smatrix(2, SoundHard, 4.0 - dk, 1.0, &set).unwrap().data)
        / C64::from(2.0 * dk);
    let i = set.index_of(ModeIndex::Cyl { n: 3 }).unwrap();
    let (t, _) = set.conjugate_index(i);
    let (an, num) = (d.data[(t, i)], fd[(t, i)]);
    assert!((an - num).norm() / an.norm() < 1e-7);
}

#[test]
fn q_is_diagonal_with_per_order_delays() {
    for (dim, set) in [(3, ModeSet::spherical(6, 1.0)), (2, ModeSet::cylindrical(8, 1.0))] {
        for bc in [SoundSoft, SoundHard] {
            let s = mie_smatrix(dim, bc, 1.0, 2.0, &set).unwrap();
            let sp = mie_smatrix_deriv(dim, bc, 1.0, 2.0, &set).unwrap();
            let q = q_matrix(&s, &sp).unwrap();
            assert!(q.hermiticity_residual < 1e-12);
            for (i, p) in set.modes.iter().enumerate() {
                let order = match *p {
                    ModeIndex::Sph { l, .. } => l as i32,
                    ModeIndex::Cyl { n } => n,
                };
                let tau = modal_delay(dim, bc, order, 1.0, 2.0).unwrap();
                assert!((q.data[(i, i)].re - tau).abs() < 1e-12 * tau.abs().max(1.0));
                assert!(q.data[(i, i)].im.abs() < 1e-15);
                for j in 0..set.len() {
                    if j != i {
                        assert!(q.data[(i, j)].norm() < 1e-13);
                    }
                }
            }
        }
    }
}

#[test]
fn high_order_delays_vanish() {
    let mut last = f64::INFINITY;
    for l in [5, 10, 20, 30] {
        let t = modal_delay(3, SoundSoft, l, 2.0, 1.0).unwrap().abs();
        assert!(t < last);
        last = t;
    }
    assert!(last < 1e-20);
}
