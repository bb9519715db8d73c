//! Bessel, Hankel and spherical-harmonic functions on the positive real axis.
//!
//! Time convention is `e^{jωt}`: `H^(1)` carries incoming waves `e^{+jkr}`,
//! `H^(2)` outgoing ones.

use crate::error::{domain, Result, WsError};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Largest cylindrical order accepted by [`cyl_bessel`].
pub const CYL_ORDER_CEILING: i32 = 200;
/// Largest spherical degree accepted by [`sph_bessel`].
pub const SPH_DEGREE_CEILING: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    RegularJ,
    Hankel1,
    Hankel2,
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("argument must be positive and finite, got {x}"));
    }
    Ok(())
}

/// Integer-order cylindrical Bessel / Hankel function.
pub fn cyl_bessel(kind: BesselKind, n: i32, x: f64) -> Result<C64> {
    check_arg(x)?;
    if n.abs() > CYL_ORDER_CEILING {
        return Err(WsError::Capacity(format!("order {n} exceeds {CYL_ORDER_CEILING}")));
    }
    let m = n.abs();
    let sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let j = libm::jn(m, x);
    let v = match kind {
        BesselKind::RegularJ => C64::new(j, 0.0),
        BesselKind::Hankel1 | BesselKind::Hankel2 => {
            let y = libm::yn(m, x);
            if !y.is_finite() {
                return Err(WsError::Capacity(format!("Y_{m}({x}) overflows")));
            }
            if kind == BesselKind::Hankel1 {
                C64::new(j, y)
            } else {
                C64::new(j, -y)
            }
        }
    };
    Ok(v * sign)
}

/// Derivative in `x` of [`cyl_bessel`], from `f_n' = (f_{n-1} - f_{n+1})/2`.
pub fn cyl_bessel_dx(kind: BesselKind, n: i32, x: f64) -> Result<C64> {
    Ok((cyl_bessel(kind, n - 1, x)? - cyl_bessel(kind, n + 1, x)?) * 0.5)
}

/// `j_0..=j_lmax` by downward (Miller) recurrence.
pub fn sph_j_all(lmax: usize, x: f64) -> Vec<f64> {
    let want = lmax;
    let lmax = lmax.max(1);
    let mut out = vec![0.0; lmax + 1];
    let top = lmax.max(x as usize) + 20 + (40.0 * (lmax as f64).max(x)).sqrt() as usize;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    for n in (0..=top).rev() {
        if n <= lmax {
            out[n] = j;
        }
        if n == 0 {
            break;
        }
        let jm1 = (2 * n + 1) as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // rescale to stay within range
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // normalize against whichever closed form is better conditioned
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() >= j1.abs() {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    out.iter_mut().for_each(|v| *v *= scale);
    out.truncate(want + 1);
    out
}

/// `j_0..=j_lmax` by upward recurrence. Stable only for `l ≲ x`; kept as a
/// cross-check of [`sph_j_all`].
pub fn sph_j_all_upward(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    out[0] = x.sin() / x;
    if lmax >= 1 {
        out[1] = x.sin() / (x * x) - x.cos() / x;
    }
    for n in 1..lmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    out
}

/// `y_0..=y_lmax` by upward recurrence.
pub fn sph_y_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    out[0] = -x.cos() / x;
    if lmax >= 1 {
        out[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for n in 1..lmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    out
}

fn sph_check(l: usize, x: f64) -> Result<()> {
    check_arg(x)?;
    if l > SPH_DEGREE_CEILING {
        return Err(WsError::Capacity(format!("degree {l} exceeds {SPH_DEGREE_CEILING}")));
    }
    Ok(())
}

/// Values of the chosen spherical function for degrees `0..=lmax`.
pub fn sph_bessel_all(kind: BesselKind, lmax: usize, x: f64) -> Result<Vec<C64>> {
    sph_check(lmax, x)?;
    let j = sph_j_all(lmax, x);
    if kind == BesselKind::RegularJ {
        return Ok(j.into_iter().map(|v| C64::new(v, 0.0)).collect());
    }
    let y = sph_y_all(lmax, x);
    if !y[lmax].is_finite() {
        return Err(WsError::Capacity(format!("y_{lmax}({x}) overflows")));
    }
    let s = if kind == BesselKind::Hankel1 { 1.0 } else { -1.0 };
    Ok(j.iter().zip(&y).map(|(&a, &b)| C64::new(a, s * b)).collect())
}

/// Spherical Bessel `j_l`, or spherical Hankel `h_l^(1)`, `h_l^(2)`.
pub fn sph_bessel(kind: BesselKind, l: usize, x: f64) -> Result<C64> {
    Ok(sph_bessel_all(kind, l, x)?[l])
}

/// `d/dx` of [`sph_bessel`] via `f_l' = f_{l-1} - (l+1)/x f_l` (`f_0' = -f_1`).
pub fn sph_bessel_dx(kind: BesselKind, l: usize, x: f64) -> Result<C64> {
    let f = sph_bessel_all(kind, l + 1, x)?;
    Ok(if l == 0 {
        -f[1]
    } else {
        f[l - 1] - f[l] * ((l + 1) as f64 / x)
    })
}

/// Fully normalized associated Legendre values without the Condon-Shortley
/// phase, `P̃_l^m(cos θ)` for `l = m..=lmax` at fixed `m ≥ 0`.
fn norm_legendre_column(lmax: usize, m: usize, theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for i in 1..=m {
        pmm *= ((2 * i + 1) as f64 / (2 * i) as f64).sqrt() * s;
    }
    let mut out = vec![0.0; lmax + 1];
    if m > lmax {
        return out;
    }
    out[m] = pmm;
    if m < lmax {
        out[m + 1] = ((2 * m + 3) as f64).sqrt() * c * pmm;
    }
    for l in (m + 2)..=lmax {
        let (lf, mf) = (l as f64, m as f64);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        out[l] = a * (c * out[l - 1] - b * out[l - 2]);
    }
    out
}

/// Orthonormal spherical harmonic `X_lm(θ, φ)` with the Condon-Shortley phase.
pub fn sph_harm(l: usize, m: i32, theta: f64, phi: f64) -> Result<C64> {
    if m.unsigned_abs() as usize > l {
        return domain(format!("|m|={} exceeds l={l}", m.abs()));
    }
    let ma = m.unsigned_abs() as usize;
    let p = norm_legendre_column(l, ma, theta)[l];
    let cs = if ma % 2 == 1 { -1.0 } else { 1.0 };
    let pos = C64::from_polar(cs * p, ma as f64 * phi);
    Ok(if m >= 0 { pos } else { pos.conj() * cs })
}
