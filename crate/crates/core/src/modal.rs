//! Port basis: spherical harmonics in 3D, angular exponentials in 2D.

use crate::error::{domain, Result, WsError};
use crate::specfun::{cyl_bessel, sph_bessel, sph_harm, BesselKind};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const J: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    /// Spherical pair `(l, m)`.
    Sph { l: usize, m: i32 },
    /// Cylindrical order `n`.
    Cyl { n: i32 },
}

impl ModeIndex {
    pub fn dim(&self) -> usize {
        match self {
            ModeIndex::Sph { .. } => 3,
            ModeIndex::Cyl { .. } => 2,
        }
    }

    /// Degree `l` in 3D, `|n|` in 2D.
    pub fn order(&self) -> usize {
        match *self {
            ModeIndex::Sph { l, .. } => l,
            ModeIndex::Cyl { n } => n.unsigned_abs() as usize,
        }
    }
}

/// Conjugate port `p̃` and the sign with `X_p* = sign · X_p̃`.
pub fn conjugate_mode(p: ModeIndex) -> (ModeIndex, f64) {
    match p {
        ModeIndex::Sph { l, m } => (ModeIndex::Sph { l, m: -m }, parity(m)),
        ModeIndex::Cyl { n } => (ModeIndex::Cyl { n: -n }, 1.0),
    }
}

pub(crate) fn parity(m: i32) -> f64 {
    if m.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Ordered list of ports at a wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub dim: usize,
    pub modes: Vec<ModeIndex>,
    pub k: f64,
    /// Basis origin, always the coordinate origin; recorded for reports.
    pub origin: [f64; 3],
}

impl ModeSet {
    /// All `(l, m)` with `l ≤ lmax`, ordered by `l` then ascending `m`.
    pub fn spherical(lmax: usize, k: f64) -> Self {
        let modes = (0..=lmax)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| ModeIndex::Sph { l, m }))
            .collect();
        ModeSet { dim: 3, modes, k, origin: [0.0; 3] }
    }

    /// Orders `-nmax..=nmax` listed as `0, -1, 1, -2, 2, ...`.
    pub fn cylindrical(nmax: usize, k: f64) -> Self {
        let mut modes = vec![ModeIndex::Cyl { n: 0 }];
        for n in 1..=nmax as i32 {
            modes.push(ModeIndex::Cyl { n: -n });
            modes.push(ModeIndex::Cyl { n });
        }
        ModeSet { dim: 2, modes, k, origin: [0.0; 3] }
    }

    /// Cylindrical set with `m` (odd) ports.
    pub fn cylindrical_count(m: usize, k: f64) -> Result<Self> {
        if m.is_multiple_of(2) {
            return domain(format!("2D mode count must be odd, got {m}"));
        }
        Ok(Self::cylindrical((m - 1) / 2, k))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn with_k(&self, k: f64) -> Self {
        ModeSet { k, ..self.clone() }
    }

    /// Position of `p` in this set.
    pub fn index_of(&self, p: ModeIndex) -> Option<usize> {
        let i = match p {
            ModeIndex::Sph { l, m } => {
                if m.unsigned_abs() as usize > l {
                    return None;
                }
                (l * l) as i64 + l as i64 + m as i64
            }
            ModeIndex::Cyl { n } => {
                if n <= 0 {
                    2 * (-n) as i64 - i64::from(n != 0)
                } else {
                    2 * n as i64
                }
            }
        } as usize;
        (self.modes.get(i) == Some(&p)).then_some(i)
    }

    /// Index of the conjugate port of mode `i`, with its sign.
    pub fn conjugate_index(&self, i: usize) -> (usize, f64) {
        let (pt, s) = conjugate_mode(self.modes[i]);
        (self.index_of(pt).expect("mode sets are closed under conjugation"), s)
    }

    /// CSV text `index,l,m` (3D) or `index,n` (2D).
    pub fn to_csv(&self) -> String {
        let mut s = String::from(if self.dim == 3 { "index,l,m\n" } else { "index,n\n" });
        for (i, p) in self.modes.iter().enumerate() {
            match p {
                ModeIndex::Sph { l, m } => s.push_str(&format!("{i},{l},{m}\n")),
                ModeIndex::Cyl { n } => s.push_str(&format!("{i},{n}\n")),
            }
        }
        s
    }
}

/// Mode count from `l_max = ka + c (ka)^{1/3}`.
pub fn suggested_mode_count(dim: usize, k: f64, a: f64, c: f64) -> Result<usize> {
    if !(k > 0.0) || !(a > 0.0) {
        return domain("k and a must be positive");
    }
    if !(2.0..=4.0).contains(&c) {
        return domain(format!("c must lie in [2, 4], got {c}"));
    }
    let ka = k * a;
    let lmax = (ka + c * ka.cbrt()).ceil() as usize;
    match dim {
        3 => Ok((lmax + 1).pow(2)),
        2 => Ok(2 * lmax + 1),
        _ => domain(format!("dimension must be 2 or 3, got {dim}")),
    }
}

/// Amplitude constant `γ_n` of the 2D incoming wave.
pub fn gamma2d(n: i32, k: f64) -> C64 {
    C64::from_polar((PI * k / 2.0).sqrt(), n as f64 * PI / 2.0 + PI / 4.0)
}

fn polar3(point: &[f64]) -> (f64, f64, f64) {
    let (x, y, z) = (point[0], point[1], point[2]);
    let r = (x * x + y * y + z * z).sqrt();
    let theta = if r > 0.0 { (z / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
    (r, theta, y.atan2(x).rem_euclid(2.0 * PI))
}

fn polar2(point: &[f64]) -> (f64, f64) {
    ((point[0] * point[0] + point[1] * point[1]).sqrt(), point[1].atan2(point[0]))
}

fn check_point(p: ModeIndex, point: &[f64]) -> Result<()> {
    if point.len() != p.dim() {
        return Err(WsError::Contract(format!(
            "point has {} coordinates, mode is {}D",
            point.len(),
            p.dim()
        )));
    }
    Ok(())
}

/// `j^{l+1}` as a complex number.
pub(crate) fn jpow(e: i64) -> C64 {
    match e.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => J,
        2 => C64::new(-1.0, 0.0),
        _ => -J,
    }
}

fn radial_wave(p: ModeIndex, k: f64, point: &[f64], kind: BesselKind) -> Result<C64> {
    check_point(p, point)?;
    match p {
        ModeIndex::Sph { l, m } => {
            let (r, th, ph) = polar3(point);
            if r == 0.0 {
                return domain("field evaluated at the origin");
            }
            Ok(jpow(l as i64 + 1) * k * sph_bessel(kind, l, k * r)? * sph_harm(l, m, th, ph)?)
        }
        ModeIndex::Cyl { n } => {
            let (r, th) = polar2(point);
            if r == 0.0 {
                return domain("field evaluated at the origin");
            }
            let ang = C64::from_polar(1.0 / (2.0 * PI).sqrt(), n as f64 * th);
            Ok(gamma2d(n, k) * cyl_bessel(kind, n, k * r)? * ang)
        }
    }
}

/// Unit-power incoming wave of port `p`, far-field limit `X_p e^{jkr}/r`
/// (3D) or `e^{jnθ}/√(2π) e^{jkr}/√r` (2D).
pub fn incoming_wave(p: ModeIndex, k: f64, point: &[f64]) -> Result<C64> {
    radial_wave(p, k, point, BesselKind::Hankel1)
}

/// Exact outgoing partner of [`incoming_wave`] (conjugate radial kind), with
/// far-field limit `(-1)^{l+1} X_p e^{-jkr}/r` in 3D.
pub fn outgoing_wave(p: ModeIndex, k: f64, point: &[f64]) -> Result<C64> {
    radial_wave(p, k, point, BesselKind::Hankel2)
}

/// Regular free field `½(incoming + outgoing)`.
pub fn regular_wave(p: ModeIndex, k: f64, point: &[f64]) -> Result<C64> {
    radial_wave(p, k, point, BesselKind::RegularJ)
}

/// Far-zone outgoing basis `X_m* e^{-jkr}/r` or `e^{-jnθ}/√(2π) e^{-jkr}/√r`.
pub fn outgoing_template(m: ModeIndex, k: f64, point: &[f64]) -> Result<C64> {
    check_point(m, point)?;
    match m {
        ModeIndex::Sph { l, m } => {
            let (r, th, ph) = polar3(point);
            if k * r < 50.0 {
                return domain(format!("outgoing template needs kr >= 50, got {}", k * r));
            }
            Ok(sph_harm(l, m, th, ph)?.conj() * C64::from_polar(1.0 / r, -k * r))
        }
        ModeIndex::Cyl { n } => {
            let (r, th) = polar2(point);
            if k * r < 50.0 {
                return domain(format!("outgoing template needs kr >= 50, got {}", k * r));
            }
            Ok(C64::from_polar(1.0 / (2.0 * PI * r).sqrt(), -(n as f64) * th - k * r))
        }
    }
}
