//! Renormalized volume-integral forms of the time delay matrix for the
//! sphere, plus the closed-form surface integrals they rest on.
//!
//! For a sphere the angular integrals collapse by orthonormality, so every
//! entry reduces to a radial integral of an energy-like density over
//! `[a, R]`, minus the matching free-field integral. Beyond `R` the
//! difference between true and free-field densities is integrated in closed
//! form: spherical Hankel functions are finite sums `e^{±jkr} Σ c_n r^{-n}`,
//! and oscillatory tails follow from an asymptotic series.

use crate::error::{domain, Result, WsError};
use crate::mie::{mie_smatrix, mie_smatrix_deriv, modal_reflection, BoundaryCondition};
use crate::modal::{jpow, parity, ModeIndex, ModeSet};
use crate::quad::composite;
use crate::specfun::{sph_bessel_all, sph_harm, BesselKind};
use crate::wigner_smith::{CMat, Provenance, QMatrix, SMatrix};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const J: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeStyle {
    Symmetric,
    A,
    B,
}

impl VolumeStyle {
    pub fn as_str(&self) -> &'static str {
        match self {
            VolumeStyle::Symmetric => "symmetric",
            VolumeStyle::A => "a",
            VolumeStyle::B => "b",
        }
    }
}

/// Radial quadrature settings: 16-point Gauss panels, `nodes_per_wavelength`
/// nodes per wavelength, outer radius `r_outer`.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub r_outer: f64,
    pub nodes_per_wavelength: f64,
    pub gauss_points: usize,
}

impl QuadratureSpec {
    /// Default density: one 16-point panel per wavelength.
    pub fn new(r_outer: f64) -> Self {
        QuadratureSpec { r_outer, nodes_per_wavelength: 16.0, gauss_points: 16 }
    }

    pub fn with_density(mut self, nodes_per_wavelength: f64) -> Self {
        self.nodes_per_wavelength = nodes_per_wavelength;
        self
    }

    fn validate(&self, k: f64, a: f64) -> Result<()> {
        if k * self.r_outer < 50.0 {
            return domain(format!("kR must be at least 50, got {}", k * self.r_outer));
        }
        if self.r_outer < 3.0 * a {
            return domain("outer radius must be at least 3a");
        }
        if !(self.nodes_per_wavelength > 0.0) {
            return domain("radial density must be positive");
        }
        Ok(())
    }

    fn nodes(&self, k: f64, r0: f64, r1: f64) -> Vec<(f64, f64)> {
        let lambda = 2.0 * PI / k;
        let n = self.gauss_points;
        let panels = (((r1 - r0) * self.nodes_per_wavelength / (n as f64 * lambda)).ceil() as usize).max(1);
        composite(r0, r1, panels, n)
    }
}

/// Radial factor of the total field of one excitation on the sphere problem,
/// `c1 h_l^(1)(kr) + c2 h_l^(2)(kr)`.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    pub l: usize,
    pub c1: C64,
    pub c2: C64,
    pub a: f64,
    pub k: f64,
    pub bc: BoundaryCondition,
}

impl RadialProfile {
    pub fn new(l: usize, bc: BoundaryCondition, k: f64, a: f64) -> Result<Self> {
        let alpha = modal_reflection(3, bc, l as i32, k * a)?;
        let c1 = jpow(l as i64 + 1) * k;
        Ok(RadialProfile { l, c1, c2: c1 * alpha, a, k, bc })
    }

    /// Field and radial derivative at `r`.
    pub fn eval(&self, r: f64) -> Result<(C64, C64)> {
        let x = self.k * r;
        let h1 = sph_bessel_all(BesselKind::Hankel1, self.l + 1, x)?;
        let h2 = sph_bessel_all(BesselKind::Hankel2, self.l + 1, x)?;
        let d = |h: &[C64]| {
            if self.l == 0 {
                -h[1]
            } else {
                h[self.l - 1] - h[self.l] * ((self.l + 1) as f64 / x)
            }
        };
        let f = self.c1 * h1[self.l] + self.c2 * h2[self.l];
        let fp = (self.c1 * d(&h1) + self.c2 * d(&h2)) * self.k;
        Ok((f, fp))
    }

    /// Boundary-condition residual at `r = a`, relative to the incoming part.
    pub fn boundary_residual(&self) -> Result<f64> {
        let (f, fp) = self.eval(self.a)?;
        let x = self.k * self.a;
        let h1 = sph_bessel_all(BesselKind::Hankel1, self.l + 1, x)?;
        let scale = (self.c1 * h1[self.l]).norm();
        Ok(match self.bc {
            BoundaryCondition::SoundSoft => f.norm() / scale,
            BoundaryCondition::SoundHard => fp.norm() / (self.k * scale),
        })
    }

    /// Exact expansion `e^{jkr} Σ P_n r^{-n} + e^{-jkr} Σ Q_n r^{-n}`.
    fn wave(&self) -> Wave {
        let l = self.l;
        let mut plus = vec![ZERO; l + 2];
        let mut minus = vec![ZERO; l + 2];
        let mut a_n = 1.0; // (l+n)! / ((l-n)! n! 2^n)
        for n in 0..=l {
            if n > 0 {
                a_n *= ((l + n) * (l - n + 1)) as f64 / (2 * n) as f64;
            }
            let kn = self.k.powi(-(n as i32 + 1));
            plus[n + 1] = self.c1 * jpow(-(l as i64) - 1) * jpow(n as i64) * (a_n * kn);
            minus[n + 1] = self.c2 * jpow(l as i64 + 1) * jpow(-(n as i64)) * (a_n * kn);
        }
        Wave { k: self.k, plus, minus }
    }

    /// The free-field (leading-order) counterpart of [`Self::wave`].
    fn wave_infinity(&self) -> Wave {
        let w = self.wave();
        let mut plus = vec![ZERO; 2];
        let mut minus = vec![ZERO; 2];
        plus[1] = w.plus[1];
        minus[1] = w.minus[1];
        Wave { k: self.k, plus, minus }
    }
}

/// `e^{jkr} Σ plus[n] r^{-n} + e^{-jkr} Σ minus[n] r^{-n}`.
#[derive(Debug, Clone)]
struct Wave {
    k: f64,
    plus: Vec<C64>,
    minus: Vec<C64>,
}

impl Wave {
    fn deriv(&self) -> Wave {
        let d = |c: &[C64], s: f64| {
            let mut out = vec![ZERO; c.len() + 1];
            for (n, &v) in c.iter().enumerate() {
                out[n] += v * J * (s * self.k);
                out[n + 1] -= v * n as f64;
            }
            out
        };
        Wave { k: self.k, plus: d(&self.plus, 1.0), minus: d(&self.minus, -1.0) }
    }

    /// `self · conj(other)`.
    fn times_conj(&self, other: &Wave) -> Density {
        let conv = |a: &[C64], b: &[C64]| {
            let mut out = vec![ZERO; a.len() + b.len()];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] += x * y.conj();
                }
            }
            out
        };
        let zero = add(&conv(&self.plus, &other.plus), &conv(&self.minus, &other.minus));
        Density { k: self.k, zero, p2: conv(&self.plus, &other.minus), m2: conv(&self.minus, &other.plus) }
    }
}

fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

/// `Σ zero[n] r^{-n} + e^{2jkr} Σ p2[n] r^{-n} + e^{-2jkr} Σ m2[n] r^{-n}`.
#[derive(Debug, Clone)]
struct Density {
    k: f64,
    zero: Vec<C64>,
    p2: Vec<C64>,
    m2: Vec<C64>,
}

impl Density {
    fn lin(&self, s: f64, other: &Density, t: f64) -> Density {
        let f = |a: &[C64], b: &[C64]| {
            let a: Vec<C64> = a.iter().map(|v| v * s).collect();
            let b: Vec<C64> = b.iter().map(|v| v * t).collect();
            add(&a, &b)
        };
        Density { k: self.k, zero: f(&self.zero, &other.zero), p2: f(&self.p2, &other.p2), m2: f(&self.m2, &other.m2) }
    }

    /// Multiply by `r²` (the two leading coefficients are structurally zero).
    fn times_r2(&self) -> Density {
        let sh = |c: &[C64]| c.iter().skip(2).copied().collect::<Vec<_>>();
        Density { k: self.k, zero: sh(&self.zero), p2: sh(&self.p2), m2: sh(&self.m2) }
    }

    fn add_const(mut self, c: f64) -> Density {
        if self.zero.is_empty() {
            self.zero.push(ZERO);
        }
        self.zero[0] += c;
        self
    }

    /// `∫_R^∞`; non-oscillatory `r^0`, `r^{-1}` terms must vanish.
    fn tail(&self, r: f64) -> Result<C64> {
        let scale = self.zero.iter().chain(&self.p2).chain(&self.m2).map(|z| z.norm()).fold(1.0, f64::max);
        let mut total = ZERO;
        for (n, &c) in self.zero.iter().enumerate() {
            if n < 2 {
                if c.norm() > 1e-10 * scale {
                    return Err(WsError::Accuracy(format!("divergent r^-{n} tail term {c}")));
                }
                continue;
            }
            total += c * r.powi(1 - n as i32) / (n - 1) as f64;
        }
        for (n, &c) in self.p2.iter().enumerate() {
            total += c * osc_tail(n, 2.0 * self.k, r)?;
        }
        for (n, &c) in self.m2.iter().enumerate() {
            total += c * osc_tail(n, -2.0 * self.k, r)?;
        }
        Ok(total)
    }
}

/// `∫_R^∞ e^{jβr} r^{-n} dr` (Abel-regularized for `n = 0`).
fn osc_tail(n: usize, beta: f64, r: f64) -> Result<C64> {
    if (beta * r).abs() < 50.0 {
        return Err(WsError::Accuracy(format!("tail series needs |βR| >= 50, got {}", beta * r)));
    }
    let jb = J * beta;
    let mut term = C64::from(r.powi(-(n as i32)));
    let mut sum = ZERO;
    for m in 0..200 {
        sum += term;
        let next = term * ((n + m) as f64) / (jb * r);
        if next.norm() < 1e-18 * sum.norm() || next.norm() == 0.0 {
            return Ok(-C64::from_polar(1.0, beta * r) / jb * sum);
        }
        if next.norm() > term.norm() {
            return Err(WsError::Accuracy("oscillatory tail series diverged".into()));
        }
        term = next;
    }
    Err(WsError::Accuracy("oscillatory tail series did not converge".into()))
}

/// Energy-like radial densities for one style, for the true field and its
/// free-field counterpart.
fn style_density(w: &Wave, l: usize, style: VolumeStyle) -> Density {
    let k = w.k;
    let a = w.times_conj(w).times_r2();
    let d = w.deriv();
    let lf = (l * (l + 1)) as f64;
    let grad = d.times_conj(&d).times_r2().lin(1.0 / (k * k), &w.times_conj(w), lf / (k * k));
    match style {
        VolumeStyle::A => a,
        VolumeStyle::B => grad,
        VolumeStyle::Symmetric => a.lin(0.5, &grad, 0.5),
    }
}

fn style_value(f: C64, fp: C64, r: f64, l: usize, k: f64, style: VolumeStyle) -> f64 {
    let lf = (l * (l + 1)) as f64;
    let a = f.norm_sqr() * r * r;
    let b = (fp.norm_sqr() * r * r + lf * f.norm_sqr()) / (k * k);
    match style {
        VolumeStyle::A => a,
        VolumeStyle::B => b,
        VolumeStyle::Symmetric => 0.5 * (a + b),
    }
}

/// Free-field normalizer of the symmetric style, anchored at infinity:
/// `2R − ∫_R^∞ (F_∞ − 2)`.
fn normalizer_symmetric(prof: &RadialProfile, r: f64) -> Result<f64> {
    let f = style_density(&prof.wave_infinity(), prof.l, VolumeStyle::Symmetric).add_const(-2.0);
    Ok(2.0 * r - f.tail(r)?.re)
}

/// Literal free-field integral of style a over `[0, R]`.
fn normalizer_a(prof: &RadialProfile, r: f64) -> f64 {
    let w = prof.wave_infinity();
    let (p, q) = (w.plus[1], w.minus[1]);
    let k = prof.k;
    let osc = p * q.conj() * (C64::from_polar(1.0, 2.0 * k * r) - 1.0) / (J * k);
    (p.norm_sqr() + q.norm_sqr()) * r + osc.re
}

fn sph_lm(p: ModeIndex) -> Result<(usize, i32)> {
    match p {
        ModeIndex::Sph { l, m } => Ok((l, m)),
        _ => Err(WsError::Contract("volume formulations are implemented for the sphere only".into())),
    }
}

/// One entry `Q_qp` of the renormalized volume-integral time delay matrix.
pub fn q_entry_volume(
    style: VolumeStyle,
    p: ModeIndex,
    q: ModeIndex,
    bc: BoundaryCondition,
    k: f64,
    a: f64,
    quad: &QuadratureSpec,
) -> Result<C64> {
    let (l, m) = sph_lm(p)?;
    sph_lm(q)?;
    quad.validate(k, a)?;
    if p != q {
        return Ok(ZERO);
    }
    let prof = RadialProfile::new(l, bc, k, a)?;
    let r = quad.r_outer;
    let mut inner = 0.0;
    for (x, wt) in quad.nodes(k, a, r) {
        let (f, fp) = prof.eval(x)?;
        inner += wt * style_value(f, fp, x, l, k, style);
    }
    let dens_true = style_density(&prof.wave(), l, style);
    let dens_inf = style_density(&prof.wave_infinity(), l, style);
    let tail = dens_true.lin(1.0, &dens_inf, -1.0).tail(r)?.re;

    // S-dependent correction of the alternative styles
    let modes = ModeSet::spherical(l, k);
    let s = mie_smatrix(3, bc, k, a, &modes)?;
    let ip = modes.index_of(p).expect("p in set");
    let ipt = modes.index_of(ModeIndex::Sph { l, m: -m }).expect("p~ in set");
    let iq = ip;
    let sg = parity(m);
    let corr = -(J / (2.0 * k)) * sg * s.data[(iq, ipt)] + (J / (2.0 * k)) * sg * s.data[(ipt, iq)].conj();

    let value = match style {
        VolumeStyle::Symmetric => C64::from(inner + tail - normalizer_symmetric(&prof, r)?),
        VolumeStyle::A => C64::from(inner + tail - normalizer_a(&prof, r)) + corr,
        VolumeStyle::B => {
            let norm_b = 2.0 * normalizer_symmetric(&prof, r)? - normalizer_a(&prof, r);
            C64::from(inner + tail - norm_b) - corr
        }
    };
    Ok(value)
}

/// Full volume-integral `Q` on a spherical mode set.
pub fn q_matrix_volume(
    style: VolumeStyle,
    bc: BoundaryCondition,
    k: f64,
    a: f64,
    modes: &ModeSet,
    quad: &QuadratureSpec,
) -> Result<QMatrix> {
    let n = modes.len();
    let mut data = CMat::zeros(n, n);
    // entries are diagonal and depend on l only
    let mut cache: Vec<Option<C64>> = Vec::new();
    for (i, &p) in modes.modes.iter().enumerate() {
        let (l, _) = sph_lm(p)?;
        if cache.len() <= l {
            cache.resize(l + 1, None);
        }
        let v = match cache[l] {
            Some(v) => v,
            None => {
                let v = q_entry_volume(style, ModeIndex::Sph { l, m: 0 }, ModeIndex::Sph { l, m: 0 }, bc, k, a, quad)?;
                cache[l] = Some(v);
                v
            }
        };
        data[(i, i)] = v;
    }
    Ok(QMatrix::from_raw(data, k, Provenance::VolumeIntegral))
}

/// Free-field integral of the symmetric style up to `R` for the free-space
/// field, evaluated by quadrature from `r_c = 50/k` plus an analytic anchor
/// at `r_c`; compare with `2R δ_pq`.
pub fn qtilde_infinity(p: ModeIndex, q: ModeIndex, k: f64, quad: &QuadratureSpec) -> Result<f64> {
    let (l, _) = sph_lm(p)?;
    sph_lm(q)?;
    if !(k > 0.0) {
        return domain("k must be positive");
    }
    if k * quad.r_outer < 50.0 {
        return domain(format!("kR must be at least 50, got {}", k * quad.r_outer));
    }
    if p != q {
        return Ok(0.0);
    }
    // free space: c1 = k j^{l+1}, c2 = c1
    let c1 = jpow(l as i64 + 1) * k;
    let prof = RadialProfile { l, c1, c2: c1, a: 0.0, k, bc: BoundaryCondition::SoundSoft };
    let w = prof.wave_infinity();
    let rc = 50.0 / k;
    let mut integral = 0.0;
    if quad.r_outer > rc {
        for (x, wt) in quad.nodes(k, rc, quad.r_outer) {
            let ph = C64::from_polar(1.0, k * x);
            let f = (w.plus[1] * ph + w.minus[1] * ph.conj()) / x;
            let fp = (w.plus[1] * ph * (J * k) - w.minus[1] * ph.conj() * (J * k)) / x - f / x;
            integral += wt * style_value(f, fp, x, l, k, VolumeStyle::Symmetric);
        }
    }
    Ok(integral + normalizer_symmetric(&prof, rc)?)
}

/// Exact free-field normalizer `2R − ∫_R^∞ (F_∞ − 2)` for the free-space
/// field (reference for [`qtilde_infinity`]).
pub fn qtilde_infinity_exact(l: usize, k: f64, r: f64) -> Result<f64> {
    let c1 = jpow(l as i64 + 1) * k;
    let prof = RadialProfile { l, c1, c2: c1, a: 0.0, k, bc: BoundaryCondition::SoundSoft };
    normalizer_symmetric(&prof, r)
}

/// Residuals of the surface-integral identity.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceReport {
    /// `(1/2k)(I₁ − I₂ + I₃)` from the closed forms.
    pub closed_form: C64,
    /// `2R δ + j Σ S* S'`.
    pub rhs: C64,
    /// Direct angular quadrature of the left side.
    pub numeric: C64,
    /// `|closed − rhs|`.
    pub closed_vs_rhs: f64,
    /// `|numeric − closed| / |closed|`.
    pub numeric_vs_closed: f64,
    /// `|numeric − closed|` relative to the renormalized part `|closed − 2R δ|`
    /// (absolute if that vanishes).
    pub numeric_vs_renormalized: f64,
}

struct SurfaceCtx {
    modes: ModeSet,
    s: SMatrix,
    sp: SMatrix,
}

fn surface_ctx(p: ModeIndex, q: ModeIndex, bc: BoundaryCondition, k: f64, a: f64) -> Result<SurfaceCtx> {
    let (lp, _) = sph_lm(p)?;
    let (lq, _) = sph_lm(q)?;
    let modes = ModeSet::spherical(lp.max(lq), k);
    let s = mie_smatrix(3, bc, k, a, &modes)?;
    let sp = mie_smatrix_deriv(3, bc, k, a, &modes)?;
    Ok(SurfaceCtx { modes, s, sp })
}

/// Closed forms `(I₁, I₂, I₃)`.
pub fn surface_integrals_closed(s: &SMatrix, sp: &SMatrix, p: ModeIndex, q: ModeIndex, r: f64) -> Result<[C64; 3]> {
    let (l, m) = sph_lm(p)?;
    let modes = &s.modes;
    let k = s.k;
    let ip = modes.index_of(p).ok_or_else(|| WsError::Contract("p not in mode set".into()))?;
    let iq = modes.index_of(q).ok_or_else(|| WsError::Contract("q not in mode set".into()))?;
    let ipt = modes.index_of(ModeIndex::Sph { l, m: -m }).expect("closed under conjugation");
    let d = if ip == iq { 1.0 } else { 0.0 };
    let sg = parity(m);
    let kr = k * r;
    let e2 = C64::from_polar(1.0, 2.0 * kr);
    let em2 = e2.conj();
    let sum: C64 = (0..modes.len()).map(|n| s.data[(n, iq)].conj() * sp.data[(n, ip)]).sum();
    let s_ptq = s.data[(ipt, iq)].conj();
    let s_qpt = s.data[(iq, ipt)];
    let sp_qp = sp.data[(iq, ip)];
    let i1 = C64::from(2.0 * kr * d) - (J + kr) * e2 * s_ptq * sg - J * k * em2 * sp_qp
        + J * k * sum
        + (J - kr) * em2 * s_qpt * sg;
    let i2 = C64::from(-2.0 * kr * d) - J * k * em2 * sp_qp - em2 * s_qpt * (sg * kr) - e2 * s_ptq * (sg * kr)
        - J * k * sum;
    let i3 = -J * em2 * s_qpt * sg + J * e2 * s_ptq * sg;
    Ok([i1, i2, i3])
}

/// Left side of the surface identity by angular quadrature of the far-field
/// expressions, with exact radial derivatives.
pub fn surface_integral_numeric(s: &SMatrix, sp: &SMatrix, p: ModeIndex, q: ModeIndex, r: f64) -> Result<C64> {
    let modes = &s.modes;
    let k = s.k;
    let ip = modes.index_of(p).ok_or_else(|| WsError::Contract("p not in mode set".into()))?;
    let iq = modes.index_of(q).ok_or_else(|| WsError::Contract("q not in mode set".into()))?;
    let lmax = modes.modes.iter().map(|m| m.order()).max().unwrap_or(0);
    let nt = lmax + 4;
    let np = 2 * lmax + 4;
    let (ct, wt) = crate::quad::gauss_legendre(nt);
    let e = C64::from_polar(1.0, k * r);
    let ec = e.conj();
    let mut total = ZERO;
    for (c, w) in ct.iter().zip(&wt) {
        let theta = c.acos();
        for j in 0..np {
            let phi = 2.0 * PI * j as f64 / np as f64;
            let dw = w * 2.0 * PI / np as f64 * r * r;
            let x: Vec<C64> = modes
                .modes
                .iter()
                .map(|&mi| match mi {
                    ModeIndex::Sph { l, m } => sph_harm(l, m, theta, phi),
                    _ => unreachable!(),
                })
                .collect::<Result<_>>()?;
            let sx = |mat: &SMatrix, col: usize| -> C64 { (0..x.len()).map(|n| mat.data[(n, col)] * x[n].conj()).sum() };
            let (s_p, sp_p) = (sx(s, ip), sx(sp, ip));
            let s_q_conj: C64 = (0..x.len()).map(|n| s.data[(n, iq)].conj() * x[n]).sum();
            let dphi_p = J * x[ip] * e + sp_p * ec / r - J * s_p * ec;
            let dr_dphi_p = -k * x[ip] * e + sp_p * ec * (-J * k / r - 1.0 / (r * r)) - k * s_p * ec;
            let phi_p = x[ip] * e / r + s_p * ec / r;
            let phi_q_c = x[iq].conj() * ec / r + s_q_conj * e / r;
            let dr_phi_q_c =
                x[iq].conj() * ec * (-J * k / r - 1.0 / (r * r)) + s_q_conj * e * (J * k / r - 1.0 / (r * r));
            total += (dphi_p * dr_phi_q_c - phi_q_c * dr_dphi_p + dr_phi_q_c * phi_p / k) * dw;
        }
    }
    Ok(total / (2.0 * k))
}

pub fn surface_identity_check(
    p: ModeIndex,
    q: ModeIndex,
    bc: BoundaryCondition,
    k: f64,
    a: f64,
    r: f64,
) -> Result<SurfaceReport> {
    if k * r < 50.0 {
        return domain(format!("asymptotic regime needs kR >= 50, got {}", k * r));
    }
    let ctx = surface_ctx(p, q, bc, k, a)?;
    let [i1, i2, i3] = surface_integrals_closed(&ctx.s, &ctx.sp, p, q, r)?;
    let closed_form = (i1 - i2 + i3) / (2.0 * k);
    let ip = ctx.modes.index_of(p).unwrap();
    let iq = ctx.modes.index_of(q).unwrap();
    let d = if ip == iq { 2.0 * r } else { 0.0 };
    let sum: C64 = (0..ctx.modes.len()).map(|n| ctx.s.data[(n, iq)].conj() * ctx.sp.data[(n, ip)]).sum();
    let rhs = d + J * sum;
    let numeric = surface_integral_numeric(&ctx.s, &ctx.sp, p, q, r)?;
    let base = (closed_form - d).norm();
    let err = (numeric - closed_form).norm();
    Ok(SurfaceReport {
        closed_form,
        rhs,
        numeric,
        closed_vs_rhs: (closed_form - rhs).norm(),
        numeric_vs_closed: err / closed_form.norm().max(1e-300),
        numeric_vs_renormalized: if base > 0.0 { err / base } else { err },
    })
}

/// Change of `(1/2k)(I₁ − I₂ + I₃) − 2Rδ` between two radii; the
/// oscillatory `e^{±2jkR}` parts must cancel.
pub fn surface_oscillation_residual(
    p: ModeIndex,
    q: ModeIndex,
    bc: BoundaryCondition,
    k: f64,
    a: f64,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    let ctx = surface_ctx(p, q, bc, k, a)?;
    let d = if p == q { 2.0 } else { 0.0 };
    let f = |r: f64| -> Result<C64> {
        let [i1, i2, i3] = surface_integrals_closed(&ctx.s, &ctx.sp, p, q, r)?;
        Ok((i1 - i2 + i3) / (2.0 * k) - d * r)
    };
    Ok((f(r1)? - f(r2)?).norm())
}

/// Largest `|numeric − closed|` over `samples` radii spread across half a
/// wavelength above `r`. The pointwise error oscillates like
/// `cos(2kR)/kR`, so its envelope is the quantity that decays as `O(1/kR)`.
pub fn surface_quadrature_envelope(
    p: ModeIndex,
    q: ModeIndex,
    bc: BoundaryCondition,
    k: f64,
    a: f64,
    r: f64,
    samples: usize,
) -> Result<f64> {
    let ctx = surface_ctx(p, q, bc, k, a)?;
    let mut worst: f64 = 0.0;
    for i in 0..samples.max(1) {
        let ri = r + PI / k * i as f64 / samples.max(1) as f64;
        let [i1, i2, i3] = surface_integrals_closed(&ctx.s, &ctx.sp, p, q, ri)?;
        let closed = (i1 - i2 + i3) / (2.0 * k);
        let num = surface_integral_numeric(&ctx.s, &ctx.sp, p, q, ri)?;
        worst = worst.max((num - closed).norm());
    }
    Ok(worst)
}
