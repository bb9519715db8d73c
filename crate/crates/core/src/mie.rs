//! Closed-form S-matrices for the centered sphere (3D) and circular
//! cylinder (2D), with analytic `k`-derivatives.

use crate::error::{domain, Result, WsError};
use crate::modal::{jpow, parity, ModeIndex, ModeSet};
use crate::specfun::{cyl_bessel, cyl_bessel_dx, sph_bessel, sph_bessel_dx, BesselKind};
use crate::wigner_smith::{CMat, SMatrix};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Dirichlet, `φ = 0`.
    SoundSoft,
    /// Neumann, `∂φ/∂n = 0`.
    SoundHard,
}

impl BoundaryCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryCondition::SoundSoft => "soft",
            BoundaryCondition::SoundHard => "hard",
        }
    }
}

/// Radial function, first and second derivative at `x`.
fn radial(dim: usize, kind: BesselKind, order: i32, x: f64) -> Result<[C64; 3]> {
    let (f, fp, g) = if dim == 3 {
        let l = order.unsigned_abs() as usize;
        let lf = l as f64;
        let (f, fp) = (sph_bessel(kind, l, x)?, sph_bessel_dx(kind, l, x)?);
        (f, fp, -fp * (2.0 / x) - f * (1.0 - lf * (lf + 1.0) / (x * x)))
    } else {
        let n = order as f64;
        let (f, fp) = (cyl_bessel(kind, order, x)?, cyl_bessel_dx(kind, order, x)?);
        (f, fp, -fp / x - f * (1.0 - n * n / (x * x)))
    };
    Ok([f, fp, g])
}

/// `α` and `dα/d(ka)`.
fn reflection_and_slope(dim: usize, bc: BoundaryCondition, order: i32, ka: f64) -> Result<(C64, C64)> {
    if !(ka > 0.0) {
        return domain(format!("ka must be positive, got {ka}"));
    }
    if dim != 2 && dim != 3 {
        return domain(format!("dimension must be 2 or 3, got {dim}"));
    }
    let h1 = radial(dim, BesselKind::Hankel1, order, ka)?;
    let h2 = radial(dim, BesselKind::Hankel2, order, ka)?;
    // α = -u/v with (u, v) the function values (soft) or slopes (hard)
    let o = match bc {
        BoundaryCondition::SoundSoft => 0,
        BoundaryCondition::SoundHard => 1,
    };
    let (u, du, v, dv) = (h1[o], h1[o + 1], h2[o], h2[o + 1]);
    let alpha = -u / v;
    let slope = -(du * v - u * dv) / (v * v);
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(WsError::Capacity(format!("reflection coefficient overflow at order {order}, ka={ka}")));
    }
    Ok((alpha, slope))
}

/// Modal reflection coefficient `α` (unimodular) for degree `l` (3D) or
/// order `n` (2D).
pub fn modal_reflection(dim: usize, bc: BoundaryCondition, order: i32, ka: f64) -> Result<C64> {
    Ok(reflection_and_slope(dim, bc, order, ka)?.0)
}

/// Phase linking the outgoing conjugate port to the incoming one:
/// `(-1)^m (-1)^{l+1}` in 3D, `j (-1)^n` in 2D.
fn port_phase(p: ModeIndex) -> C64 {
    match p {
        ModeIndex::Sph { l, m } => C64::from(parity(m) * parity(l as i32 + 1)),
        ModeIndex::Cyl { n } => jpow(1) * parity(n),
    }
}

fn check_dim(dim: usize, modes: &ModeSet) -> Result<()> {
    if modes.dim != dim {
        return Err(WsError::Contract(format!("mode set is {}D, solver asked for {dim}D", modes.dim)));
    }
    Ok(())
}

fn assemble<F>(modes: &ModeSet, k: f64, mut entry: F) -> Result<SMatrix>
where
    F: FnMut(ModeIndex) -> Result<C64>,
{
    let m = modes.len();
    let mut data = CMat::zeros(m, m);
    for (i, &p) in modes.modes.iter().enumerate() {
        let (t, _) = modes.conjugate_index(i);
        data[(t, i)] = port_phase(p) * entry(p)?;
    }
    SMatrix::new(modes.with_k(k), k, data)
}

/// S-matrix of free space (`α ≡ 1`).
pub fn free_smatrix(modes: &ModeSet, k: f64) -> Result<SMatrix> {
    assemble(modes, k, |_| Ok(C64::from(1.0)))
}

pub fn mie_smatrix(dim: usize, bc: BoundaryCondition, k: f64, a: f64, modes: &ModeSet) -> Result<SMatrix> {
    check_dim(dim, modes)?;
    assemble(modes, k, |p| modal_reflection(dim, bc, signed_order(p), k * a))
}

/// Analytic `dS/dk`.
pub fn mie_smatrix_deriv(dim: usize, bc: BoundaryCondition, k: f64, a: f64, modes: &ModeSet) -> Result<SMatrix> {
    check_dim(dim, modes)?;
    assemble(modes, k, |p| Ok(reflection_and_slope(dim, bc, signed_order(p), k * a)?.1 * a))
}

fn signed_order(p: ModeIndex) -> i32 {
    match p {
        ModeIndex::Sph { l, .. } => l as i32,
        ModeIndex::Cyl { n } => n,
    }
}

/// Per-order delay `τ = j α* dα/dk`.
pub fn modal_delay(dim: usize, bc: BoundaryCondition, order: i32, k: f64, a: f64) -> Result<f64> {
    let (al, sl) = reflection_and_slope(dim, bc, order, k * a)?;
    Ok((C64::new(0.0, 1.0) * al.conj() * sl * a).re)
}
