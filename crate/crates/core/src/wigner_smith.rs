//! Scattering matrices, the time delay matrix `Q = j S† S'`, and its
//! eigendecomposition into WS modes.

use crate::error::{Result, WsError};
use crate::linalg::hermitian_eigen;
use crate::modal::ModeSet;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

const J: C64 = C64::new(0.0, 1.0);

/// Scattering matrix (or its `k`-derivative) on a fixed port set.
#[derive(Debug, Clone)]
pub struct SMatrix {
    pub modes: ModeSet,
    pub k: f64,
    pub data: CMat,
}

impl SMatrix {
    pub fn new(modes: ModeSet, k: f64, data: CMat) -> Result<Self> {
        let m = modes.len();
        if data.nrows() != m || data.ncols() != m {
            return Err(WsError::Contract(format!(
                "matrix is {}x{}, mode set has {m} ports",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(SMatrix { modes, k, data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Keep only ports `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> SMatrix {
        let modes = ModeSet {
            modes: keep.iter().map(|&i| self.modes.modes[i]).collect(),
            ..self.modes.clone()
        };
        let data = CMat::from_fn(keep.len(), keep.len(), |i, j| self.data[(keep[i], keep[j])]);
        SMatrix { modes, k: self.k, data }
    }
}

/// Unitarity/symmetry residuals of an S-matrix.
#[derive(Debug, Clone, Copy)]
pub struct SMatrixReport {
    /// `‖S†S − I‖_F / √M`
    pub unitarity: f64,
    /// `‖S − Sᵀ‖_F / ‖S‖_F`
    pub symmetry: f64,
    pub gate: f64,
    pub pass: bool,
}

pub fn validate_smatrix(s: &SMatrix, gate: f64) -> SMatrixReport {
    let m = s.dim();
    let ss = s.data.adjoint() * &s.data - CMat::identity(m, m);
    let unitarity = ss.norm() / (m as f64).sqrt();
    let nrm = s.data.norm();
    let symmetry = if nrm > 0.0 { (&s.data - s.data.transpose()).norm() / nrm } else { 0.0 };
    SMatrixReport { unitarity, symmetry, gate, pass: unitarity <= gate && symmetry <= gate }
}

/// Central difference `(S(k+δ) − S(k−δ)) / 2δ`; with `richardson`, the
/// estimate is extrapolated with a second pass at `δ/2`.
pub fn smatrix_fd_derivative<F>(mut provider: F, k: f64, dk: f64, richardson: bool) -> Result<SMatrix>
where
    F: FnMut(f64) -> Result<SMatrix>,
{
    if !(dk > 0.0) {
        return Err(WsError::Domain(format!("step must be positive, got {dk}")));
    }
    let mut central = |h: f64| -> Result<SMatrix> {
        let sp = provider(k + h)?;
        let sm = provider(k - h)?;
        if sp.modes.modes != sm.modes.modes {
            return Err(WsError::Contract("provider changed the mode set".into()));
        }
        let data = (&sp.data - &sm.data) / C64::from(2.0 * h);
        Ok(SMatrix { modes: sp.modes.with_k(k), k, data })
    };
    let d1 = central(dk)?;
    if !richardson {
        return Ok(d1);
    }
    let d2 = central(dk / 2.0)?;
    let data = (&d2.data * C64::from(4.0) - &d1.data) / C64::from(3.0);
    Ok(SMatrix { data, ..d2 })
}

/// Default finite-difference step `1e-4 k`.
pub fn default_dk(k: f64) -> f64 {
    1e-4 * k
}

/// Finite-difference `Q` with step refinement: starting from `dk`, the step
/// is divided by 4 while the anti-Hermitian part of `j S† S′` (a direct
/// measure of the truncation error, since exact `Q` is Hermitian) exceeds
/// `target`, at most `max_refinements` times. Narrow resonances need this.
/// Returns `Q`, the `S′` it was built from, and the final step.
pub fn q_matrix_fd_adaptive<F>(
    mut provider: F,
    s: &SMatrix,
    dk: f64,
    target: f64,
    max_refinements: usize,
) -> Result<(QMatrix, SMatrix, f64)>
where
    F: FnMut(f64) -> Result<SMatrix>,
{
    let mut h = dk;
    let mut refinements = 0;
    loop {
        let sp = smatrix_fd_derivative(&mut provider, s.k, h, false)?;
        let q = q_matrix_tagged(s, &sp, Provenance::FiniteDifference)?;
        if q.hermiticity_residual <= target || refinements == max_refinements {
            return Ok((q, sp, h));
        }
        h /= 4.0;
        refinements += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FiniteDifference,
    Analytic,
    VolumeIntegral,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::FiniteDifference => "finite-difference",
            Provenance::Analytic => "analytic",
            Provenance::VolumeIntegral => "volume-integral",
        }
    }
}

/// Hermitian time delay matrix.
#[derive(Debug, Clone)]
pub struct QMatrix {
    pub data: CMat,
    pub k: f64,
    pub provenance: Provenance,
    /// `‖Q − Q†‖_F / ‖Q‖_F` before symmetrization.
    pub hermiticity_residual: f64,
    /// `‖Q − Q_r‖_F / ‖Q‖_F` where `Q_r` is the reciprocity projection of the
    /// symmetrized matrix; zero when no projection was applied.
    pub reciprocity_residual: f64,
}

impl QMatrix {
    /// Symmetrize `raw` and record the discarded anti-Hermitian part.
    pub fn from_raw(raw: CMat, k: f64, provenance: Provenance) -> Self {
        let nrm = raw.norm();
        let hermiticity_residual = if nrm > 0.0 { (&raw - raw.adjoint()).norm() / nrm } else { 0.0 };
        let data = (&raw + raw.adjoint()) * C64::from(0.5);
        QMatrix { data, k, provenance, hermiticity_residual, reciprocity_residual: 0.0 }
    }

    /// Project onto matrices with `Q = S† Q* S`, the identity obeyed by the
    /// exact delay matrix of a symmetric unitary `S`. Removes the part of the
    /// derivative noise that would otherwise mix nearly degenerate modes.
    pub fn project_reciprocal(&mut self, s: &SMatrix) {
        let nrm = self.data.norm();
        let u = symmetric_unitary_factor(&s.data);
        let mirror = u.adjoint() * self.data.map(|z| z.conj()) * &u;
        let p = (&self.data + mirror) * C64::from(0.5);
        let p = (&p + p.adjoint()) * C64::from(0.5);
        self.reciprocity_residual = if nrm > 0.0 { (&p - &self.data).norm() / nrm } else { 0.0 };
        self.data = p;
    }

    /// Largest `|Im Q_nn|`.
    pub fn max_diag_imag(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Unitary polar factor of the symmetric part of `s`. It is symmetric and
/// unitary to rounding, which makes `Q ↦ U† Q* U` an exact involution.
fn symmetric_unitary_factor(s: &CMat) -> CMat {
    let sym = (s + s.transpose()) * C64::from(0.5);
    let gram = sym.adjoint() * &sym;
    match hermitian_eigen(&gram) {
        Some((vals, v)) if vals.iter().all(|&x| x > 0.0) => {
            let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| C64::from(1.0 / x.sqrt())));
            let inv_sqrt = &v * CMat::from_diagonal(&d) * v.adjoint();
            let u = sym * inv_sqrt;
            (&u + u.transpose()) * C64::from(0.5)
        }
        _ => sym,
    }
}

pub fn q_matrix(s: &SMatrix, sp: &SMatrix) -> Result<QMatrix> {
    if s.data.shape() != sp.data.shape() || (s.k - sp.k).abs() > 1e-12 * s.k.abs().max(1.0) {
        return Err(WsError::Contract("S and S' disagree in shape or wavenumber".into()));
    }
    let mut q = QMatrix::from_raw(s.data.adjoint() * &sp.data * J, s.k, Provenance::Analytic);
    q.project_reciprocal(s);
    Ok(q)
}

/// Like [`q_matrix`] but tagging the provenance.
pub fn q_matrix_tagged(s: &SMatrix, sp: &SMatrix, provenance: Provenance) -> Result<QMatrix> {
    let mut q = q_matrix(s, sp)?;
    q.provenance = provenance;
    Ok(q)
}

/// Relative eigenvalue gap below which modes are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Eigenvector phase normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// Largest-magnitude entry real and positive.
    #[default]
    LargestEntry,
    /// First significant entry real and positive.
    FirstSignificant,
}

#[derive(Debug, Clone)]
pub struct WSDecomposition {
    /// Columns are the WS modes.
    pub w: CMat,
    /// Ascending delays (metres for unit sound speed).
    pub delays: Vec<f64>,
    /// `Wᵀ S W`.
    pub sbar: CMat,
}

impl WSDecomposition {
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.w.ncols();
        (self.w.adjoint() * &self.w - CMat::identity(m, m)).norm()
    }

    pub fn reconstruction_residual(&self, q: &QMatrix) -> f64 {
        let d = CMat::from_diagonal(&DVector::from_iterator(
            self.delays.len(),
            self.delays.iter().map(|&x| C64::from(x)),
        ));
        let nrm = q.data.norm();
        let err = (&self.w * d * self.w.adjoint() - &q.data).norm();
        if nrm > 0.0 {
            err / nrm
        } else {
            err
        }
    }

    /// Max over `n` of `|Q_nn − Σ_i |W_ni|² q̄_i|`.
    pub fn diagonal_identity_residual(&self, q: &QMatrix) -> f64 {
        (0..self.w.nrows())
            .map(|n| {
                let s: f64 = (0..self.w.ncols()).map(|i| self.w[(n, i)].norm_sqr() * self.delays[i]).sum();
                (q.data[(n, n)].re - s).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `‖offdiag(S̄)‖_F / √M`.
    pub fn simdiag_residual(&self) -> f64 {
        let m = self.sbar.nrows();
        let mut e = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    e += self.sbar[(i, j)].norm_sqr();
                }
            }
        }
        (e / m as f64).sqrt()
    }

    /// Largest `||S̄_ii| − 1|`.
    pub fn unimodularity_residual(&self) -> f64 {
        self.sbar.diagonal().iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub fn ws_decompose(q: &QMatrix, s: &SMatrix) -> Result<WSDecomposition> {
    ws_decompose_with(q, s, PhaseConvention::LargestEntry)
}

pub fn ws_decompose_with(q: &QMatrix, s: &SMatrix, phase: PhaseConvention) -> Result<WSDecomposition> {
    let m = q.data.nrows();
    if s.dim() != m {
        return Err(WsError::Contract("Q and S sizes differ".into()));
    }
    let (vals, vecs) = hermitian_eigen(&q.data)
        .ok_or_else(|| WsError::Solver { msg: "Hermitian eigensolver did not converge".into(), residual: f64::NAN })?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let delays: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut w = CMat::from_fn(m, m, |r, c| vecs[(r, order[c])]);

    let scale = delays.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let tol = DEGENERACY_TOL * scale;
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && delays[end] - delays[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block = canonical_cluster_basis(&w.columns(start, end - start).into_owned(), &s.data);
            w.columns_mut(start, end - start).copy_from(&block);
        }
        start = end;
    }
    for c in 0..m {
        fix_phase(&mut w, c, phase);
    }
    let sbar = w.transpose() * &s.data * &w;
    Ok(WSDecomposition { w, delays, sbar })
}

fn fix_phase(w: &mut CMat, c: usize, phase: PhaseConvention) {
    let col = w.column(c);
    let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pick = match phase {
        PhaseConvention::LargestEntry => {
            let mut best = 0;
            for (i, z) in col.iter().enumerate() {
                if z.norm() > col[best].norm() * (1.0 + 1e-9) {
                    best = i;
                }
            }
            best
        }
        PhaseConvention::FirstSignificant => col.iter().position(|z| z.norm() > 1e-3 * big).unwrap_or(0),
    };
    let z = col[pick];
    if z.norm() > 0.0 {
        let rot = z.conj() / z.norm();
        w.column_mut(c).iter_mut().for_each(|v| *v *= rot);
    }
}

/// Deterministic basis of a degenerate eigenspace: project unit vectors in
/// port order, then rotate so that `Vᵀ S V` is diagonal.
fn canonical_cluster_basis(v: &CMat, s: &CMat) -> CMat {
    let (m, c) = v.shape();
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(c);
    // Accept well-conditioned projections first; two Gram-Schmidt passes keep
    // the basis orthonormal even for large clusters.
    for thresh in [0.5, 0.1, 1e-2, 1e-4, 1e-8] {
        for i in 0..m {
            if basis.len() == c {
                break;
            }
            // P e_i = V (V† e_i)
            let coeff = v.row(i).adjoint();
            let mut x: DVector<C64> = v * coeff;
            let n0 = x.norm();
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&x);
                    x -= b * proj;
                }
            }
            let n = x.norm();
            if n0 > 0.0 && n > thresh * n0.max(1e-3) {
                basis.push(x / C64::from(n));
            }
        }
    }
    if basis.len() < c {
        return v.clone();
    }
    let mut u = CMat::from_columns(&basis);

    // Vᵀ S V is symmetric and (near) unitary; its real and imaginary parts
    // commute, so a generic real combination diagonalizes both.
    let b = u.transpose() * s * &u;
    let b = (&b + b.transpose()) * C64::from(0.5);
    let t = 0.573_576_436_351_046;
    let re = CMat::from_fn(c, c, |i, j| C64::from(b[(i, j)].re + t * b[(i, j)].im));
    if let Some((_, o)) = hermitian_eigen(&re) {
        u *= o.map(|z| C64::from(z.re));
    }
    let mut cols: Vec<DVector<C64>> = u.column_iter().map(|c| c.into_owned()).collect();
    cols.sort_by_key(|col| {
        let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        col.iter().position(|z| z.norm() > 1e-6 * big.max(1e-300)).unwrap_or(m)
    });
    CMat::from_columns(&cols)
}
