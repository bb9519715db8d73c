//! Small dense helpers: Hermitian eigensolver and complex products.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix. Returns the
/// (unsorted) real eigenvalues and the unitary matrix of eigenvectors, or
/// `None` if the sweeps fail to converge.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> Option<(Vec<f64>, DMatrix<C64>)> {
    let n = a.nrows();
    let mut a = (a + a.adjoint()) * C64::from(0.5);
    let mut v = DMatrix::<C64>::identity(n, n);
    let total = a.norm();
    if total == 0.0 {
        return Some((vec![0.0; n], v));
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-16 * total {
            let vals = (0..n).map(|i| a[(i, i)].re).collect();
            return Some((vals, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let r = b.norm();
                if r <= 1e-300 || r < 1e-18 * total / n as f64 {
                    continue;
                }
                let e = b / r;
                let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [-s ē, c ē]] on (p, q)
                let (gpp, gpq, gqp, gqq) = (C64::from(c), C64::from(s), -e.conj() * s, e.conj() * c);
                for i in 0..n {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = aip * gpp + aiq * gqp;
                    a[(i, q)] = aip * gpq + aiq * gqq;
                }
                for j in 0..n {
                    let (apj, aqj) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = gpp.conj() * apj + gqp.conj() * aqj;
                    a[(q, j)] = gpq.conj() * apj + gqq.conj() * aqj;
                }
                a[(p, q)] = C64::from(0.0);
                a[(q, p)] = C64::from(0.0);
                for i in 0..n {
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = vip * gpp + viq * gqp;
                    v[(i, q)] = vip * gpq + viq * gqq;
                }
            }
        }
    }
    None
}

/// Complex product through four real products, which go through the
/// optimized real kernel.
pub fn cgemm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}
