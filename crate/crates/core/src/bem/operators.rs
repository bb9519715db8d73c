//! Nyström discretization of the single-, double- and adjoint double-layer
//! operators and of the tangential-derivative single layer used by the Maue
//! form of the hypersingular operator, with product integration on near and
//! self panels.
//!
//! Kernel: `Φ(x, y) = (−j/4) H₀⁽²⁾(k|x − y|)`.

use super::geometry::P2;
use super::mesh::{BoundaryMesh, Panel, PANEL_ORDER};
use crate::quad::gauss_legendre;
use crate::wigner_smith::CMat;
use num_complex::Complex64 as C64;

const J: C64 = C64::new(0.0, 1.0);

/// A source panel counts as near when the target is closer than this many
/// panel lengths.
pub const NEAR_FACTOR: f64 = 1.5;
const SUB_POINTS: usize = 12;
/// Relative parameter width at which subdivision toward an on-panel target
/// stops.
const TINY: f64 = 1e-9;

/// `H₀⁽²⁾(z)` and `H₁⁽²⁾(z)`.
#[inline]
pub fn hankel2_01(z: f64) -> (C64, C64) {
    (C64::new(libm::j0(z), -libm::y0(z)), C64::new(libm::j1(z), -libm::y1(z)))
}

/// `[Φ, ∂Φ/∂n_x, ∂Φ/∂n_y, Φ n_x·n_y, ∂Φ/∂t_x]` with `t = (−n₁, n₀)`.
#[inline]
pub fn kernels(k: f64, x: P2, nx: P2, y: P2, ny: P2) -> [C64; 5] {
    kernels_from_chord(k, [x[0] - y[0], x[1] - y[1]], nx, ny)
}

/// [`kernels`] from the chord `d = x − y`.
#[inline]
pub fn kernels_from_chord(k: f64, d: P2, nx: P2, ny: P2) -> [C64; 5] {
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if r == 0.0 {
        return [C64::new(0.0, 0.0); 5];
    }
    let (h0, h1) = hankel2_01(k * r);
    let phi = -J * 0.25 * h0;
    let common = J * (0.25 * k / r) * h1;
    [
        phi,
        common * (d[0] * nx[0] + d[1] * nx[1]),
        -common * (d[0] * ny[0] + d[1] * ny[1]),
        phi * (nx[0] * ny[0] + nx[1] * ny[1]),
        common * (d[1] * nx[0] - d[0] * nx[1]),
    ]
}

/// Barycentric weights for the reference nodes.
fn bary_weights(t: &[f64]) -> Vec<f64> {
    (0..t.len())
        .map(|j| 1.0 / (0..t.len()).filter(|&m| m != j).map(|m| t[j] - t[m]).product::<f64>())
        .collect()
}

/// Lagrange basis values at `t`.
fn lagrange(t: f64, nodes: &[f64], bw: &[f64], out: &mut [f64]) {
    let mut denom = 0.0;
    for j in 0..nodes.len() {
        let d = t - nodes[j];
        if d == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = bw[j] / d;
        denom += out[j];
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

/// Spectral differentiation matrix on the reference nodes (`d/dt`).
pub fn diff_matrix(t: &[f64]) -> Vec<Vec<f64>> {
    let n = t.len();
    let bw = bary_weights(t);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j {
                d[i][j] = bw[j] / bw[i] / (t[i] - t[j]);
                s += d[i][j];
            }
        }
        d[i][i] = -s;
    }
    d
}

/// Lagrange interpolation matrix from the reference nodes to `targets`.
pub fn interp_matrix(t: &[f64], targets: &[f64]) -> Vec<Vec<f64>> {
    let bw = bary_weights(t);
    targets
        .iter()
        .map(|&x| {
            let mut row = vec![0.0; t.len()];
            lagrange(x, t, &bw, &mut row);
            row
        })
        .collect()
}

/// Dense operator blocks acting on nodal values.
///
/// * `s1`: `∫ Φ f ds` (graded parameter, no arc-length factor)
/// * `kp1`: `∫ ∂Φ/∂n_x f ds`
/// * `ksp`: `∫ ∂Φ/∂n_y f |x'| ds`
/// * `nsp`: `∫ Φ n_x·n_y f |x'| ds`
/// * `tsp`: principal value `∫ ∂Φ/∂t_x f ds`
pub struct Operators {
    pub s1: CMat,
    pub kp1: CMat,
    pub ksp: CMat,
    pub nsp: CMat,
    pub tsp: CMat,
}

pub(crate) struct NearRule {
    sub_t: Vec<f64>,
    sub_w: Vec<f64>,
    bw: Vec<f64>,
}

impl NearRule {
    pub(crate) fn new(mesh: &BoundaryMesh) -> Self {
        let (sub_t, sub_w) = gauss_legendre(SUB_POINTS);
        NearRule { sub_t, sub_w, bw: bary_weights(&mesh.ref_nodes) }
    }
}

/// Product-integration weights of the four kernels against the Lagrange
/// basis of `panel`, for a target at `x` with normal `nx`. `own` is the
/// target's parameter when it is a node of `panel` itself.
pub(crate) fn near_weights(
    mesh: &BoundaryMesh,
    rule: &NearRule,
    panel: &Panel,
    x: P2,
    nx: P2,
    own: Option<f64>,
    out: &mut [[C64; 5]; PANEL_ORDER],
) {
    for o in out.iter_mut() {
        *o = [C64::new(0.0, 0.0); 5];
    }
    let k = mesh.k;
    let sstar = own.unwrap_or_else(|| mesh.closest_s(panel.seg, x).clamp(panel.s0, panel.s1));
    let (ystar, _, _) = mesh.point(panel.seg, sstar);
    let d0 = if own.is_some() { 0.0 } else { super::geometry::dist(x, ystar) };
    let half = 0.5 * (panel.s1 - panel.s0);
    let segment = &mesh.geometry.segments[panel.seg];
    let mut basis = [0.0; PANEL_ORDER];
    // Cauchy part of ∂Φ/∂t_x on the own panel: 1 / (2π |x'(s*)| (s − s*))
    let mut lstar = [0.0; PANEL_ORDER];
    let cauchy = own.map(|st| {
        lagrange((st - panel.s0) / half - 1.0, &mesh.ref_nodes, &rule.bw, &mut lstar);
        let (_, dy, _) = mesh.point(panel.seg, st);
        1.0 / (2.0 * std::f64::consts::PI * (dy[0] * dy[0] + dy[1] * dy[1]).sqrt())
    });
    // a target that rounds onto the panel behaves like one of its own nodes
    let on_panel = own.is_some() || d0 < 1e-300;
    // `graded` maps s = a + (b − a) t³ to absorb the log singularity at `a`;
    // the bounded kernels are dropped there, their share being negligible.
    let mut integrate = |a: f64, b: f64, graded: bool| {
        let h = 0.5 * (b - a);
        for (t, w) in rule.sub_t.iter().zip(&rule.sub_w) {
            let (s, wt) = if graded {
                let u = 0.5 * (1.0 + t);
                (a + (b - a) * u * u * u, w * 0.5 * (b - a).abs() * 3.0 * u * u)
            } else {
                (a + h * (1.0 + t), w * h)
            };
            let (y, dy, ny) = mesh.point(panel.seg, s);
            let speed = (dy[0] * dy[0] + dy[1] * dy[1]).sqrt();
            let kv = match own {
                Some(st) => {
                    let (u, du) = mesh.param_delta(panel.seg, s, st);
                    kernels_from_chord(k, segment.chord(u, du), nx, ny)
                }
                None => kernels(k, x, nx, y, ny),
            };
            let tref = (s - panel.s0) / half - 1.0;
            lagrange(tref, &mesh.ref_nodes, &rule.bw, &mut basis);
            for j in 0..PANEL_ORDER {
                let b = basis[j] * wt;
                out[j][0] += kv[0] * b;
                out[j][3] += kv[3] * (b * speed);
                if !graded {
                    out[j][1] += kv[1] * b;
                    out[j][2] += kv[2] * (b * speed);
                    out[j][4] += match cauchy {
                        Some(c0) => {
                            let ds = s - sstar;
                            (kv[4] - c0 / ds) * b + c0 * (basis[j] - lstar[j]) / ds * wt
                        }
                        None => kv[4] * b,
                    };
                }
            }
        }
    };
    for end in [panel.s0, panel.s1] {
        let span = end - sstar;
        if span.abs() < 1e-300 {
            continue;
        }
        let mut hi = end;
        loop {
            let lo = sstar + 0.5 * (hi - sstar);
            // physical width of the remaining piece
            let (_, dy, _) = mesh.point(panel.seg, 0.5 * (lo + hi));
            let width = (hi - sstar).abs() * (dy[0] * dy[0] + dy[1] * dy[1]).sqrt();
            if !on_panel && width < 0.25 * d0 {
                integrate(sstar.min(hi), sstar.max(hi), false);
                break;
            }
            if on_panel && (hi - sstar).abs() < TINY * (panel.s1 - panel.s0) {
                integrate(sstar, hi, true);
                break;
            }
            integrate(lo.min(hi), lo.max(hi), false);
            hi = lo;
        }
    }
    if let Some(c0) = cauchy {
        let lg = ((panel.s1 - sstar) / (sstar - panel.s0)).ln();
        for j in 0..PANEL_ORDER {
            out[j][4] += c0 * lstar[j] * lg;
        }
    }
}

/// Whether `panel` must be integrated with product weights for target `x`.
pub(crate) fn is_near(mesh: &BoundaryMesh, panel: &Panel, x: P2) -> bool {
    let nodes = &mesh.nodes[panel.first..panel.first + PANEL_ORDER];
    let d = nodes.iter().map(|n| super::geometry::dist(n.x, x)).fold(f64::INFINITY, f64::min);
    d < NEAR_FACTOR * panel.length
}

impl Operators {
    pub fn assemble(mesh: &BoundaryMesh) -> Operators {
        let n = mesh.len();
        let k = mesh.k;
        let mut ops = Operators {
            s1: CMat::zeros(n, n),
            kp1: CMat::zeros(n, n),
            ksp: CMat::zeros(n, n),
            nsp: CMat::zeros(n, n),
            tsp: CMat::zeros(n, n),
        };
        let rule = NearRule::new(mesh);
        let mut wbuf = [[C64::new(0.0, 0.0); 5]; PANEL_ORDER];
        for (i, ti) in mesh.nodes.iter().enumerate() {
            for (pi, panel) in mesh.panels.iter().enumerate() {
                if is_near(mesh, panel, ti.x) {
                    let own = (ti.panel == pi).then_some(ti.s);
                    near_weights(mesh, &rule, panel, ti.x, ti.n, own, &mut wbuf);
                    for (jj, wv) in wbuf.iter().enumerate() {
                        let j = panel.first + jj;
                        ops.s1[(i, j)] = wv[0];
                        ops.kp1[(i, j)] = wv[1];
                        ops.ksp[(i, j)] = wv[2];
                        ops.nsp[(i, j)] = wv[3];
                        ops.tsp[(i, j)] = wv[4];
                    }
                } else {
                    for j in panel.first..panel.first + PANEL_ORDER {
                        let src = &mesh.nodes[j];
                        let kv = kernels(k, ti.x, ti.n, src.x, src.n);
                        ops.s1[(i, j)] = kv[0] * src.w;
                        ops.kp1[(i, j)] = kv[1] * src.w;
                        ops.ksp[(i, j)] = kv[2] * (src.w * src.speed);
                        ops.nsp[(i, j)] = kv[3] * (src.w * src.speed);
                        ops.tsp[(i, j)] = kv[4] * src.w;
                    }
                }
            }
        }
        ops
    }
}

/// Block-diagonal `d/ds` on every panel, as a dense matrix.
pub fn panel_derivative(mesh: &BoundaryMesh) -> CMat {
    let n = mesh.len();
    let dref = diff_matrix(&mesh.ref_nodes);
    let mut d = CMat::zeros(n, n);
    for p in &mesh.panels {
        let sc = 2.0 / (p.s1 - p.s0);
        for i in 0..PANEL_ORDER {
            for j in 0..PANEL_ORDER {
                d[(p.first + i, p.first + j)] = C64::from(dref[i][j] * sc);
            }
        }
    }
    d
}

/// Lagrange weights extrapolating panel nodes to the reference point `t`.
fn endpoint_weights(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &xm)| (t - xm) / (nodes[j] - xm))
                .product()
        })
        .collect()
}

/// Boundary terms of the integrated-by-parts hypersingular operator for a
/// piecewise polynomial density: `Σ_b ∂Φ/∂t_x(x_i, y_b) [u]_b` over all panel
/// junctions `y_b`, where `[u]_b` is the jump of the panel interpolants.
/// Without them the discrete operator cannot see inter-panel jumps.
pub fn junction_terms(mesh: &BoundaryMesh) -> CMat {
    let n = mesh.len();
    let wl = endpoint_weights(&mesh.ref_nodes, -1.0);
    let wr = endpoint_weights(&mesh.ref_nodes, 1.0);
    let starts: Vec<P2> = mesh.panels.iter().map(|p| mesh.point(p.seg, p.s0).0).collect();
    let scale = mesh.geometry.perimeter();
    let mut t = CMat::zeros(n, n);
    for p in &mesh.panels {
        let (yb, _, _) = mesh.point(p.seg, p.s1);
        let Some(q) = starts
            .iter()
            .position(|s| ((s[0] - yb[0]).powi(2) + (s[1] - yb[1]).powi(2)).sqrt() < 1e-12 * scale)
        else {
            continue;
        };
        let next = &mesh.panels[q];
        for (i, nd) in mesh.nodes.iter().enumerate() {
            let g = kernels(mesh.k, nd.x, nd.n, yb, nd.n)[4];
            for j in 0..PANEL_ORDER {
                t[(i, next.first + j)] += g * wl[j];
                t[(i, p.first + j)] -= g * wr[j];
            }
        }
    }
    t
}
