//! Composite Gauss panels on each segment, graded toward corners.

use super::geometry::{Geometry, P2};
use crate::error::{Result, WsError};
use crate::quad::gauss_legendre;
use std::f64::consts::PI;
use std::io::Write;

/// Points per panel.
pub const PANEL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: P2,
    /// Unit normal into the fluid.
    pub n: P2,
    /// `|dx/ds|` in the graded parameter.
    pub speed: f64,
    /// Quadrature weight in the graded parameter.
    pub w: f64,
    /// Graded parameter on the owning segment.
    pub s: f64,
    pub panel: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub seg: usize,
    pub s0: f64,
    pub s1: f64,
    pub first: usize,
    /// Physical length.
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pub geometry: Geometry,
    pub nodes: Vec<Node>,
    pub panels: Vec<Panel>,
    pub k: f64,
    pub nodes_per_wavelength: f64,
    pub grading: f64,
    /// Gauss nodes on `[-1, 1]` shared by all panels.
    pub ref_nodes: Vec<f64>,
    pub ref_weights: Vec<f64>,
}

/// Sigmoid substitution `w(s)` on `[0, 1]` clustering points at both ends,
/// returning `(w, w')`.
pub fn grade(s: f64, q: f64) -> (f64, f64) {
    let t = 2.0 * s - 1.0;
    let v = (1.0 / q - 0.5) * (-t).powi(3) + t / q + 0.5;
    let dv = -6.0 * (1.0 / q - 0.5) * t * t + 2.0 / q;
    let (a, b) = (v.powf(q), (1.0 - v).powf(q));
    let w = a / (a + b);
    let dw = if v <= 0.0 || v >= 1.0 {
        0.0
    } else {
        q * v.powf(q - 1.0) * (1.0 - v).powf(q - 1.0) * dv / (a + b).powi(2)
    };
    (w, dw)
}

/// Inverse of [`grade`] by bisection.
pub fn ungrade(u: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if grade(mid, q).0 < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl BoundaryMesh {
    /// Position, `dx/ds` and unit normal at graded parameter `s` of segment `seg`.
    pub fn point(&self, seg: usize, s: f64) -> (P2, P2, P2) {
        let sg = &self.geometry.segments[seg];
        let (x, dx, du) = if !self.geometry.graded[seg] {
            let (x, dx) = sg.eval(s);
            (x, dx, 1.0)
        } else if s <= 0.5 {
            let (u, du) = grade(s, self.grading);
            let (x, dx) = sg.eval(u);
            (x, dx, du)
        } else {
            // the grading map is symmetric: w(1 − s) = 1 − w(s)
            let (v, dv) = grade(1.0 - s, self.grading);
            let (x, dx) = sg.eval_from_end(v);
            (x, dx, dv)
        };
        let d = [dx[0] * du, dx[1] * du];
        let l = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
        (x, d, [dx[1] / l, -dx[0] / l])
    }

    /// Segment parameter `u(s)` and the difference `u(s_b) − u(s_a)`, the
    /// latter accurate to relative precision near either segment end.
    pub fn param_delta(&self, seg: usize, s_a: f64, s_b: f64) -> (f64, f64) {
        if !self.geometry.graded[seg] {
            return (s_a, s_b - s_a);
        }
        let q = self.grading;
        if s_a <= 0.5 && s_b <= 0.5 {
            let wa = grade(s_a, q).0;
            (wa, grade(s_b, q).0 - wa)
        } else if s_a > 0.5 && s_b > 0.5 {
            let va = grade(1.0 - s_a, q).0;
            (1.0 - va, va - grade(1.0 - s_b, q).0)
        } else {
            let wa = grade(s_a, q).0;
            (wa, grade(s_b, q).0 - wa)
        }
    }

    /// Graded parameter of the point on `seg` closest to `x`.
    pub fn closest_s(&self, seg: usize, x: P2) -> f64 {
        let u = self.geometry.segments[seg].closest_u(x);
        if self.geometry.graded[seg] {
            ungrade(u, self.grading)
        } else {
            u
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same outline re-meshed with every panel split in two.
    pub fn refined(&self) -> BoundaryMesh {
        let mut cuts = Vec::with_capacity(2 * self.panels.len());
        for p in &self.panels {
            let m = 0.5 * (p.s0 + p.s1);
            cuts.push((p.seg, p.s0, m));
            cuts.push((p.seg, m, p.s1));
        }
        build(self.geometry.clone(), self.k, self.nodes_per_wavelength * 2.0, self.grading, &cuts)
    }

    /// CSV dump `x,y,nx,ny,weight` (weight in arc length).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,nx,ny,weight")?;
        for n in &self.nodes {
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", n.x[0], n.x[1], n.n[0], n.n[1], n.w * n.speed)?;
        }
        Ok(())
    }
}

fn build(geometry: Geometry, k: f64, npw: f64, grading: f64, cuts: &[(usize, f64, f64)]) -> BoundaryMesh {
    let (rx, rw) = gauss_legendre(PANEL_ORDER);
    let mut mesh = BoundaryMesh {
        geometry,
        nodes: Vec::new(),
        panels: Vec::new(),
        k,
        nodes_per_wavelength: npw,
        grading,
        ref_nodes: rx.clone(),
        ref_weights: rw.clone(),
    };
    for &(seg, s0, s1) in cuts {
        let first = mesh.nodes.len();
        let pid = mesh.panels.len();
        let h = 0.5 * (s1 - s0);
        let mut length = 0.0;
        for (t, wt) in rx.iter().zip(&rw) {
            let s = s0 + h * (1.0 + t);
            let (x, d, n) = mesh.point(seg, s);
            let speed = (d[0] * d[0] + d[1] * d[1]).sqrt();
            length += speed * wt * h;
            mesh.nodes.push(Node { x, n, speed, w: wt * h, s, panel: pid });
        }
        mesh.panels.push(Panel { seg, s0, s1, first, length });
    }
    mesh
}

/// Graded composite mesh with roughly `nodes_per_wavelength` nodes per
/// wavelength along every segment.
pub fn mesh_geometry(g: &Geometry, k: f64, nodes_per_wavelength: f64, grading: f64) -> Result<BoundaryMesh> {
    if !(k > 0.0) {
        return Err(WsError::Domain("k must be positive".into()));
    }
    if nodes_per_wavelength < 6.0 {
        return Err(WsError::Domain(format!("need at least 6 nodes per wavelength, got {nodes_per_wavelength}")));
    }
    if !(grading >= 2.0) {
        return Err(WsError::Domain(format!("grading exponent must be at least 2, got {grading}")));
    }
    let lambda = 2.0 * PI / k;
    let mut cuts = Vec::new();
    for (i, seg) in g.segments.iter().enumerate() {
        let len = seg.length();
        if len < 1e-9 {
            return Err(WsError::Geometry(format!("segment {i} is shorter than 1e-9 m")));
        }
        // graded sides are twice as dense at mid-side as uniform ones
        let stretch = if g.graded[i] { 2.0 } else { 1.0 };
        let panels = ((stretch * len * nodes_per_wavelength / (lambda * PANEL_ORDER as f64)).ceil() as usize).max(2);
        for p in 0..panels {
            cuts.push((i, p as f64 / panels as f64, (p + 1) as f64 / panels as f64));
        }
    }
    Ok(build(g.clone(), k, nodes_per_wavelength, grading, &cuts))
}
