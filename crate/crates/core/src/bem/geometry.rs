//! Scatterer outlines: closed chains of straight and circular segments,
//! oriented counter-clockwise so that the right-hand normal points into the
//! fluid.

use crate::error::{Result, WsError};
use crate::mie::BoundaryCondition;
use std::f64::consts::PI;

pub type P2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { a: P2, b: P2 },
    Arc { center: P2, radius: f64, t0: f64, t1: f64 },
}

impl Segment {
    /// Point at physical parameter `u ∈ [0, 1]` and `d/du`.
    pub fn eval(&self, u: f64) -> (P2, P2) {
        match *self {
            Segment::Line { a, b } => ([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])], [b[0] - a[0], b[1] - a[1]]),
            Segment::Arc { center, radius, t0, t1 } => {
                let t = t0 + u * (t1 - t0);
                let (s, c) = t.sin_cos();
                let dt = t1 - t0;
                ([center[0] + radius * c, center[1] + radius * s], [-radius * s * dt, radius * c * dt])
            }
        }
    }

    /// Point and derivative at `1 − v`, measured from the end so that points
    /// close to the end keep their relative precision.
    pub fn eval_from_end(&self, v: f64) -> (P2, P2) {
        match *self {
            Segment::Line { a, b } => ([b[0] - v * (b[0] - a[0]), b[1] - v * (b[1] - a[1])], [b[0] - a[0], b[1] - a[1]]),
            Segment::Arc { .. } => self.eval(1.0 - v),
        }
    }

    /// `x(u + du) − x(u)` without the cancellation of subtracting two points.
    pub fn chord(&self, u: f64, du: f64) -> P2 {
        match *self {
            Segment::Line { a, b } => [du * (b[0] - a[0]), du * (b[1] - a[1])],
            Segment::Arc { radius, t0, t1, .. } => {
                let dt = du * (t1 - t0);
                let mid = t0 + u * (t1 - t0) + 0.5 * dt;
                let h = 2.0 * radius * (0.5 * dt).sin();
                [-h * mid.sin(), h * mid.cos()]
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => dist(a, b),
            Segment::Arc { radius, t0, t1, .. } => radius * (t1 - t0).abs(),
        }
    }

    pub fn start(&self) -> P2 {
        self.eval(0.0).0
    }

    pub fn end(&self) -> P2 {
        self.eval(1.0).0
    }

    /// Physical parameter of the closest point to `x`.
    pub fn closest_u(&self, x: P2) -> f64 {
        match *self {
            Segment::Line { a, b } => {
                let d = [b[0] - a[0], b[1] - a[1]];
                (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0)
            }
            Segment::Arc { center, t0, t1, .. } => {
                let t = (x[1] - center[1]).atan2(x[0] - center[0]);
                let span = t1 - t0;
                // bring t into the arc's window, else pick the nearer end
                let mut best = (0.0, f64::INFINITY);
                for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
                    let u = (t + shift - t0) / span;
                    let uc = u.clamp(0.0, 1.0);
                    let d = dist(self.eval(uc).0, x);
                    if d < best.1 {
                        best = (uc, d);
                    }
                }
                best.0
            }
        }
    }

    pub fn distance(&self, x: P2) -> f64 {
        dist(self.eval(self.closest_u(x)).0, x)
    }
}

pub fn dist(a: P2, b: P2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Named outline choices.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    /// 50 m × 1 m rectangle centred at (0, 0.25).
    Strip,
    /// 30 m square shell, 4 m walls, bottom gap of width `w`.
    Cavity { w: f64 },
    Circle { radius: f64 },
    /// Closed polygon through the given vertices.
    Polyline(Vec<P2>),
}

#[derive(Debug, Clone)]
pub struct Geometry {
    pub name: String,
    pub segments: Vec<Segment>,
    pub corners: Vec<P2>,
    /// Per segment: whether the graded substitution is applied.
    pub graded: Vec<bool>,
    pub bc: BoundaryCondition,
    /// Polygon vertices (empty for the circle), used for inside tests.
    pub vertices: Vec<P2>,
    /// Interior void region for cavity metrics, as an axis-aligned box.
    pub void_box: Option<[f64; 4]>,
}

impl Geometry {
    pub fn perimeter(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Whether `x` lies inside the solid obstacle.
    pub fn contains(&self, x: P2) -> bool {
        if self.vertices.is_empty() {
            if let Some(Segment::Arc { center, radius, .. }) = self.segments.first() {
                return dist(*center, x) < *radius;
            }
            return false;
        }
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (a, b) = (v[i], v[j]);
            if (a[1] > x[1]) != (b[1] > x[1]) && x[0] < (b[0] - a[0]) * (x[1] - a[1]) / (b[1] - a[1]) + a[0] {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    pub fn distance_to_boundary(&self, x: P2) -> f64 {
        self.segments.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min)
    }

    /// Radius of the smallest origin-centred circle enclosing the outline.
    pub fn circumradius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for s in &self.segments {
            for i in 0..=32 {
                let p = s.eval(i as f64 / 32.0).0;
                r = r.max((p[0] * p[0] + p[1] * p[1]).sqrt());
            }
        }
        r
    }
}

fn signed_area(v: &[P2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>() / 2.0
}

fn polygon(name: &str, mut v: Vec<P2>, bc: BoundaryCondition) -> Result<Geometry> {
    if v.len() < 3 {
        return Err(WsError::Geometry("polygon needs at least 3 vertices".into()));
    }
    if v.first() == v.last() {
        v.pop();
    }
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    let n = v.len();
    let mut segments = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if dist(a, b) < 1e-9 {
            return Err(WsError::Geometry(format!("degenerate edge at vertex {i}")));
        }
        segments.push(Segment::Line { a, b });
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if edges_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(WsError::Geometry(format!("edges {i} and {j} intersect")));
            }
        }
    }
    let corners = (0..n)
        .filter(|&i| {
            let (p, c, q) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let cross = (c[0] - p[0]) * (q[1] - c[1]) - (c[1] - p[1]) * (q[0] - c[0]);
            cross.abs() > 1e-9 * dist(p, c) * dist(c, q)
        })
        .map(|i| v[i])
        .collect();
    Ok(Geometry {
        name: name.into(),
        graded: vec![true; n],
        segments,
        corners,
        bc,
        vertices: v,
        void_box: None,
    })
}

fn edges_cross(a: P2, b: P2, c: P2, d: P2) -> bool {
    let o = |p: P2, q: P2, r: P2| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

pub fn make_geometry(spec: &GeometrySpec, bc: BoundaryCondition) -> Result<Geometry> {
    match spec {
        GeometrySpec::Strip => polygon("strip", vec![[-25.0, -0.25], [25.0, -0.25], [25.0, 0.75], [-25.0, 0.75]], bc),
        GeometrySpec::Cavity { w } => {
            if !(*w > 0.0 && *w < 22.0) {
                return Err(WsError::Domain(format!("gap width must lie in (0, 22), got {w}")));
            }
            let h = w / 2.0;
            let v = vec![
                [h, -15.0],
                [15.0, -15.0],
                [15.0, 15.0],
                [-15.0, 15.0],
                [-15.0, -15.0],
                [-h, -15.0],
                [-h, -11.0],
                [-11.0, -11.0],
                [-11.0, 11.0],
                [11.0, 11.0],
                [11.0, -11.0],
                [h, -11.0],
            ];
            let mut g = polygon(&format!("cavity(w={w})"), v, bc)?;
            g.void_box = Some([-11.0, 11.0, -11.0, 11.0]);
            Ok(g)
        }
        GeometrySpec::Circle { radius } => {
            if !(*radius > 0.0) {
                return Err(WsError::Domain("radius must be positive".into()));
            }
            let segments = (0..4)
                .map(|i| Segment::Arc {
                    center: [0.0, 0.0],
                    radius: *radius,
                    t0: i as f64 * PI / 2.0,
                    t1: (i + 1) as f64 * PI / 2.0,
                })
                .collect();
            Ok(Geometry {
                name: format!("circle(a={radius})"),
                segments,
                corners: vec![],
                graded: vec![false; 4],
                bc,
                vertices: vec![],
                void_box: None,
            })
        }
        GeometrySpec::Polyline(v) => polygon("custom", v.clone(), bc),
    }
}
