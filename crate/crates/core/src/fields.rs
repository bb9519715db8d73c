//! Total fields of WS modes on Cartesian grids, localization metrics and
//! phenomenological mode labels.
//!
//! A WS mode is the incoming pattern `Σ_n W_ni (incoming wave n)`. By
//! linearity its total field is the same combination of the per-excitation
//! total fields, so every grid point needs one boundary quadrature row that
//! is then applied to all requested modes at once.

use crate::bem::geometry::{dist, Geometry, P2};
use crate::bem::mesh::PANEL_ORDER;
use crate::bem::operators::{is_near, kernels, near_weights, NearRule};
use crate::bem::solver::{excitation_amplitude, regular_waves, BemScattering};
use crate::error::{Result, WsError};
use crate::linalg::cgemm;
use crate::mie::BoundaryCondition;
use crate::modal::ModeIndex;
use crate::wigner_smith::CMat;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::io::Write;

/// Rows of grid points evaluated per block product.
const BLOCK: usize = 512;

/// Regular grid of `nx × ny` points starting at `origin` (lower left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: P2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// `n × n` points covering `[-half, half]²`.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        if !(half > 0.0) || n < 2 {
            return Err(WsError::Domain(format!("grid needs half-width > 0 and n ≥ 2, got {half}, {n}")));
        }
        Ok(GridSpec { origin: [-half, -half], spacing: 2.0 * half / (n - 1) as f64, nx: n, ny: n })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `idx` in row-major order (x fastest).
    pub fn point(&self, idx: usize) -> P2 {
        let (i, j) = (idx % self.nx, idx / self.nx);
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }
}

/// Complex total field samples; points inside the obstacle are masked and
/// hold zero.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<C64>,
    pub masked: Vec<bool>,
}

impl FieldGrid {
    /// CSV `x,y,re,im,masked`, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,re,im,masked")?;
        for (idx, (v, &m)) in self.values.iter().zip(&self.masked).enumerate() {
            let p = self.spec.point(idx);
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{}", p[0], p[1], v.re, v.im, m as u8)?;
        }
        Ok(())
    }

    /// `Σ |φ|²` over unmasked points.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Total fields for each column of `coeffs` (incoming-mode weights, one
/// column per requested field).
pub fn coefficient_fields(sc: &BemScattering, coeffs: &CMat, grid: &GridSpec) -> Result<Vec<FieldGrid>> {
    let m = sc.modes.len();
    if coeffs.nrows() != m {
        return Err(WsError::Contract(format!("coefficient rows {} differ from mode count {m}", coeffs.nrows())));
    }
    if sc.densities.ncols() != m {
        return Err(WsError::Contract("missing cached boundary solutions".into()));
    }
    let mesh = sc.mesh();
    let g = &mesh.geometry;
    let k = sc.smatrix.k;
    let bc = sc.system.bc;
    let n = mesh.len();
    let c = coeffs.ncols();
    let orders: Vec<i32> = sc
        .modes
        .modes
        .iter()
        .map(|p| match p {
            ModeIndex::Cyl { n } => Ok(*n),
            ModeIndex::Sph { .. } => Err(WsError::Contract("fields need a 2D mode set".into())),
        })
        .collect::<Result<_>>()?;
    let nmax = orders.iter().map(|o| o.unsigned_abs() as usize).max().unwrap_or(0);
    // incoming weights folded into the regular-wave amplitudes
    let inc = CMat::from_fn(2 * nmax + 1, c, |row, col| {
        let order = row as i32 - nmax as i32;
        match orders.iter().position(|&o| o == order) {
            Some(p) => excitation_amplitude(order, k) * coeffs[(p, col)],
            None => C64::new(0.0, 0.0),
        }
    });
    let dens = cgemm(&sc.densities, coeffs);
    let mut src = CMat::zeros(n + 2 * nmax + 1, c);
    src.view_mut((0, 0), (n, c)).copy_from(&dens);
    src.view_mut((n, 0), (2 * nmax + 1, c)).copy_from(&inc);

    let rule = NearRule::new(mesh);
    let mut wbuf = [[C64::new(0.0, 0.0); 5]; PANEL_ORDER];
    let mut grids: Vec<FieldGrid> =
        (0..c).map(|_| FieldGrid { spec: *grid, values: vec![C64::new(0.0, 0.0); grid.len()], masked: vec![false; grid.len()] }).collect();
    let total = grid.len();
    let mut start = 0;
    while start < total {
        let end = (start + BLOCK).min(total);
        let mut rows = CMat::zeros(end - start, n + 2 * nmax + 1);
        for idx in start..end {
            let x = grid.point(idx);
            if g.contains(x) || g.distance_to_boundary(x) < 1e-12 {
                for f in grids.iter_mut() {
                    f.masked[idx] = true;
                }
                continue;
            }
            let r = idx - start;
            for panel in &mesh.panels {
                if is_near(mesh, panel, x) {
                    near_weights(mesh, &rule, panel, x, [0.0, 0.0], None, &mut wbuf);
                    for (jj, wv) in wbuf.iter().enumerate() {
                        rows[(r, panel.first + jj)] = match bc {
                            BoundaryCondition::SoundSoft => -wv[0],
                            BoundaryCondition::SoundHard => wv[2],
                        };
                    }
                } else {
                    for j in panel.first..panel.first + PANEL_ORDER {
                        let nd = &mesh.nodes[j];
                        let kv = kernels(k, x, [0.0, 0.0], nd.x, nd.n);
                        rows[(r, j)] = match bc {
                            BoundaryCondition::SoundSoft => -kv[0] * nd.w,
                            BoundaryCondition::SoundHard => kv[2] * (nd.w * nd.speed),
                        };
                    }
                }
            }
            for (o, (v, _)) in regular_waves(nmax, k, x).into_iter().enumerate() {
                rows[(r, n + o)] = v;
            }
        }
        let vals = cgemm(&rows, &src);
        for idx in start..end {
            if grids[0].masked[idx] {
                continue;
            }
            for (col, f) in grids.iter_mut().enumerate() {
                f.values[idx] = vals[(idx - start, col)];
            }
        }
        start = end;
    }
    Ok(grids)
}

/// Total field of WS mode `i` (column `i` of `w`).
pub fn ws_mode_field(sc: &BemScattering, w: &CMat, i: usize, grid: &GridSpec) -> Result<FieldGrid> {
    if i >= w.ncols() {
        return Err(WsError::Contract(format!("mode {i} out of range {}", w.ncols())));
    }
    let col = w.columns(i, 1).into_owned();
    Ok(coefficient_fields(sc, &col, grid)?.remove(0))
}

/// Shares of the grid energy `Σ|φ|²` in characteristic regions, all within
/// one wavelength: of the outline (`boundary`), of a corner vertex
/// (`corner`), of the outline but away from corners (`edge`), and inside the
/// cavity void (`interior`). `*_baseline` are the shares a uniform field
/// would have (unmasked point counts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationMetrics {
    pub boundary: f64,
    pub corner: f64,
    pub edge: f64,
    pub interior: Option<f64>,
    pub boundary_baseline: f64,
    pub interior_baseline: Option<f64>,
}

/// Per-point region flags for a grid, reusable across modes.
#[derive(Debug, Clone)]
pub struct RegionMasks {
    pub boundary: Vec<bool>,
    pub corner: Vec<bool>,
    pub interior: Vec<bool>,
    pub has_void: bool,
}

impl RegionMasks {
    pub fn new(grid: &GridSpec, g: &Geometry, k: f64) -> Self {
        let lambda = 2.0 * PI / k;
        let mut m = RegionMasks {
            boundary: vec![false; grid.len()],
            corner: vec![false; grid.len()],
            interior: vec![false; grid.len()],
            has_void: g.void_box.is_some(),
        };
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            m.boundary[idx] = g.distance_to_boundary(x) <= lambda;
            m.corner[idx] = g.corners.iter().any(|&c| dist(c, x) <= lambda);
            if let Some([x0, x1, y0, y1]) = g.void_box {
                m.interior[idx] = x[0] > x0 && x[0] < x1 && x[1] > y0 && x[1] < y1 && !g.contains(x);
            }
        }
        m
    }
}

pub fn localization_metrics(f: &FieldGrid, g: &Geometry, k: f64) -> LocalizationMetrics {
    localization_metrics_with(f, &RegionMasks::new(&f.spec, g, k))
}

pub fn localization_metrics_with(f: &FieldGrid, masks: &RegionMasks) -> LocalizationMetrics {
    let (mut tot, mut b, mut c, mut e, mut i) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut n_tot, mut n_b, mut n_i) = (0usize, 0usize, 0usize);
    for idx in 0..f.values.len() {
        if f.masked[idx] {
            continue;
        }
        let p = f.values[idx].norm_sqr();
        tot += p;
        n_tot += 1;
        if masks.boundary[idx] {
            b += p;
            n_b += 1;
            if !masks.corner[idx] {
                e += p;
            }
        }
        if masks.corner[idx] {
            c += p;
        }
        if masks.interior[idx] {
            i += p;
            n_i += 1;
        }
    }
    let share = |v: f64| if tot > 0.0 { v / tot } else { 0.0 };
    let count = |v: usize| if n_tot > 0 { v as f64 / n_tot as f64 } else { 0.0 };
    LocalizationMetrics {
        boundary: share(b),
        corner: share(c),
        edge: share(e),
        interior: masks.has_void.then(|| share(i)),
        boundary_baseline: count(n_b),
        interior_baseline: masks.has_void.then(|| count(n_i)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    Corner,
    Ballistic,
    SurfaceWave,
    NonPropagating,
    Cavity,
}

impl ModeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeLabel::Corner => "corner",
            ModeLabel::Ballistic => "ballistic",
            ModeLabel::SurfaceWave => "surface-wave",
            ModeLabel::NonPropagating => "non-propagating",
            ModeLabel::Cavity => "cavity",
        }
    }
}

/// Classification thresholds. A region "dominates" when it holds at least
/// `dominance` of the reference energy: the near-boundary energy for
/// corners, the whole grid energy for the cavity interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub tau0: f64,
    pub tau_b: f64,
    /// `β₀` as a multiple of the uniform-field boundary share.
    pub beta_factor: f64,
    pub dominance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau0: 0.5, tau_b: 3.0, beta_factor: 1.0, dominance: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeClass {
    pub label: ModeLabel,
    pub delay: f64,
    pub metrics: LocalizationMetrics,
    /// Set when no rule matched and the label was picked from the delay alone.
    pub warning: bool,
}

#[derive(Debug, Clone)]
pub struct ModeClassification {
    pub modes: Vec<ModeClass>,
}

impl ModeClassification {
    pub fn count(&self, label: ModeLabel) -> usize {
        self.modes.iter().filter(|m| m.label == label).count()
    }

    /// CSV `index,delay,label,boundary,corner,edge,interior,warning`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,delay,label,boundary,corner,edge,interior,warning")?;
        for (i, m) in self.modes.iter().enumerate() {
            let interior = m.metrics.interior.map(|v| format!("{v:.17e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:.17e},{},{:.17e},{:.17e},{:.17e},{},{}",
                i + 1,
                m.delay,
                m.label.as_str(),
                m.metrics.boundary,
                m.metrics.corner,
                m.metrics.edge,
                interior,
                m.warning as u8
            )?;
        }
        Ok(())
    }
}

fn classify_one(delay: f64, m: &LocalizationMetrics, t: &Thresholds) -> (ModeLabel, bool) {
    let beta0 = t.beta_factor * m.boundary_baseline;
    let excites = m.boundary > beta0;
    let corner_dom = m.corner >= t.dominance * m.boundary;
    let interior_dom = m.interior.is_some_and(|v| v >= t.dominance);
    if delay > t.tau0 {
        if interior_dom {
            return (ModeLabel::Cavity, false);
        }
        if excites {
            return (ModeLabel::SurfaceWave, false);
        }
        let nearest = if m.interior.is_some_and(|v| v > m.boundary) { ModeLabel::Cavity } else { ModeLabel::SurfaceWave };
        return (nearest, true);
    }
    if delay < -t.tau0 && corner_dom && excites {
        return (ModeLabel::Corner, false);
    }
    if delay.abs() <= t.tau0 && !excites {
        return (ModeLabel::NonPropagating, false);
    }
    if delay >= -t.tau_b && excites && !corner_dom {
        return (ModeLabel::Ballistic, false);
    }
    let nearest = if delay < -t.tau_b {
        ModeLabel::Corner
    } else if delay < -t.tau0 {
        ModeLabel::Ballistic
    } else {
        ModeLabel::NonPropagating
    };
    (nearest, true)
}

pub fn classify_modes(delays: &[f64], metrics: &[LocalizationMetrics], thresholds: &Thresholds) -> Result<ModeClassification> {
    if delays.len() != metrics.len() {
        return Err(WsError::Contract(format!("{} delays but {} metric sets", delays.len(), metrics.len())));
    }
    let modes = delays
        .iter()
        .zip(metrics)
        .map(|(&delay, m)| {
            let (label, warning) = classify_one(delay, m, thresholds);
            ModeClass { label, delay, metrics: *m, warning }
        })
        .collect();
    Ok(ModeClassification { modes })
}

/// Metrics of every WS mode (columns of `w`) on one grid.
pub fn all_mode_metrics(sc: &BemScattering, w: &CMat, grid: &GridSpec) -> Result<Vec<LocalizationMetrics>> {
    let masks = RegionMasks::new(grid, &sc.mesh().geometry, sc.smatrix.k);
    let fields = coefficient_fields(sc, w, grid)?;
    Ok(fields.iter().map(|f| localization_metrics_with(f, &masks)).collect())
}
