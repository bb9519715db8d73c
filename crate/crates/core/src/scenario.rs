//! Scenario runner: flat `key=value` configs, the solve → S → Q → WS modes
//! → fields → labels pipeline, and the CSV artifacts it writes.
//!
//! Config lines hold one or more whitespace-separated `key=value` pairs;
//! `#` starts a comment. Units: metres, `k` in 1/m, unit sound speed, so
//! delays are in seconds numerically equal to metres.
//!
//! Index conventions: matrix CSVs use 0-based port indices in the order of
//! `modes.csv`; WS modes are numbered from 1 in ascending delay order.

use crate::bem::{bem_scattering_on_mesh, make_geometry, mesh_geometry, BemConfig, BemScattering, Geometry, GeometrySpec};
use crate::error::{Result, WsError};
use crate::fields::{classify_modes, coefficient_fields, localization_metrics_with, GridSpec, LocalizationMetrics, ModeLabel, RegionMasks, Thresholds};
use crate::mie::{mie_smatrix, mie_smatrix_deriv, BoundaryCondition};
use crate::modal::{suggested_mode_count, ModeIndex, ModeSet};
use crate::volume_q::{q_matrix_volume, surface_identity_check, QuadratureSpec, VolumeStyle};
use crate::wigner_smith::{default_dk, q_matrix, q_matrix_fd_adaptive, q_matrix_tagged, smatrix_fd_derivative, validate_smatrix, ws_decompose, CMat, Provenance, SMatrix};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Sphere,
    Cylinder,
    Strip,
    Cavity,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    VolumeQ,
    SurfaceIdentity,
    Simdiag,
}

impl Check {
    pub fn parse(s: &str) -> Option<Check> {
        match s {
            "volume-q" => Some(Check::VolumeQ),
            // older name of the same check
            "surface-identity" | "appendix-b" => Some(Check::SurfaceIdentity),
            "simdiag" => Some(Check::Simdiag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub bc: BoundaryCondition,
    pub k: f64,
    /// Sphere or cylinder radius.
    pub a: Option<f64>,
    /// Cavity gap width.
    pub w: Option<f64>,
    /// Closed polygon for `custom`.
    pub polyline: Option<Vec<[f64; 2]>>,
    pub mode_count: Option<usize>,
    /// Constant of the mode count rule, used when `M` is absent.
    pub c: f64,
    pub dk: Option<f64>,
    pub richardson: bool,
    pub bem: BemConfig,
    pub grid: Option<GridSpec>,
    pub out: PathBuf,
    pub checks: Vec<Check>,
    /// WS modes (1-based) whose fields are exported.
    pub field_modes: Vec<usize>,
    pub thresholds: Thresholds,
    /// Outer radius of the volume and surface checks.
    pub check_radius: Option<f64>,
    pub seed: Option<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: ScenarioKind::Sphere,
            bc: BoundaryCondition::SoundSoft,
            k: 1.0,
            a: None,
            w: None,
            polyline: None,
            mode_count: None,
            c: 3.7,
            dk: None,
            richardson: false,
            bem: BemConfig::default(),
            grid: None,
            out: PathBuf::from("ws-out"),
            checks: Vec::new(),
            field_modes: Vec::new(),
            thresholds: Thresholds::default(),
            check_radius: None,
            seed: None,
        }
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(WsError::Parse { location: format!("line {line}"), msg: msg.into() })
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().or_else(|_| parse_err(line, format!("invalid value {v:?} for {key}")))
}

fn positive(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(line, key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return parse_err(line, format!("{key} must be positive, got {v}"));
    }
    Ok(x)
}

/// `x,y` rows (optional header) describing a closed polygon.
pub fn read_polyline(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = fs::read_to_string(path)?;
    let mut v = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with('x') {
            continue;
        }
        let loc = || format!("{}:{}", path.display(), i + 1);
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(WsError::Parse { location: loc(), msg: "expected `x,y`".into() });
        }
        let p: Vec<f64> = parts
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| WsError::Parse { location: loc(), msg: format!("bad number {s:?}") }))
            .collect::<Result<_>>()?;
        v.push([p[0], p[1]]);
    }
    if v.len() < 3 {
        return Err(WsError::Parse { location: path.display().to_string(), msg: "polygon needs at least 3 vertices".into() });
    }
    Ok(v)
}

impl ScenarioConfig {
    /// Parse config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = BTreeMap::new();
        let (mut half, mut npts) = (None, None);
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("");
            for pair in line.split_whitespace() {
                let Some((key, v)) = pair.split_once('=') else {
                    return parse_err(ln, format!("expected key=value, got {pair:?}"));
                };
                if let Some(prev) = seen.insert(key.to_string(), ln) {
                    return parse_err(ln, format!("{key} already set on line {prev}"));
                }
                match key {
                    "scenario" => {
                        cfg.scenario = match v {
                            "sphere" => ScenarioKind::Sphere,
                            "cylinder" => ScenarioKind::Cylinder,
                            "strip" => ScenarioKind::Strip,
                            "cavity" => ScenarioKind::Cavity,
                            "custom" => ScenarioKind::Custom,
                            _ => return parse_err(ln, format!("unknown scenario {v:?}")),
                        }
                    }
                    "bc" => {
                        cfg.bc = match v {
                            "soft" => BoundaryCondition::SoundSoft,
                            "hard" => BoundaryCondition::SoundHard,
                            _ => return parse_err(ln, format!("bc must be soft or hard, got {v:?}")),
                        }
                    }
                    "k" => cfg.k = positive(ln, key, v)?,
                    "a" => cfg.a = Some(positive(ln, key, v)?),
                    "w" => cfg.w = Some(positive(ln, key, v)?),
                    "polyline" => cfg.polyline = Some(read_polyline(&base.join(v))?),
                    "M" => cfg.mode_count = Some(num(ln, key, v)?),
                    "c" => cfg.c = positive(ln, key, v)?,
                    "dk" => cfg.dk = Some(positive(ln, key, v)?),
                    "richardson" => cfg.richardson = num(ln, key, v)?,
                    "nodes_per_wavelength" => cfg.bem.nodes_per_wavelength = positive(ln, key, v)?,
                    "grading" => cfg.bem.grading = positive(ln, key, v)?,
                    "gate" => cfg.bem.gate = positive(ln, key, v)?,
                    "grid_half" => half = Some(positive(ln, key, v)?),
                    "grid_n" => npts = Some(num::<usize>(ln, key, v)?),
                    "out" => cfg.out = base.join(v),
                    "checks" => {
                        for name in v.split(',').filter(|s| !s.is_empty()) {
                            match Check::parse(name) {
                                Some(c) => cfg.checks.push(c),
                                None => return parse_err(ln, format!("unknown check {name:?}")),
                            }
                        }
                    }
                    "fields" => cfg.field_modes = parse_index_list(v).or_else(|m| parse_err(ln, m))?,
                    "tau0" => cfg.thresholds.tau0 = positive(ln, key, v)?,
                    "tau_b" => cfg.thresholds.tau_b = positive(ln, key, v)?,
                    "beta_factor" => cfg.thresholds.beta_factor = positive(ln, key, v)?,
                    "dominance" => cfg.thresholds.dominance = positive(ln, key, v)?,
                    "check_radius" => cfg.check_radius = Some(positive(ln, key, v)?),
                    "seed" => cfg.seed = Some(num(ln, key, v)?),
                    _ => return parse_err(ln, format!("unknown key {key:?}")),
                }
            }
        }
        if !seen.contains_key("scenario") {
            return parse_err(text.lines().count().max(1), "missing required key scenario");
        }
        if !seen.contains_key("bc") {
            return parse_err(text.lines().count().max(1), "missing required key bc");
        }
        let at = |key: &str| seen.get(key).copied().unwrap_or(1);
        match cfg.scenario {
            ScenarioKind::Sphere | ScenarioKind::Cylinder if cfg.a.is_none() => {
                return parse_err(at("scenario"), "sphere and cylinder scenarios need a radius a");
            }
            ScenarioKind::Cavity if cfg.w.is_none() => return parse_err(at("scenario"), "cavity scenario needs a gap width w"),
            ScenarioKind::Custom if cfg.polyline.is_none() => return parse_err(at("scenario"), "custom scenario needs a polyline file"),
            _ => {}
        }
        if let Some(m) = cfg.mode_count {
            let ok = match cfg.scenario {
                ScenarioKind::Sphere => m > 0 && (m as f64).sqrt().round().powi(2) as usize == m,
                _ => m % 2 == 1,
            };
            if !ok {
                return parse_err(at("M"), format!("M={m} is not a valid mode count (odd in 2D, a square in 3D)"));
            }
        }
        if half.is_some() || npts.is_some() {
            let h = half.unwrap_or_else(|| default_grid_half(&cfg));
            let n = npts.unwrap_or(301);
            cfg.grid = Some(GridSpec::square(h, n).or_else(|e| parse_err(at("grid_n").max(at("grid_half")), e.to_string()))?);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        ScenarioConfig::parse(&text, base).map_err(|e| match e {
            WsError::Parse { location, msg } => WsError::Parse { location: format!("{}: {location}", path.display()), msg },
            other => other,
        })
    }

    pub fn dim(&self) -> usize {
        if self.scenario == ScenarioKind::Sphere {
            3
        } else {
            2
        }
    }

    fn geometry(&self) -> Result<Option<Geometry>> {
        let spec = match self.scenario {
            ScenarioKind::Sphere => return Ok(None),
            ScenarioKind::Cylinder => GeometrySpec::Circle { radius: self.a.unwrap_or(1.0) },
            ScenarioKind::Strip => GeometrySpec::Strip,
            ScenarioKind::Cavity => GeometrySpec::Cavity { w: self.w.unwrap_or(3.0) },
            ScenarioKind::Custom => GeometrySpec::Polyline(self.polyline.clone().unwrap_or_default()),
        };
        make_geometry(&spec, self.bc).map(Some)
    }

    fn modes(&self, g: Option<&Geometry>) -> Result<ModeSet> {
        let m = match self.mode_count {
            Some(m) => m,
            None => {
                let a = g.map(Geometry::circumradius).or(self.a).unwrap_or(1.0);
                suggested_mode_count(self.dim(), self.k, a, self.c)?
            }
        };
        if self.dim() == 3 {
            let l = (m as f64).sqrt().round() as usize;
            Ok(ModeSet::spherical(l - 1, self.k))
        } else {
            ModeSet::cylindrical_count(m, self.k)
        }
    }
}

fn default_grid_half(cfg: &ScenarioConfig) -> f64 {
    match cfg.scenario {
        ScenarioKind::Strip => 40.0,
        ScenarioKind::Cavity => 25.0,
        _ => 3.0 * cfg.a.unwrap_or(10.0),
    }
}

/// Comma-separated positive integers.
pub fn parse_index_list(v: &str) -> std::result::Result<Vec<usize>, String> {
    v.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| match s.trim().parse::<usize>() {
            Ok(i) if i > 0 => Ok(i),
            _ => Err(format!("mode indices are positive integers, got {s:?}")),
        })
        .collect()
}

/// CSV `row,col,re,im`, row-major, 17 significant digits.
pub fn write_complex_matrix(path: &Path, m: &CMat) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    write_complex_matrix_to(&mut f, m)?;
    f.flush()?;
    Ok(())
}

pub fn write_complex_matrix_to<W: Write>(out: &mut W, m: &CMat) -> std::io::Result<()> {
    writeln!(out, "row,col,re,im")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            writeln!(out, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn read_complex_matrix(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path)?;
    parse_complex_matrix(&text).map_err(|e| match e {
        WsError::Parse { location, msg } => WsError::Parse { location: format!("{}:{location}", path.display()), msg },
        other => other,
    })
}

pub fn parse_complex_matrix(text: &str) -> Result<CMat> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "row,col,re,im" => {}
        _ => return Err(WsError::Parse { location: "1".into(), msg: "expected header row,col,re,im".into() }),
    }
    let mut entries = Vec::new();
    let (mut nr, mut nc) = (0usize, 0usize);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| WsError::Parse { location: format!("{}", i + 1), msg: msg.into() };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let r: usize = f[0].trim().parse().map_err(|_| bad("bad row index"))?;
        let c: usize = f[1].trim().parse().map_err(|_| bad("bad column index"))?;
        let re: f64 = f[2].trim().parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = f[3].trim().parse().map_err(|_| bad("bad imaginary part"))?;
        nr = nr.max(r + 1);
        nc = nc.max(c + 1);
        entries.push((r, c, C64::new(re, im)));
    }
    if entries.len() != nr * nc {
        return Err(WsError::Parse { location: "end".into(), msg: format!("{} entries for a {nr}x{nc} matrix", entries.len()) });
    }
    let mut m = CMat::zeros(nr, nc);
    let mut seen = vec![false; nr * nc];
    for (r, c, z) in entries {
        if std::mem::replace(&mut seen[r * nc + c], true) {
            return Err(WsError::Parse { location: format!("entry ({r},{c})"), msg: "duplicate entry".into() });
        }
        m[(r, c)] = z;
    }
    Ok(m)
}

/// One gate line of the report.
#[derive(Debug, Clone)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Gate {
    pub fn pass(&self) -> bool {
        self.value <= self.limit
    }
}

/// Everything a run produced, also written to disk.
pub struct ScenarioOutcome {
    pub smatrix: SMatrix,
    pub delays: Vec<f64>,
    pub w: CMat,
    pub labels: Vec<ModeLabel>,
    pub metrics: Vec<Option<LocalizationMetrics>>,
    pub gates: Vec<Gate>,
    /// Informational values (`key=value` in the report, not gated).
    pub info: Vec<(String, String)>,
    pub bem: Option<BemScattering>,
}

impl ScenarioOutcome {
    pub fn pass(&self) -> bool {
        self.gates.iter().all(Gate::pass)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

/// Step reductions allowed when the finite-difference `Q` is not Hermitian
/// enough.
const MAX_STEP_REFINEMENTS: usize = 4;

/// Observed order of the central difference from steps `h, h/2, h/4`.
fn fd_order<F>(mut provider: F, k: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<SMatrix>,
{
    let d: Vec<CMat> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&step| smatrix_fd_derivative(&mut provider, k, step, false).map(|s| s.data))
        .collect::<Result<_>>()?;
    let e1 = (&d[0] - &d[1]).norm();
    let e2 = (&d[1] - &d[2]).norm();
    Ok((e1 / e2).log2())
}

/// Run a scenario and write its artifacts into `cfg.out`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let g = cfg.geometry()?;
    let modes = cfg.modes(g.as_ref())?;
    let k = cfg.k;
    let gate = cfg.bem.gate;
    let mut gates = Vec::new();
    let mut info: Vec<(String, String)> = vec![
        ("scenario".into(), format!("{:?}", cfg.scenario).to_lowercase()),
        ("bc".into(), cfg.bc.as_str().into()),
        ("k".into(), format!("{k}")),
        ("M".into(), modes.len().to_string()),
        ("basis_origin".into(), "0,0,0".into()),
    ];
    if let Some(seed) = cfg.seed {
        info.push(("seed".into(), seed.to_string()));
    }
    let dk = cfg.dk.unwrap_or_else(|| default_dk(k));

    let (s, sp, bem) = match &g {
        None => {
            let a = cfg.a.unwrap_or(1.0);
            let s = mie_smatrix(3, cfg.bc, k, a, &modes)?;
            let sp = mie_smatrix_deriv(3, cfg.bc, k, a, &modes)?;
            (s, sp, None)
        }
        Some(g) => {
            let mesh = mesh_geometry(g, k, cfg.bem.nodes_per_wavelength, cfg.bem.grading)?;
            info.push(("nodes".into(), mesh.len().to_string()));
            let sc = bem_scattering_on_mesh(&mesh, cfg.bc, k, &modes, &cfg.bem)?;
            let provider = |kk: f64| Ok(bem_scattering_on_mesh(&mesh, cfg.bc, kk, &modes, &cfg.bem)?.smatrix);
            let (_, sp, step) = q_matrix_fd_adaptive(provider, &sc.smatrix, dk, 0.1 * gate, MAX_STEP_REFINEMENTS)?;
            let sp = if cfg.richardson {
                let provider = |kk: f64| Ok(bem_scattering_on_mesh(&mesh, cfg.bc, kk, &modes, &cfg.bem)?.smatrix);
                smatrix_fd_derivative(provider, k, step, true)?
            } else {
                sp
            };
            info.push(("fd_step".into(), format!("{step:.6e}")));
            (sc.smatrix.clone(), sp, Some((sc, mesh, step)))
        }
    };
    let rep = validate_smatrix(&s, gate);
    gates.push(Gate { name: "unitarity".into(), value: rep.unitarity, limit: gate });
    gates.push(Gate { name: "symmetry".into(), value: rep.symmetry, limit: gate });

    let q = if bem.is_some() { q_matrix_tagged(&s, &sp, Provenance::FiniteDifference)? } else { q_matrix(&s, &sp)? };
    gates.push(Gate { name: "hermiticity".into(), value: q.hermiticity_residual, limit: gate });
    info.push(("reciprocity_projection".into(), format!("{:.6e}", q.reciprocity_residual)));
    info.push(("provenance".into(), q.provenance.as_str().into()));
    let d = ws_decompose(&q, &s)?;
    let qmax = d.delays.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    gates.push(Gate { name: "simdiag".into(), value: d.simdiag_residual(), limit: 10.0 * gate });
    gates.push(Gate { name: "orthonormality".into(), value: d.orthonormality_residual(), limit: 1e-10 });
    gates.push(Gate { name: "reconstruction".into(), value: d.reconstruction_residual(&q), limit: 1e-10 });
    gates.push(Gate { name: "diagonal_identity".into(), value: d.diagonal_identity_residual(&q) / qmax, limit: 1e-10 });
    let diag_imag = (0..q.data.nrows()).map(|i| q.data[(i, i)].im.abs()).fold(0.0, f64::max);
    gates.push(Gate { name: "diagonal_imag".into(), value: diag_imag, limit: 1e-12 * qmax });

    if let Some((_, mesh, step)) = &bem {
        let order = fd_order(|kk| Ok(bem_scattering_on_mesh(mesh, cfg.bc, kk, &modes, &cfg.bem)?.smatrix), k, 4.0 * step)?;
        info.push(("fd_order".into(), format!("{order:.6}")));
        gates.push(Gate { name: "fd_order_deviation".into(), value: (order - 2.0).abs(), limit: 0.5 });
        if cfg.scenario == ScenarioKind::Cylinder {
            let m = mie_smatrix(2, cfg.bc, k, cfg.a.unwrap_or(1.0), &modes)?;
            let dev = (&s.data - &m.data).iter().map(|z| z.norm()).fold(0.0, f64::max);
            gates.push(Gate { name: "closed_form_deviation".into(), value: dev, limit: 0.1 * gate });
        }
    }

    let radius = cfg.check_radius.unwrap_or(200.0 / k);
    for check in &cfg.checks {
        match check {
            Check::Simdiag => {
                gates.push(Gate { name: "unimodularity".into(), value: d.unimodularity_residual(), limit: 10.0 * gate });
            }
            Check::VolumeQ | Check::SurfaceIdentity if cfg.scenario != ScenarioKind::Sphere => {
                return Err(WsError::Contract(format!("check {check:?} is implemented for the sphere only")));
            }
            Check::VolumeQ => {
                let a = cfg.a.unwrap_or(1.0);
                let quad = QuadratureSpec::new(radius);
                let reference = q_matrix(&s, &sp)?;
                let scale = reference.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
                for style in [VolumeStyle::Symmetric, VolumeStyle::A, VolumeStyle::B] {
                    let v = q_matrix_volume(style, cfg.bc, k, a, &modes, &quad)?;
                    let err = (&v.data - &reference.data).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
                    gates.push(Gate { name: format!("route_equivalence_{}", style.as_str()), value: err, limit: 1e-3 });
                }
            }
            Check::SurfaceIdentity => {
                let a = cfg.a.unwrap_or(1.0);
                let (mut alg, mut num) = (0.0f64, 0.0f64);
                let lmax = modes.modes.iter().map(ModeIndex::order).max().unwrap_or(0).min(3);
                for l in 0..=lmax {
                    let p = ModeIndex::Sph { l, m: 0 };
                    let r = surface_identity_check(p, p, cfg.bc, k, a, radius)?;
                    alg = alg.max(r.closed_vs_rhs / r.rhs.norm().max(1.0));
                    num = num.max(r.numeric_vs_closed);
                }
                gates.push(Gate { name: "surface_closed_vs_rhs".into(), value: alg, limit: 1e-12 });
                gates.push(Gate { name: "surface_numeric_vs_closed".into(), value: num, limit: 1e-2 });
            }
        }
    }

    // fields and labels
    let m = modes.len();
    let mut metrics: Vec<Option<LocalizationMetrics>> = vec![None; m];
    let mut field_grids = Vec::new();
    for &i in &cfg.field_modes {
        if i > m {
            return Err(WsError::Domain(format!("requested WS mode {i} but only {m} exist")));
        }
    }
    if let Some((sc, ..)) = &bem {
        let grid = match cfg.grid {
            Some(gs) => gs,
            None => GridSpec::square(default_grid_half(cfg), 301)?,
        };
        let masks = RegionMasks::new(&grid, &sc.mesh().geometry, k);
        let fields = coefficient_fields(sc, &d.w, &grid)?;
        for (i, f) in fields.iter().enumerate() {
            metrics[i] = Some(localization_metrics_with(f, &masks));
        }
        for &i in &cfg.field_modes {
            field_grids.push((i, fields[i - 1].clone()));
        }
    }
    let labels = if bem.is_some() {
        let mv: Vec<LocalizationMetrics> = metrics.iter().map(|x| x.expect("metrics computed")).collect();
        let cls = classify_modes(&d.delays, &mv, &cfg.thresholds)?;
        for label in [ModeLabel::Corner, ModeLabel::Ballistic, ModeLabel::SurfaceWave, ModeLabel::NonPropagating, ModeLabel::Cavity] {
            info.push((format!("count_{}", label.as_str()), cls.count(label).to_string()));
        }
        info.push(("count_warnings".into(), cls.modes.iter().filter(|c| c.warning).count().to_string()));
        cls.modes.iter().map(|c| c.label).collect()
    } else {
        Vec::new()
    };

    fs::create_dir_all(&cfg.out)?;
    write_complex_matrix(&cfg.out.join("smatrix.csv"), &s.data)?;
    write_complex_matrix(&cfg.out.join("sprime.csv"), &sp.data)?;
    write_complex_matrix(&cfg.out.join("qmatrix.csv"), &q.data)?;
    write_complex_matrix(&cfg.out.join("wmatrix.csv"), &d.w)?;
    fs::write(cfg.out.join("modes.csv"), modes.to_csv())?;
    let mut spec = String::from("index,delay\n");
    for (i, x) in d.delays.iter().enumerate() {
        writeln!(spec, "{},{:.16e}", i + 1, x).expect("string write");
    }
    fs::write(cfg.out.join("spectrum.csv"), spec)?;
    let mut cls = String::from("index,delay,label,boundary,corner,edge,interior\n");
    for i in 0..m {
        let label = labels.get(i).map(ModeLabel::as_str).unwrap_or("");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mt = metrics[i];
        writeln!(
            cls,
            "{},{:.16e},{label},{},{},{},{}",
            i + 1,
            d.delays[i],
            fmt(mt.map(|x| x.boundary)),
            fmt(mt.map(|x| x.corner)),
            fmt(mt.map(|x| x.edge)),
            fmt(mt.and_then(|x| x.interior))
        )
        .expect("string write");
    }
    fs::write(cfg.out.join("classification.csv"), cls)?;
    if let Some((sc, ..)) = &bem {
        sc.mesh().write_csv(BufWriter::new(fs::File::create(cfg.out.join("mesh.csv"))?))?;
    }
    for (i, f) in &field_grids {
        let mut wtr = BufWriter::new(fs::File::create(cfg.out.join(format!("field_mode_{i}.csv")))?);
        f.write_csv(&mut wtr)?;
        wtr.flush()?;
    }

    let outcome = ScenarioOutcome {
        smatrix: s,
        delays: d.delays.clone(),
        w: d.w.clone(),
        labels,
        metrics,
        gates,
        info,
        bem: bem.map(|(sc, ..)| sc),
    };
    fs::write(cfg.out.join("report.txt"), report_text(&outcome))?;
    Ok(outcome)
}

/// `gate=value` lines plus `<gate>_limit` and a final `pass` line.
pub fn report_text(o: &ScenarioOutcome) -> String {
    let mut r = String::from("# units: metres, k in 1/m, sound speed 1 m/s, delays in s (numerically metres)\n");
    for (k, v) in &o.info {
        writeln!(r, "{k}={v}").expect("string write");
    }
    for g in &o.gates {
        writeln!(r, "{}={:.6e}", g.name, g.value).expect("string write");
        writeln!(r, "{}_limit={:.1e}", g.name, g.limit).expect("string write");
    }
    let failed: Vec<&str> = o.gates.iter().filter(|g| !g.pass()).map(|g| g.name.as_str()).collect();
    writeln!(r, "failed={}", failed.join(",")).expect("string write");
    writeln!(r, "pass={}", failed.is_empty()).expect("string write");
    r
}
