//! Combined-field boundary integral solves and S-matrix assembly.

use super::geometry::{Geometry, P2};
use super::mesh::{mesh_geometry, BoundaryMesh};
use super::operators::{junction_terms, panel_derivative, Operators};
use crate::linalg::cgemm;
use crate::error::{Result, WsError};
use crate::mie::{free_smatrix, BoundaryCondition};
use crate::modal::{gamma2d, jpow, ModeIndex, ModeSet};
use crate::wigner_smith::{validate_smatrix, CMat, SMatrix};
use nalgebra::LU;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const J: C64 = C64::new(0.0, 1.0);

/// Discretization and quality settings.
#[derive(Debug, Clone, Copy)]
pub struct BemConfig {
    pub nodes_per_wavelength: f64,
    pub grading: f64,
    /// Unitarity/symmetry gate on produced S-matrices.
    pub gate: f64,
    /// Relative residual allowed in the linear solve.
    pub solve_tolerance: f64,
}

impl Default for BemConfig {
    fn default() -> Self {
        BemConfig { nodes_per_wavelength: 12.0, grading: 3.0, gate: 1e-3, solve_tolerance: 1e-8 }
    }
}

/// Incident field value and gradient at a point.
pub type Incident<'a> = &'a dyn Fn(P2) -> (C64, [C64; 2]);

/// Nodal unknowns for one excitation. Sound-soft: `∂u/∂n · |x'|`;
/// sound-hard: total field `u`.
#[derive(Debug, Clone)]
pub struct BoundarySolution {
    pub density: Vec<C64>,
    pub excitation: Option<ModeIndex>,
    pub k: f64,
    pub bc: BoundaryCondition,
}

/// Assembled and factored system for one mesh.
pub struct BemSystem {
    pub mesh: BoundaryMesh,
    pub bc: BoundaryCondition,
    pub coupling: C64,
    pub matrix: CMat,
    lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    pub solve_tolerance: f64,
}

impl BemSystem {
    pub fn new(mesh: BoundaryMesh, bc: BoundaryCondition, solve_tolerance: f64) -> Result<Self> {
        let k = mesh.k;
        let n = mesh.len();
        let ops = Operators::assemble(&mesh);
        let speed: Vec<f64> = mesh.nodes.iter().map(|nd| nd.speed).collect();
        let (coupling, matrix) = match bc {
            BoundaryCondition::SoundSoft => {
                // ψ/2 + K'ψ + jk Sψ = ∂u_i/∂n + jk u_i, unknown ψ|x'|
                let c = J * k;
                let mut a = ops.kp1 + ops.s1 * c;
                for i in 0..n {
                    a.row_mut(i).iter_mut().for_each(|v| *v *= speed[i]);
                    a[(i, i)] += 0.5;
                }
                (c, a)
            }
            BoundaryCondition::SoundHard => {
                // u/2 − Ku − cTu = u_i + c ∂u_i/∂n with the Maue form
                // Tu = ∫ ∂Φ/∂t_x ∂u/∂s ds + k² ∫ Φ n_x·n_y u dσ
                let c = -J / k;
                let t = cgemm(&ops.tsp, &panel_derivative(&mesh)) + junction_terms(&mesh) + ops.nsp * C64::from(k * k);
                let mut a = -(ops.ksp + t * c);
                for i in 0..n {
                    a[(i, i)] += 0.5;
                    a.row_mut(i).iter_mut().for_each(|v| *v *= speed[i]);
                }
                (c, a)
            }
        };
        let lu = matrix.clone().lu();
        Ok(BemSystem { mesh, bc, coupling, matrix, lu, solve_tolerance })
    }

    /// Right-hand side for an incident field given at the nodes.
    fn rhs(&self, incident: Incident) -> Vec<C64> {
        self.mesh
            .nodes
            .iter()
            .map(|nd| {
                let (u, g) = incident(nd.x);
                let dn = g[0] * nd.n[0] + g[1] * nd.n[1];
                let v = match self.bc {
                    BoundaryCondition::SoundSoft => dn + self.coupling * u,
                    BoundaryCondition::SoundHard => u + self.coupling * dn,
                };
                v * row_scale(self.bc, nd.speed)
            })
            .collect()
    }

    /// Solve for several right-hand sides at once (columns of `b`).
    pub fn solve_matrix(&self, b: &CMat) -> Result<CMat> {
        let x = self.lu.solve(b).ok_or_else(|| WsError::Solver { msg: "singular system".into(), residual: f64::INFINITY })?;
        let r = (&self.matrix * &x - b).norm() / b.norm().max(1e-300);
        if !(r <= self.solve_tolerance) {
            return Err(WsError::Solver { msg: "linear solve residual above threshold".into(), residual: r });
        }
        Ok(x)
    }

    pub fn solve(&self, incident: Incident) -> Result<BoundarySolution> {
        let b = CMat::from_column_slice(self.mesh.len(), 1, &self.rhs(incident));
        let x = self.solve_matrix(&b)?;
        Ok(BoundarySolution { density: x.column(0).iter().copied().collect(), excitation: None, k: self.mesh.k, bc: self.bc })
    }
}

/// Rows are multiplied by the parametrization speed, which keeps the graded
/// system well conditioned near corners for both conditions.
fn row_scale(_bc: BoundaryCondition, speed: f64) -> f64 {
    speed
}

/// Single solve on an already meshed outline.
pub fn solve_exterior(mesh: &BoundaryMesh, bc: BoundaryCondition, incident: Incident) -> Result<BoundarySolution> {
    BemSystem::new(mesh.clone(), bc, BemConfig::default().solve_tolerance)?.solve(incident)
}

/// `J_n(kρ) e^{jnθ}` and its gradient for `n ∈ [-nmax, nmax]` at `x`,
/// indexed by `n + nmax`.
pub fn regular_waves(nmax: usize, k: f64, x: P2) -> Vec<(C64, [C64; 2])> {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let th = x[1].atan2(x[0]);
    let kr = k * rho;
    let jn: Vec<f64> = (0..=nmax + 1).map(|n| if kr > 0.0 { libm::jn(n as i32, kr) } else if n == 0 { 1.0 } else { 0.0 }).collect();
    let (c, s) = (th.cos(), th.sin());
    let mut out = vec![(C64::new(0.0, 0.0), [C64::new(0.0, 0.0); 2]); 2 * nmax + 1];
    for n in -(nmax as i32)..=nmax as i32 {
        let m = n.unsigned_abs() as usize;
        let sg = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
        let jv = sg * jn[m];
        // J_n' = (J_{n-1} − J_{n+1})/2 with J_{-1} = −J_1
        let jm1 = if m == 0 { -jn[1] } else { jn[m - 1] };
        let djv = sg * if m == 0 { -jn[1] } else { 0.5 * (jm1 - jn[m + 1]) };
        let e = C64::from_polar(1.0, n as f64 * th);
        let val = e * jv;
        // radial and angular parts of the gradient
        let dr = e * (k * djv);
        let dt = if rho > 0.0 {
            e * J * (n as f64 * jv / rho)
        } else if m == 1 {
            e * J * (n as f64 * 0.5 * k) // J_1(kρ)/ρ → k/2
        } else {
            C64::new(0.0, 0.0)
        };
        let g = [dr * c - dt * s, dr * s + dt * c];
        out[(n + nmax as i32) as usize] = (val, g);
    }
    out
}

/// Coefficient of `J_n(kρ) e^{jnθ}` in the regular free field that excites
/// port `n`: incoming wave plus its free outgoing continuation.
pub fn excitation_amplitude(n: i32, k: f64) -> C64 {
    gamma2d(n, k) * (2.0 / (2.0 * PI).sqrt())
}

/// Everything produced by a multi-excitation BEM run.
pub struct BemScattering {
    pub smatrix: SMatrix,
    pub system: BemSystem,
    /// Column `p` holds the nodal unknowns for excitation `p`.
    pub densities: CMat,
    pub modes: ModeSet,
}

impl BemScattering {
    pub fn mesh(&self) -> &BoundaryMesh {
        &self.system.mesh
    }

    pub fn solution(&self, p: usize) -> BoundarySolution {
        BoundarySolution {
            density: self.densities.column(p).iter().copied().collect(),
            excitation: Some(self.modes.modes[p]),
            k: self.smatrix.k,
            bc: self.system.bc,
        }
    }
}

fn nmax_of(modes: &ModeSet) -> Result<usize> {
    if modes.dim != 2 {
        return Err(WsError::Contract("BEM S-matrices need a 2D mode set".into()));
    }
    Ok(modes.modes.iter().map(|m| m.order()).max().unwrap_or(0))
}

fn order(p: ModeIndex) -> i32 {
    match p {
        ModeIndex::Cyl { n } => n,
        ModeIndex::Sph { .. } => unreachable!(),
    }
}

/// Multi-excitation solve on a fixed mesh; the mesh's `k` is ignored in
/// favour of `k`, so finite differences in `k` share one discretization.
pub fn bem_scattering_on_mesh(mesh: &BoundaryMesh, bc: BoundaryCondition, k: f64, modes: &ModeSet, cfg: &BemConfig) -> Result<BemScattering> {
    let nmax = nmax_of(modes)?;
    let mut mesh = mesh.clone();
    mesh.k = k;
    let system = BemSystem::new(mesh, bc, cfg.solve_tolerance)?;
    let mesh = &system.mesh;
    let n = mesh.len();
    let m = modes.len();

    // regular waves at every node, reused for excitation and projection
    let waves: Vec<Vec<(C64, [C64; 2])>> = mesh.nodes.iter().map(|nd| regular_waves(nmax, k, nd.x)).collect();
    let dn = |i: usize, idx: usize| {
        let (_, g) = waves[i][idx];
        g[0] * mesh.nodes[i].n[0] + g[1] * mesh.nodes[i].n[1]
    };

    let mut b = CMat::zeros(n, m);
    for (col, &p) in modes.modes.iter().enumerate() {
        let np = order(p);
        let amp = excitation_amplitude(np, k);
        let idx = (np + nmax as i32) as usize;
        for i in 0..n {
            let u = waves[i][idx].0 * amp;
            let d = dn(i, idx) * amp;
            let v = match bc {
                BoundaryCondition::SoundSoft => d + system.coupling * u,
                BoundaryCondition::SoundHard => u + system.coupling * d,
            };
            b[(i, col)] = v * row_scale(bc, mesh.nodes[i].speed);
        }
    }
    let densities = system.solve_matrix(&b)?;

    // far-field coefficients of the scattered field in the outgoing basis
    let c0 = -J * 0.25 * (2.0 / (PI * k)).sqrt() * C64::from_polar(1.0, PI / 4.0) * (2.0 * PI).sqrt();
    let mut proj = CMat::zeros(m, n);
    for (row, &q) in modes.modes.iter().enumerate() {
        let nq = order(q);
        let idx = (nq + nmax as i32) as usize;
        let pre = c0 * jpow(nq as i64);
        for i in 0..n {
            let nd = &mesh.nodes[i];
            proj[(row, i)] = match bc {
                BoundaryCondition::SoundSoft => -pre * waves[i][idx].0 * nd.w,
                BoundaryCondition::SoundHard => pre * dn(i, idx) * (nd.w * nd.speed),
            };
        }
    }
    let scat = crate::linalg::cgemm(&proj, &densities);
    let mut s = free_smatrix(modes, k)?;
    s.data += scat;
    Ok(BemScattering { smatrix: s, system, densities, modes: modes.with_k(k) })
}

/// Mesh the outline at `k` and solve all excitations.
pub fn bem_scattering(g: &Geometry, bc: BoundaryCondition, k: f64, modes: &ModeSet, cfg: &BemConfig) -> Result<BemScattering> {
    let mesh = mesh_geometry(g, k, cfg.nodes_per_wavelength, cfg.grading)?;
    bem_scattering_on_mesh(&mesh, bc, k, modes, cfg)
}

/// S-matrix of an outline, gated on unitarity and symmetry.
pub fn bem_smatrix(g: &Geometry, bc: BoundaryCondition, k: f64, modes: &ModeSet, cfg: &BemConfig) -> Result<SMatrix> {
    let out = bem_scattering(g, bc, k, modes, cfg)?;
    let rep = validate_smatrix(&out.smatrix, cfg.gate);
    if !rep.pass {
        return Err(WsError::Quality(format!(
            "unitarity {:.3e}, symmetry {:.3e} exceed gate {:.1e}",
            rep.unitarity, rep.symmetry, cfg.gate
        )));
    }
    Ok(out.smatrix)
}
