//! Boundary-element S of a circular cylinder against the closed form.
//!
//! `cargo run --release --example cylinder_bem -- [nodes_per_wavelength]`

use ws_acoustics::bem::{bem_smatrix, make_geometry, BemConfig, GeometrySpec};
use ws_acoustics::mie::mie_smatrix;
use ws_acoustics::wigner_smith::validate_smatrix;
use ws_acoustics::{BoundaryCondition, ModeSet};

fn main() -> ws_acoustics::Result<()> {
    let npw: f64 = std::env::args().nth(1).map(|s| s.parse().expect("numeric argument")).unwrap_or(12.0);
    let (k, a) = (1.0, 2.0);
    let set = ModeSet::cylindrical(7, k);
    let cfg = BemConfig { nodes_per_wavelength: npw, ..BemConfig::default() };
    for bc in [BoundaryCondition::SoundSoft, BoundaryCondition::SoundHard] {
        let g = make_geometry(&GeometrySpec::Circle { radius: a }, bc)?;
        let s = bem_smatrix(&g, bc, k, &set, &cfg)?;
        let exact = mie_smatrix(2, bc, k, a, &set)?;
        let dev = (&s.data - &exact.data).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let rep = validate_smatrix(&s, cfg.gate);
        println!("{}: entrywise {dev:.2e}, unitarity {:.2e}, symmetry {:.2e}", bc.as_str(), rep.unitarity, rep.symmetry);
    }
    Ok(())
}
