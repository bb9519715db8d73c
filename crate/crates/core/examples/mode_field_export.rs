//! Samples one WS mode of a circular cylinder on a grid and writes it as CSV.
//!
//! `cargo run --release --example mode_field_export -- [mode] [out.csv]`

use std::fs::File;
use std::io::BufWriter;
use ws_acoustics::bem::{bem_scattering, make_geometry, BemConfig, GeometrySpec};
use ws_acoustics::fields::{localization_metrics, ws_mode_field, GridSpec};
use ws_acoustics::wigner_smith::{q_matrix, smatrix_fd_derivative, ws_decompose};
use ws_acoustics::{BoundaryCondition, ModeSet};

fn main() -> ws_acoustics::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode: usize = args.next().map(|s| s.parse().expect("mode index")).unwrap_or(1);
    let out = args.next().unwrap_or_else(|| "field_mode.csv".into());
    let (k, bc) = (1.0, BoundaryCondition::SoundHard);
    let g = make_geometry(&GeometrySpec::Circle { radius: 2.0 }, bc)?;
    let set = ModeSet::cylindrical(7, k);
    let cfg = BemConfig::default();
    let sc = bem_scattering(&g, bc, k, &set, &cfg)?;
    let sp = smatrix_fd_derivative(|kk| Ok(bem_scattering(&g, bc, kk, &set, &cfg)?.smatrix), k, 1e-4, false)?;
    let d = ws_decompose(&q_matrix(&sc.smatrix, &sp)?, &sc.smatrix)?;
    let grid = GridSpec::square(8.0, 161)?;
    let f = ws_mode_field(&sc, &d.w, mode - 1, &grid)?;
    f.write_csv(BufWriter::new(File::create(&out)?))?;
    let m = localization_metrics(&f, &g, k);
    println!("mode {mode}: delay {:.4}, boundary share {:.3}, written to {out}", d.delays[mode - 1], m.boundary);
    Ok(())
}
