//! Volume-integral Q of a sphere in all three styles against `j S† S'`.
//!
//! `cargo run --example route_equivalence -- [soft|hard]`

use ws_acoustics::mie::{mie_smatrix, mie_smatrix_deriv};
use ws_acoustics::volume_q::{q_matrix_volume, QuadratureSpec, VolumeStyle};
use ws_acoustics::wigner_smith::q_matrix;
use ws_acoustics::{BoundaryCondition, ModeSet};

fn main() -> ws_acoustics::Result<()> {
    let bc = match std::env::args().nth(1).as_deref() {
        Some("hard") => BoundaryCondition::SoundHard,
        _ => BoundaryCondition::SoundSoft,
    };
    let (k, a) = (2.0, 1.0);
    let set = ModeSet::spherical(3, k);
    let reference = q_matrix(&mie_smatrix(3, bc, k, a, &set)?, &mie_smatrix_deriv(3, bc, k, a, &set)?)?;
    let scale = reference.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("style, density, max |Q_vol - Q| / max |Q|");
    for style in [VolumeStyle::Symmetric, VolumeStyle::A, VolumeStyle::B] {
        for density in [4.0, 8.0, 16.0] {
            let quad = QuadratureSpec::new(200.0 / k).with_density(density);
            let v = q_matrix_volume(style, bc, k, a, &set, &quad)?;
            let err = (&v.data - &reference.data).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
            println!("{}, {density}, {err:.3e}", style.as_str());
        }
    }
    Ok(())
}
