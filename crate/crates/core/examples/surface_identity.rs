//! Closed-form surface integrals against the S-matrix expression and against
//! direct quadrature on spheres of growing radius.
//!
//! `cargo run --example surface_identity`

use ws_acoustics::modal::ModeIndex;
use ws_acoustics::volume_q::{surface_identity_check, surface_quadrature_envelope};
use ws_acoustics::BoundaryCondition;

fn main() -> ws_acoustics::Result<()> {
    let (k, a) = (2.0, 1.0);
    let bc = BoundaryCondition::SoundSoft;
    println!("l, kR, closed vs rhs, numeric vs closed");
    for l in 0..4 {
        let p = ModeIndex::Sph { l, m: 0 };
        for kr in [100.0, 200.0, 400.0] {
            let r = surface_identity_check(p, p, bc, k, a, kr / k)?;
            println!("{l}, {kr}, {:.2e}, {:.2e}", r.closed_vs_rhs, r.numeric_vs_closed);
        }
    }
    let p = ModeIndex::Sph { l: 0, m: 0 };
    for kr in [100.0, 200.0, 400.0, 800.0] {
        println!("error envelope at kR={kr}: {:.3e}", surface_quadrature_envelope(p, p, bc, k, a, kr / k, 8)?);
    }
    Ok(())
}
