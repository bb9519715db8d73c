//! Closed-form WS spectrum of a sound-soft sphere.
//!
//! `cargo run --example sphere_delays -- [k] [a] [lmax]`

use ws_acoustics::mie::{mie_smatrix, mie_smatrix_deriv, modal_delay};
use ws_acoustics::wigner_smith::{q_matrix, ws_decompose};
use ws_acoustics::{BoundaryCondition, ModeSet};

fn main() -> ws_acoustics::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("numeric argument")).collect();
    let k = args.first().copied().unwrap_or(1.0);
    let a = args.get(1).copied().unwrap_or(1.0);
    let lmax = args.get(2).copied().unwrap_or(4.0) as usize;
    let bc = BoundaryCondition::SoundSoft;
    let set = ModeSet::spherical(lmax, k);
    let s = mie_smatrix(3, bc, k, a, &set)?;
    let q = q_matrix(&s, &mie_smatrix_deriv(3, bc, k, a, &set)?)?;
    let d = ws_decompose(&q, &s)?;
    println!("l, per-order delay, multiplicity");
    for l in 0..=lmax {
        let tau = modal_delay(3, bc, l as i32, k, a)?;
        let n = d.delays.iter().filter(|x| (*x - tau).abs() <= 1e-10 * tau.abs().max(1.0)).count();
        println!("{l}, {tau:.12}, {n}");
    }
    Ok(())
}
