//! Wigner-Smith time delay analysis for acoustic scattering.
//!
//! The crate builds scattering matrices (closed form for spheres and
//! cylinders, boundary integral equations for general 2D shapes), forms the
//! time delay matrix `Q = j S† ∂S/∂k`, splits it into WS modes, and checks it
//! against the renormalized volume-integral representation.
//!
//! Conventions: time dependence `e^{jωt}`, sound speed 1 m/s (delays are
//! lengths), basis origin at the coordinate origin.

pub mod bem;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod mie;
pub mod modal;
pub mod quad;
pub mod scenario;
pub mod specfun;
pub mod volume_q;
pub mod wigner_smith;

pub use error::{Result, WsError};
pub use mie::BoundaryCondition;
pub use modal::{ModeIndex, ModeSet};
pub use wigner_smith::{QMatrix, SMatrix, WSDecomposition};
