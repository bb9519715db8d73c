//! 2D boundary integral solver for exterior scattering.

pub mod geometry;
pub mod mesh;
pub mod operators;
pub mod solver;

pub use geometry::{make_geometry, Geometry, GeometrySpec, Segment};
pub use mesh::{mesh_geometry, BoundaryMesh};
pub use solver::{bem_scattering, excitation_amplitude, regular_waves, bem_scattering_on_mesh, bem_smatrix, solve_exterior, BemConfig, BemScattering, BemSystem, BoundarySolution};
