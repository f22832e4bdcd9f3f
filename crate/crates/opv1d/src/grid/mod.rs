//! Graded mesh and discrete operators: exponential-fitted drift-diffusion
//! fluxes, Poisson assembly with the interfacial exciton dipole, exciton
//! reaction-diffusion assembly, and the banded solve underneath all three.

mod assemble;
mod bernoulli;
mod mesh;
mod tridiag;

pub use assemble::{
    assemble_continuity, assemble_exciton, assemble_poisson, face_field, sg_edge_flux, Carrier,
    RateModel,
};
pub use bernoulli::bernoulli;
pub use mesh::{build_mesh, Mesh, MeshError};
pub use tridiag::{solve_tridiagonal, PivotBreakdown, TridiagonalSystem};
