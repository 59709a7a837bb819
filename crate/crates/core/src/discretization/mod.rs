//! Meshes, P1 functions and assembly of the discrete `p(x)`-Laplacian.

mod assembly;
mod function;
mod mesh;

pub use assembly::{
    assemble_dirichlet_energy, assemble_mass_terms, consistent_mass_matrix, dirichlet_energy, dirichlet_residual,
    discrete_norms, EnergyAssembly,
};
pub(crate) use assembly::assemble;
pub use function::MeshFunction;
pub use mesh::{ElementGeometry, Mesh};
