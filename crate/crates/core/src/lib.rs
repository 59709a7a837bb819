//! Numerical laboratory for the quasilinear parabolic problem `u_t − Δ_{p(x)} u = f(x, u)` with
//! homogeneous Dirichlet data: variable-exponent norms, P1 discretization of the `p(x)`-Laplacian,
//! resolvent solves by convex minimization, Rothe time stepping, barrier ODEs and long-time
//! stabilization experiments.
//!
//! All numerics are generic over [`Real`] (`f32`, `f64`); `*64` aliases are provided for the common case.

// `!(x > 0)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod discretization;
pub mod elliptic;
pub mod error;
pub mod exponent_field;
pub mod linalg;
pub mod quadrature;
pub mod reaction;
pub mod rothe;
pub mod scalar;
pub mod stabilization;

pub use discretization::{Mesh, MeshFunction};
pub use elliptic::{ResolventProblem, SolveReport, SolverOptions};
pub use error::{Error, Result};
pub use exponent_field::ExponentField;
pub use reaction::ReactionTerm;
pub use rothe::{RotheRun, TimeGrid};
pub use scalar::Real;

pub type Mesh64 = Mesh<f64>;
pub type MeshFunction64 = MeshFunction<f64>;
pub type ExponentField64 = ExponentField<f64>;
pub type ReactionTerm64 = ReactionTerm<f64>;
pub type SolveReport64 = SolveReport<f64>;
pub type RotheRun64 = RotheRun<f64>;

pub type Mesh32 = Mesh<f32>;
pub type MeshFunction32 = MeshFunction<f32>;
pub type ExponentField32 = ExponentField<f32>;
pub type RotheRun32 = RotheRun<f32>;

/// Nodal values above this magnitude are treated as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
