//! Elliptic problems solved by convex minimization: the resolvent step, the stationary problem,
//! the torsion problem, and comparison utilities.

mod checks;
mod minimizer;
mod problems;

pub use checks::{comparison_check, linf_contraction_check, ComparisonReport, ContractionReport};
pub use minimizer::{SolveReport, SolveStatus, SolverOptions};
pub use problems::{
    lumped_p_laplacian, solve_reaction_resolvent, solve_resolvent, solve_stationary, solve_stationary_with, solve_torsion,
    sub_super_solutions, ResolventProblem, StationaryOptions,
};
