use std::sync::Arc;

use super::minimizer::SolverOptions;
use super::problems::{solve_reaction_resolvent, solve_resolvent, ResolventProblem};
use crate::discretization::{dirichlet_residual, MeshFunction};
use crate::error::Result;
use crate::exponent_field::ExponentField;
use crate::reaction::ReactionTerm;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct ComparisonReport<T> {
    /// `min_i (u_i − v_i)`
    pub min_difference: T,
    /// `max(0, −min_difference)`
    pub violation: T,
    pub worst_vertex: usize,
    /// Whether `−Δ_p u ≥ −Δ_p v` holds against every nonnegative nodal test function (up to `tol`).
    pub premise_holds: bool,
    pub holds: bool,
}

/// Checks the conclusion `u ≥ v` of the weak comparison principle at the nodes.
pub fn comparison_check<T: Real>(u: &MeshFunction<T>, v: &MeshFunction<T>, exponent: &ExponentField<T>, tol: T) -> Result<ComparisonReport<T>> {
    u.check_same_mesh(v)?;
    let ru = dirichlet_residual(u, exponent)?;
    let rv = dirichlet_residual(v, exponent)?;
    let premise_holds = ru.iter().zip(&rv).all(|(&a, &b)| a - b >= -tol);
    let (worst_vertex, min_difference) = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| a - b)
        .enumerate()
        .fold((0, T::infinity()), |best, (i, d)| if d < best.1 { (i, d) } else { best });
    let violation = (-min_difference).max(T::zero());
    Ok(ComparisonReport { min_difference, violation, worst_vertex, premise_holds, holds: violation <= tol })
}

#[derive(Debug, Clone)]
pub struct ContractionReport<T> {
    /// `‖u − v‖_∞` for the two resolvent solutions
    pub solution_gap: T,
    /// `‖h − g‖_∞`
    pub data_gap: T,
    pub holds: bool,
    pub u: MeshFunction<T>,
    pub v: MeshFunction<T>,
}

/// Solves `u + λA_f u = h`, `v + λA_f v = g` and checks `‖u − v‖_∞ ≤ ‖h − g‖_∞ + tol`.
pub fn linf_contraction_check<T: Real>(
    h: &MeshFunction<T>,
    g: &MeshFunction<T>,
    lambda: T,
    reaction: Option<&Arc<ReactionTerm<T>>>,
    exponent: &ExponentField<T>,
    options: &SolverOptions<T>,
    tol: T,
) -> Result<ContractionReport<T>> {
    h.check_same_mesh(g)?;
    let solve = |data: &MeshFunction<T>| match reaction {
        Some(f) => solve_reaction_resolvent(data, lambda, f, exponent, options)?.into_result(None),
        None => {
            let prob = ResolventProblem::new(lambda, data.clone(), exponent.clone()).with_options(*options);
            solve_resolvent(&prob, &data.clone().with_dirichlet())?.into_result(None)
        }
    };
    let u = solve(h)?.solution;
    let v = solve(g)?.solution;
    let solution_gap = u.sub(&v)?.max_abs();
    let data_gap = h.sub(g)?.max_abs();
    Ok(ContractionReport { solution_gap, data_gap, holds: solution_gap <= data_gap + tol, u, v })
}
