use std::collections::HashMap;
use std::sync::Arc;

use super::minimizer::{minimize, NodalPotential, Objective, SolveReport, SolverOptions};
use crate::discretization::{dirichlet_residual, Mesh, MeshFunction};
use crate::error::{invalid, Error, Result};
use crate::exponent_field::ExponentField;
use crate::reaction::ReactionTerm;
use crate::scalar::Real;

/// One implicit step `u − λ Δ_{p(x)} u = g` with homogeneous Dirichlet data.
#[derive(Debug, Clone)]
pub struct ResolventProblem<T> {
    pub lambda: T,
    pub rhs: MeshFunction<T>,
    pub exponent: ExponentField<T>,
    pub options: SolverOptions<T>,
}

impl<T: Real> ResolventProblem<T> {
    pub fn new(lambda: T, rhs: MeshFunction<T>, exponent: ExponentField<T>) -> Self {
        Self { lambda, rhs, exponent, options: SolverOptions::default() }
    }

    pub fn with_options(mut self, options: SolverOptions<T>) -> Self {
        self.options = options;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be a positive finite number"));
        }
        validate_options(&self.options)?;
        self.exponent.check_mesh(self.rhs.mesh())
    }
}

fn validate_options<T: Real>(o: &SolverOptions<T>) -> Result<()> {
    if !(o.tolerance > T::zero()) {
        return Err(invalid("tolerance", "must be positive"));
    }
    if !(o.regularization > T::zero()) {
        return Err(invalid("regularization", "must be positive"));
    }
    Ok(())
}

/// Minimizes `J_λ(u) = ½∫u² + λ∫|∇u|^{p(x)}/p(x) − ∫gu` (mass terms lumped).
pub fn solve_resolvent<T: Real>(prob: &ResolventProblem<T>, initial_guess: &MeshFunction<T>) -> Result<SolveReport<T>> {
    prob.validate()?;
    prob.rhs.check_same_mesh(initial_guess)?;
    let nodal = NodalPotential { quadratic: T::one(), linear: prob.rhs.values().to_vec(), reaction: None };
    let obj = Objective::new(prob.rhs.mesh(), &prob.exponent, prob.lambda, nodal);
    if prob.rhs.is_zero() {
        return minimize(&obj, &MeshFunction::zeros(prob.rhs.mesh()), &prob.options);
    }
    minimize(&obj, initial_guess, &prob.options)
}

/// Resolvent of `A_f u = −Δ_{p(x)} u − f(x, u)`: solves `u + λ A_f u = h` for nonincreasing `f`.
pub fn solve_reaction_resolvent<T: Real>(
    h: &MeshFunction<T>,
    lambda: T,
    reaction: &Arc<ReactionTerm<T>>,
    exponent: &ExponentField<T>,
    options: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    if !(lambda > T::zero()) {
        return Err(invalid("lambda", "must be positive"));
    }
    validate_options(options)?;
    exponent.check_mesh(h.mesh())?;
    if !reaction.is_nonincreasing() {
        return Err(Error::NonMonotoneReaction(reaction.name().to_string()));
    }
    let nodal = NodalPotential { quadratic: T::one(), linear: h.values().to_vec(), reaction: Some((Arc::clone(reaction), lambda)) };
    let obj = Objective::new(h.mesh(), exponent, lambda, nodal);
    minimize(&obj, &h.clone().with_dirichlet(), options)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StationaryOptions {
    /// Accept reactions that are not nonincreasing; the result is then *a* critical point of the
    /// energy with no uniqueness claim.
    pub allow_non_monotone: bool,
}

/// Solves `−Δ_{p(x)} u = f(x, u)` for `f` nonincreasing in `u` (or a pure source).
pub fn solve_stationary<T: Real>(
    reaction: &Arc<ReactionTerm<T>>,
    exponent: &ExponentField<T>,
    mesh: &Arc<Mesh<T>>,
    options: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    solve_stationary_with(reaction, exponent, mesh, options, StationaryOptions::default(), None)
}

pub fn solve_stationary_with<T: Real>(
    reaction: &Arc<ReactionTerm<T>>,
    exponent: &ExponentField<T>,
    mesh: &Arc<Mesh<T>>,
    options: &SolverOptions<T>,
    stationary: StationaryOptions,
    initial_guess: Option<&MeshFunction<T>>,
) -> Result<SolveReport<T>> {
    validate_options(options)?;
    exponent.check_mesh(mesh)?;
    if !reaction.is_nonincreasing() && !stationary.allow_non_monotone {
        return Err(Error::NonMonotoneReaction(format!(
            "{} (uniqueness of the stationary solution is not guaranteed)",
            reaction.name()
        )));
    }
    let nodal = NodalPotential {
        quadratic: T::zero(),
        linear: vec![T::zero(); mesh.num_vertices()],
        reaction: Some((Arc::clone(reaction), T::one())),
    };
    let obj = Objective::new(mesh, exponent, T::one(), nodal);
    let zero = MeshFunction::zeros(mesh);
    minimize(&obj, initial_guess.unwrap_or(&zero), options)
}

/// Torsion function: `−Δ_{p(x)} w = λ` in Ω, `w = 0` on ∂Ω.
pub fn solve_torsion<T: Real>(
    lambda_src: T,
    exponent: &ExponentField<T>,
    mesh: &Arc<Mesh<T>>,
    options: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    if !(lambda_src > T::zero()) {
        return Err(invalid("lambda_src", "must be positive"));
    }
    validate_options(options)?;
    exponent.check_mesh(mesh)?;
    let nodal = NodalPotential { quadratic: T::zero(), linear: vec![lambda_src; mesh.num_vertices()], reaction: None };
    let obj = Objective::new(mesh, exponent, T::one(), nodal);
    minimize(&obj, &MeshFunction::zeros(mesh), options)
}

/// Discrete surrogate of `Δ_{p(x)} u` at free vertices: minus the assembled residual divided by
/// the lumped mass; zero on the boundary.
pub fn lumped_p_laplacian<T: Real>(u: &MeshFunction<T>, exponent: &ExponentField<T>) -> Result<MeshFunction<T>> {
    let mesh = u.mesh();
    let r = dirichlet_residual(u, exponent)?;
    let m = mesh.lumped_mass();
    let mut vals = vec![T::zero(); mesh.num_vertices()];
    for (fi, &v) in mesh.free_vertices().iter().enumerate() {
        vals[v] = -r[fi] / m[v];
    }
    MeshFunction::from_values(mesh, vals)
}

/// Ordered pair `(lower, upper)` solving `−Δ_{p(x)} u = ∓(|Δ_{p(x)} u0| + |f(x, u0)|)`.
pub fn sub_super_solutions<T: Real>(
    u0: &MeshFunction<T>,
    reaction: &ReactionTerm<T>,
    exponent: &ExponentField<T>,
    options: &SolverOptions<T>,
) -> Result<(SolveReport<T>, SolveReport<T>)> {
    let mesh = u0.mesh();
    let lap = lumped_p_laplacian(u0, exponent)?;
    let fu = reaction.apply(u0);
    let g: Vec<T> = lap.values().iter().zip(fu.values()).map(|(&a, &b)| a.abs() + b.abs()).collect();
    let g_pos = g.clone();
    let g_neg: Vec<T> = g.into_iter().map(|v| -v).collect();
    let upper = Arc::new(ReactionTerm::source("upper", source_lookup(mesh, g_pos)));
    let lower = Arc::new(ReactionTerm::source("lower", source_lookup(mesh, g_neg)));
    Ok((solve_stationary(&lower, exponent, mesh, options)?, solve_stationary(&upper, exponent, mesh, options)?))
}

fn source_lookup<T: Real>(mesh: &Arc<Mesh<T>>, values: Vec<T>) -> impl Fn(&[T; 2]) -> T + Send + Sync + 'static {
    let key = |x: &[T; 2]| (x[0].to_f64_lossy().to_bits(), x[1].to_f64_lossy().to_bits());
    let table: HashMap<(u64, u64), T> = mesh.vertices().iter().map(key).zip(values).collect();
    move |x: &[T; 2]| table.get(&key(x)).copied().unwrap_or_else(T::zero)
}
