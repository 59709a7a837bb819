//! Damped regularized Newton for `J(u) = κ Φ(u) + Σ_i m_i ψ_i(u_i)` over free vertices.
//!
//! `Φ` is the `p(x)`-Dirichlet energy, `m_i` the lumped mass and `ψ_i(s) = ½ a s² − g_i s − w F(x_i, s)`
//! a convex nodal potential (`F` an antiderivative of a reaction nonincreasing in `s`).
//! The objective and the stopping residual are always the unregularized ones; `ε` only enters the
//! Hessian used as a Newton metric.

use std::sync::Arc;

use crate::discretization::{assemble, dirichlet_energy, Mesh, MeshFunction};
use crate::error::Result;
use crate::exponent_field::ExponentField;
use crate::linalg::{dot, norm_inf};
use crate::reaction::ReactionTerm;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Stop when the free-vertex residual ∞-norm drops below this.
    pub tolerance: T,
    pub max_iterations: usize,
    /// Initial Hessian regularization `ε`.
    pub regularization: T,
    pub armijo_slope: T,
    pub backtrack_factor: T,
    pub max_backtracks: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::default_tolerance(),
            max_iterations: 200,
            regularization: T::lit(1e-8),
            armijo_slope: T::lit(1e-4),
            backtrack_factor: T::lit(0.5),
            max_backtracks: 60,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// No further progress possible and the residual is within the change caused by one-ulp
    /// perturbations of the nodal values (flat elements with `p < 2`); accepted as converged.
    RoundoffLimited,
    MaxIterations,
    NonFinite,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub solution: MeshFunction<T>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_residual_norm: T,
    /// Objective value after every accepted iterate, starting with the initial guess.
    pub energy_history: Vec<T>,
    pub regularization_final: T,
    /// Steps taken along the (diagonally scaled) negative gradient instead of the Newton direction.
    pub gradient_steps: usize,
}

impl<T: Real> SolveReport<T> {
    pub fn converged(&self) -> bool {
        matches!(self.status, SolveStatus::Converged | SolveStatus::RoundoffLimited)
    }

    pub fn linf(&self) -> T {
        self.solution.max_abs()
    }

    /// Converts a non-converged report into a solver error.
    pub fn into_result(self, step: Option<usize>) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(crate::error::Error::SolverFailure {
                step,
                reason: format!(
                    "{:?} after {} iterations, residual {}",
                    self.status, self.iterations, self.final_residual_norm
                ),
            })
        }
    }
}

/// Convex nodal part of the objective.
#[derive(Clone)]
pub(crate) struct NodalPotential<T> {
    pub quadratic: T,
    /// `g_i` for every vertex.
    pub linear: Vec<T>,
    pub reaction: Option<(Arc<ReactionTerm<T>>, T)>,
}

impl<T: Real> NodalPotential<T> {
    fn value(&self, x: &[T; 2], i: usize, s: T) -> T {
        let mut v = T::lit(0.5) * self.quadratic * s * s - self.linear[i] * s;
        if let Some((f, w)) = &self.reaction {
            v = v - *w * f.antiderivative(x, s);
        }
        v
    }

    fn first(&self, x: &[T; 2], i: usize, s: T) -> T {
        let mut v = self.quadratic * s - self.linear[i];
        if let Some((f, w)) = &self.reaction {
            v = v - *w * f.eval(x, s);
        }
        v
    }

    fn second(&self, x: &[T; 2], s: T) -> T {
        let mut v = self.quadratic;
        if let Some((f, w)) = &self.reaction {
            v = v - *w * f.derivative(x, s);
        }
        v
    }

    pub(crate) fn is_trivial(&self) -> bool {
        self.reaction.is_none() && self.linear.iter().all(|&g| g == T::zero())
    }
}

pub(crate) struct Objective<'a, T> {
    pub mesh: &'a Arc<Mesh<T>>,
    pub exponent: &'a ExponentField<T>,
    pub diffusion: T,
    pub nodal: NodalPotential<T>,
    lumped: Vec<T>,
}

impl<'a, T: Real> Objective<'a, T> {
    pub fn new(mesh: &'a Arc<Mesh<T>>, exponent: &'a ExponentField<T>, diffusion: T, nodal: NodalPotential<T>) -> Self {
        let lumped = mesh.lumped_mass();
        Self { mesh, exponent, diffusion, nodal, lumped }
    }

    fn value(&self, u: &MeshFunction<T>) -> Result<T> {
        let phi = dirichlet_energy(u, self.exponent)?;
        let mut nodal = T::zero();
        for &v in self.mesh.free_vertices() {
            nodal = nodal + self.lumped[v] * self.nodal.value(self.mesh.vertex(v), v, u.values()[v]);
        }
        Ok(self.diffusion * phi + nodal)
    }

    /// Exact gradient over free vertices.
    pub fn gradient(&self, u: &MeshFunction<T>) -> Result<Vec<T>> {
        let a = assemble(u, self.exponent, T::zero(), false)?;
        Ok(self.combine_gradient(u, a.residual))
    }

    /// `max(1, max_i m_i (|g_i| + a|u_i|))`: the tolerance is absolute for moderate data and
    /// relative once the data are large.
    fn residual_scale(&self, u: &MeshFunction<T>) -> T {
        self.mesh.free_vertices().iter().fold(T::one(), |acc, &v| {
            let s = self.lumped[v] * (self.nodal.linear[v].abs() + self.nodal.quadratic * u.values()[v].abs());
            acc.max(s)
        })
    }

    /// Largest change of a free residual entry under one-ulp perturbations of the nodal values.
    fn roundoff_floor(&self, u: &MeshFunction<T>) -> T {
        let eps = T::epsilon();
        let ulp = |v: T| eps * v.abs().max(T::min_positive_value());
        let flux = |s: T, p: T| if s > T::zero() { s.powf(p - T::one()) } else { T::zero() };
        let mut floor = vec![T::zero(); self.mesh.num_vertices()];
        for (e, el) in self.mesh.elements().iter().enumerate() {
            let nloc = self.mesh.dimension() + 1;
            let g = u.element_gradient(e);
            let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
            let grad_norms: Vec<T> = (0..nloc).map(|k| (el.basis_gradients[k][0].powi(2) + el.basis_gradients[k][1].powi(2)).sqrt()).collect();
            let delta: T = (0..nloc).map(|k| ulp(u.values()[el.vertices[k]]) * grad_norms[k]).sum();
            let p = self.exponent.value(e);
            let change = if gn >= delta {
                flux(gn + delta, p) - flux(gn - delta, p)
            } else {
                flux(gn + delta, p) + flux(delta - gn, p)
            };
            // plus summation roundoff of the element flux itself
            let change = change + T::lit(4.0) * eps * flux(gn + delta, p);
            for k in 0..nloc {
                let v = el.vertices[k];
                floor[v] = floor[v] + self.diffusion * el.measure * grad_norms[k] * change;
            }
        }
        self.mesh.free_vertices().iter().fold(T::zero(), |acc, &v| {
            let x = self.mesh.vertex(v);
            let s = u.values()[v];
            let nodal = self.lumped[v]
                * (self.nodal.second(x, s).abs() * ulp(s) + T::lit(4.0) * eps * (self.nodal.first(x, v, s).abs() + self.nodal.linear[v].abs()));
            acc.max(floor[v] + nodal)
        })
    }

    fn combine_gradient(&self, u: &MeshFunction<T>, dirichlet: Vec<T>) -> Vec<T> {
        self.mesh
            .free_vertices()
            .iter()
            .zip(dirichlet)
            .map(|(&v, r)| self.diffusion * r + self.lumped[v] * self.nodal.first(self.mesh.vertex(v), v, u.values()[v]))
            .collect()
    }
}

pub(crate) fn minimize<T: Real>(obj: &Objective<'_, T>, initial: &MeshFunction<T>, opts: &SolverOptions<T>) -> Result<SolveReport<T>> {
    let mesh = obj.mesh;
    let mut u = initial.clone().with_dirichlet();
    let mut eps = opts.regularization;
    let eps_floor = T::lit(1e-30);
    let mut history = Vec::new();
    let mut gradient_steps = 0;
    let mut j = obj.value(&u)?;
    history.push(j);
    let finish = |u: MeshFunction<T>, status, it, r, history, eps, gradient_steps| SolveReport {
        solution: u,
        status,
        iterations: it,
        final_residual_norm: r,
        energy_history: history,
        regularization_final: eps,
        gradient_steps,
    };
    if obj.nodal.is_trivial() && u.is_zero() {
        return Ok(finish(u, SolveStatus::Converged, 0, T::zero(), history, eps, 0));
    }
    let mut iterations = 0;
    loop {
        let r = obj.gradient(&u)?;
        let rn = norm_inf(&r);
        if !rn.is_finite() || !j.is_finite() {
            return Ok(finish(u, SolveStatus::NonFinite, iterations, rn, history, eps, gradient_steps));
        }
        if rn <= opts.tolerance * obj.residual_scale(&u) {
            return Ok(finish(u, SolveStatus::Converged, iterations, rn, history, eps, gradient_steps));
        }
        if iterations >= opts.max_iterations {
            return Ok(finish(u, SolveStatus::MaxIterations, iterations, rn, history, eps, gradient_steps));
        }
        iterations += 1;

        let mut hess = assemble(&u, obj.exponent, eps, true)?.jacobian;
        hess.scale(obj.diffusion);
        for (fi, &v) in mesh.free_vertices().iter().enumerate() {
            let d = obj.lumped[v] * obj.nodal.second(mesh.vertex(v), u.values()[v]);
            hess.add(fi, fi, d);
        }
        let x = u.free_values();
        let roundoff = T::lit(64.0) * T::epsilon() * (T::one() + j.abs());
        let try_step = |dir: &[T], slope: T, j0: T| -> Result<Option<(MeshFunction<T>, T)>> {
            let mut alpha = T::one();
            for _ in 0..=opts.max_backtracks {
                // predicted decrease below the resolution of J
                if -slope * alpha <= roundoff {
                    return Ok(None);
                }
                let trial: Vec<T> = x.iter().zip(dir).map(|(&a, &d)| a + alpha * d).collect();
                let cand = MeshFunction::from_free_values(mesh, &trial);
                let jc = obj.value(&cand)?;
                if jc.is_finite() && jc <= j0 + opts.armijo_slope * alpha * slope {
                    return Ok(Some((cand, jc)));
                }
                alpha = alpha * opts.backtrack_factor;
            }
            Ok(None)
        };

        let newton = hess.cholesky().map(|c| {
            let neg: Vec<T> = r.iter().map(|&v| -v).collect();
            c.solve(&neg)
        });
        let mut accepted = None;
        if let Some(d) = &newton {
            let slope = dot(&r, d);
            if slope < T::zero() && slope.is_finite() {
                accepted = try_step(d, slope, j)?;
            }
        }
        let diag = hess.diagonal();
        let grad_dir: Vec<T> = r
            .iter()
            .zip(&diag)
            .map(|(&g, &h)| if h > T::zero() && h.is_finite() { -g / h } else { -g })
            .collect();
        if accepted.is_none() {
            let slope = dot(&r, &grad_dir);
            accepted = try_step(&grad_dir, slope, j)?;
            if accepted.is_some() {
                gradient_steps += 1;
            }
        }
        if accepted.is_none() {
            // near the minimizer decreases of J fall below its resolution (flat elements with p < 2
            // are the typical case); backtrack on the residual norm instead, keeping J within roundoff
            let r2 = dot(&r, &r);
            'merit: for d in newton.iter().chain(std::iter::once(&grad_dir)) {
                let mut alpha = T::one();
                for _ in 0..=opts.max_backtracks {
                    let trial: Vec<T> = x.iter().zip(d).map(|(&a, &s)| a + alpha * s).collect();
                    let cand = MeshFunction::from_free_values(mesh, &trial);
                    let jc = obj.value(&cand)?;
                    if jc.is_finite() && jc <= j + roundoff {
                        let rc = obj.gradient(&cand)?;
                        if dot(&rc, &rc) < r2 {
                            accepted = Some((cand, jc));
                            break 'merit;
                        }
                    }
                    alpha = alpha * opts.backtrack_factor;
                }
            }
        }
        match accepted {
            Some((cand, jc)) => {
                u = cand;
                j = jc;
                history.push(j);
            }
            None => {
                if rn <= T::lit(4.0) * obj.roundoff_floor(&u) {
                    return Ok(finish(u, SolveStatus::RoundoffLimited, iterations, rn, history, eps, gradient_steps));
                }
                if eps <= eps_floor {
                    return Ok(finish(u, SolveStatus::Stalled, iterations, rn, history, eps, gradient_steps));
                }
                eps = eps * T::lit(0.1);
            }
        }
    }
}
