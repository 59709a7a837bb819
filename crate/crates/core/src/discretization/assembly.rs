//! P1 assembly of the `p(x)`-Dirichlet energy, its gradient and Hessian over free vertices.

use crate::discretization::{Mesh, MeshFunction};
use crate::error::{invalid, Result};
use crate::exponent_field::ExponentField;
use crate::linalg::SymmetricBanded;
use crate::scalar::Real;

/// Energy `Σ_e |e| (|∇u|² + ε²)^{p_e/2} / p_e` with exact first and second derivatives.
#[derive(Debug, Clone)]
pub struct EnergyAssembly<T> {
    pub energy: T,
    /// Gradient with respect to the free nodal values, in free numbering.
    pub residual: Vec<T>,
    pub jacobian: SymmetricBanded<T>,
    /// Elements whose Hessian block is unbounded (`ε = 0`, `p < 2`, zero gradient); their
    /// contribution is left out of `jacobian`.
    pub singular_elements: Vec<usize>,
}

impl<T> EnergyAssembly<T> {
    pub fn jacobian_is_singular(&self) -> bool {
        !self.singular_elements.is_empty()
    }
}

fn grad_dot<T: Real>(a: &[T; 2], b: &[T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

/// Elementwise factors `(s + ε²)^{p/2 - 1}` and `(p - 2)(s + ε²)^{p/2 - 2}` with `s = |∇u|²`;
/// `None` for the first when it is unbounded.
fn flux_factors<T: Real>(s: T, eps2: T, p: T) -> (Option<T>, T) {
    let two = T::lit(2.0);
    let r = s + eps2;
    if r == T::zero() {
        let a = if p > two {
            Some(T::zero())
        } else if p == two {
            Some(T::one())
        } else {
            None
        };
        return (a, T::zero());
    }
    let a = r.powf(p / two - T::one());
    let b = if p == two { T::zero() } else { (p - two) * r.powf(p / two - two) };
    (Some(a), b)
}

pub fn assemble_dirichlet_energy<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>, eps: T) -> Result<EnergyAssembly<T>> {
    assemble(u, p, eps, true)
}

pub(crate) fn assemble<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>, eps: T, with_jacobian: bool) -> Result<EnergyAssembly<T>> {
    if !(eps >= T::zero()) {
        return Err(invalid("eps", "must be ≥ 0"));
    }
    let mesh: &Mesh<T> = u.mesh();
    p.check_mesh(mesh)?;
    let nfree = mesh.num_free();
    let bw = if with_jacobian { mesh.free_bandwidth() } else { 0 };
    let mut jacobian = SymmetricBanded::zeros(if with_jacobian { nfree } else { 0 }, bw);
    let mut residual = vec![T::zero(); nfree];
    let mut energy = T::zero();
    let mut singular_elements = Vec::new();
    let eps2 = eps * eps;
    let nloc = mesh.dimension() + 1;
    // sequential reduction in element order keeps results bitwise reproducible
    for (e, el) in mesh.elements().iter().enumerate() {
        let pe = p.value(e);
        let g = u.element_gradient(e);
        let s = grad_dot(&g, &g);
        let r = s + eps2;
        energy = energy + el.measure * r.powf(pe / T::lit(2.0)) / pe;
        let (a, b) = flux_factors(s, eps2, pe);
        let gphi: Vec<T> = (0..nloc).map(|i| grad_dot(&g, &el.basis_gradients[i])).collect();
        if s > T::zero() {
            let a = a.expect("bounded for nonzero gradient");
            for i in 0..nloc {
                if let Some(fi) = mesh.free_index(el.vertices[i]) {
                    residual[fi] = residual[fi] + el.measure * a * gphi[i];
                }
            }
        }
        if !with_jacobian {
            continue;
        }
        let Some(a) = a else {
            singular_elements.push(e);
            continue;
        };
        for i in 0..nloc {
            let Some(fi) = mesh.free_index(el.vertices[i]) else { continue };
            for j in 0..=i {
                let Some(fj) = mesh.free_index(el.vertices[j]) else { continue };
                let h = el.measure
                    * (a * grad_dot(&el.basis_gradients[i], &el.basis_gradients[j]) + b * gphi[i] * gphi[j]);
                jacobian.add(fi, fj, h);
            }
        }
    }
    Ok(EnergyAssembly { energy, residual, jacobian, singular_elements })
}

/// `Φ(u) = ∫ |∇u|^{p(x)}/p(x)`.
pub fn dirichlet_energy<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>) -> Result<T> {
    p.check_mesh(u.mesh())?;
    let mesh = u.mesh();
    Ok(mesh
        .elements()
        .iter()
        .enumerate()
        .map(|(e, el)| {
            let g = u.element_gradient(e);
            let pe = p.value(e);
            el.measure * (g[0] * g[0] + g[1] * g[1]).powf(pe / T::lit(2.0)) / pe
        })
        .sum())
}

/// Free-vertex gradient of `Φ` (the discrete `-Δ_{p(x)} u` tested against nodal basis functions).
pub fn dirichlet_residual<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>) -> Result<Vec<T>> {
    Ok(assemble(u, p, T::zero(), false)?.residual)
}

/// Exact `(∫ u g, ∫ u²)` with the consistent P1 mass matrix.
pub fn assemble_mass_terms<T: Real>(u: &MeshFunction<T>, g: &MeshFunction<T>) -> Result<(T, T)> {
    u.check_same_mesh(g)?;
    let mesh = u.mesh();
    let nloc = mesh.dimension() + 1;
    let (uv, gv) = (u.values(), g.values());
    let mut ug = T::zero();
    let mut uu = T::zero();
    for el in mesh.elements() {
        for i in 0..nloc {
            for j in 0..nloc {
                let m = mesh.mass_entry(el.measure, i == j);
                let (a, b) = (el.vertices[i], el.vertices[j]);
                ug = ug + m * uv[a] * gv[b];
                uu = uu + m * uv[a] * uv[b];
            }
        }
    }
    Ok((ug, uu))
}

/// Consistent mass matrix over all vertices (dense rows; intended for small meshes and checks).
pub fn consistent_mass_matrix<T: Real>(mesh: &Mesh<T>) -> Vec<Vec<T>> {
    let n = mesh.num_vertices();
    let mut m = vec![vec![T::zero(); n]; n];
    let nloc = mesh.dimension() + 1;
    for el in mesh.elements() {
        for i in 0..nloc {
            for j in 0..nloc {
                let (a, b) = (el.vertices[i], el.vertices[j]);
                m[a][b] = m[a][b] + mesh.mass_entry(el.measure, i == j);
            }
        }
    }
    m
}

/// `(max |u_i|, ‖u‖_{L²}, ρ_p(|∇u|))`.
pub fn discrete_norms<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>) -> Result<(T, T, T)> {
    p.check_mesh(u.mesh())?;
    let linf = u.max_abs();
    let (_, uu) = assemble_mass_terms(u, u)?;
    let mesh = u.mesh();
    let modular_gradient = mesh
        .elements()
        .iter()
        .enumerate()
        .map(|(e, el)| {
            let g = u.element_gradient(e);
            el.measure * (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p.value(e))
        })
        .sum();
    Ok((linf, uu.max(T::zero()).sqrt(), modular_gradient))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn zero_function_has_zero_energy_and_residual() {
        let m = Mesh::<f64>::interval(6).unwrap();
        let p = ExponentField::from_fn(&m, |x| 1.5 + x[0]).unwrap();
        let a = assemble_dirichlet_energy(&MeshFunction::zeros(&m), &p, 0.0).unwrap();
        assert_eq!(a.energy, 0.0);
        assert!(a.residual.iter().all(|&r| r == 0.0));
        // p < 2 on some zero-gradient elements makes the unregularized Hessian singular there
        assert!(a.jacobian_is_singular());
        let reg = assemble_dirichlet_energy(&MeshFunction::zeros(&m), &p, 1e-8).unwrap();
        assert!(!reg.jacobian_is_singular());
        assert!(reg.jacobian.cholesky().is_some());
    }

    #[test]
    fn quadratic_exponent_gives_stiffness_matrix() {
        let n = 5;
        let m = Mesh::<f64>::interval(n).unwrap();
        let p = ExponentField::constant(&m, 2.0).unwrap();
        let u = MeshFunction::from_fn_dirichlet(&m, |x| x[0] * x[0]);
        let a = assemble_dirichlet_energy(&u, &p, 0.0).unwrap();
        let h = 1.0 / n as f64;
        for i in 0..m.num_free() {
            for j in 0..m.num_free() {
                let expect = if i == j {
                    2.0 / h
                } else if i.abs_diff(j) == 1 {
                    -1.0 / h
                } else {
                    0.0
                };
                assert!((a.jacobian.get(i, j) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn norms_of_simple_functions() {
        let m: Arc<Mesh<f64>> = Mesh::interval(10).unwrap();
        let p = ExponentField::constant(&m, 2.0).unwrap();
        assert_eq!(discrete_norms(&MeshFunction::zeros(&m), &p).unwrap(), (0.0, 0.0, 0.0));
        let x = MeshFunction::from_fn(&m, |x| x[0]);
        let (linf, l2, mg) = discrete_norms(&x, &p).unwrap();
        assert!((linf - 1.0).abs() < 1e-15);
        assert!((l2 - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((mg - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mass_terms_of_constants() {
        let m = Mesh::<f64>::interval(7).unwrap();
        let one = MeshFunction::constant(&m, 1.0);
        let (ug, uu) = assemble_mass_terms(&one, &one).unwrap();
        assert!((ug - 1.0).abs() < 1e-14 && (uu - 1.0).abs() < 1e-14);
        let (ug, _) = assemble_mass_terms(&one, &MeshFunction::constant(&m, -1.0)).unwrap();
        assert!((ug + 1.0).abs() < 1e-14);
    }
}
