use std::sync::Arc;

use crate::discretization::mesh::Mesh;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodal coefficients of a P1 function on a fixed mesh.
#[derive(Debug, Clone)]
pub struct MeshFunction<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
}

impl<T: Real> PartialEq for MeshFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mesh.same_as(&other.mesh) && self.values == other.values
    }
}

impl<T: Real> MeshFunction<T> {
    pub fn zeros(mesh: &Arc<Mesh<T>>) -> Self {
        Self { mesh: Arc::clone(mesh), values: vec![T::zero(); mesh.num_vertices()] }
    }

    pub fn constant(mesh: &Arc<Mesh<T>>, c: T) -> Self {
        Self { mesh: Arc::clone(mesh), values: vec![c; mesh.num_vertices()] }
    }

    pub fn from_values(mesh: &Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::MeshMismatch(format!(
                "{} nodal values for a mesh with {} vertices",
                values.len(),
                mesh.num_vertices()
            )));
        }
        Ok(Self { mesh: Arc::clone(mesh), values })
    }

    /// Nodal interpolant of `f(x)`.
    pub fn from_fn(mesh: &Arc<Mesh<T>>, f: impl Fn(&[T; 2]) -> T) -> Self {
        Self { mesh: Arc::clone(mesh), values: mesh.vertices().iter().map(f).collect() }
    }

    /// Nodal interpolant with boundary values pinned to zero.
    pub fn from_fn_dirichlet(mesh: &Arc<Mesh<T>>, f: impl Fn(&[T; 2]) -> T) -> Self {
        Self::from_fn(mesh, f).with_dirichlet()
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        self.mesh.boundary_mask()
    }

    /// Copy with masked (boundary) nodal values set to exactly zero.
    pub fn with_dirichlet(mut self) -> Self {
        for (v, b) in self.values.iter_mut().zip(self.mesh.boundary_mask()) {
            if *b {
                *v = T::zero();
            }
        }
        self
    }

    /// `true` when every masked value is exactly zero, i.e. the function lies in the discrete `W^{1,p(x)}_0`.
    pub fn satisfies_dirichlet(&self) -> bool {
        self.values.iter().zip(self.mesh.boundary_mask()).all(|(&v, &b)| !b || v == T::zero())
    }

    pub fn check_same_mesh(&self, other: &Self) -> Result<()> {
        if self.mesh.same_as(&other.mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch("functions live on different meshes".into()))
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { mesh: Arc::clone(&self.mesh), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_mesh(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| a * x + b * y).collect();
        Ok(Self { mesh: Arc::clone(&self.mesh), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, -T::one())
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Constant gradient of the function on element `e`.
    pub fn element_gradient(&self, e: usize) -> [T; 2] {
        let el = &self.mesh.elements()[e];
        let mut g = [T::zero(); 2];
        for (a, &v) in el.vertices[..=self.mesh.dimension()].iter().enumerate() {
            let u = self.values[v];
            g[0] = g[0] + u * el.basis_gradients[a][0];
            g[1] = g[1] + u * el.basis_gradients[a][1];
        }
        g
    }

    /// Vertex values of element `e`.
    pub fn element_values(&self, e: usize) -> Vec<T> {
        self.mesh.element_vertices(e).iter().map(|&v| self.values[v]).collect()
    }

    /// Values at free vertices, in free numbering.
    pub fn free_values(&self) -> Vec<T> {
        self.mesh.free_vertices().iter().map(|&v| self.values[v]).collect()
    }

    /// Function with the given free values and zero on the boundary.
    pub fn from_free_values(mesh: &Arc<Mesh<T>>, free: &[T]) -> Self {
        let mut values = vec![T::zero(); mesh.num_vertices()];
        for (&v, &x) in mesh.free_vertices().iter().zip(free) {
            values[v] = x;
        }
        Self { mesh: Arc::clone(mesh), values }
    }
}
