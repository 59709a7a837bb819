use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Precomputed P1 data for one simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry<T> {
    /// Vertex indices; only the first `dimension + 1` are meaningful.
    pub vertices: [usize; 3],
    pub measure: T,
    /// Gradients of the local barycentric basis functions (constant on the element).
    pub basis_gradients: [[T; 2]; 3],
    pub centroid: [T; 2],
}

/// Conforming simplicial mesh of `(0,1)` or `(0,1)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    dimension: usize,
    vertices: Vec<[T; 2]>,
    elements: Vec<ElementGeometry<T>>,
    boundary: Vec<bool>,
    free_index: Vec<Option<usize>>,
    free_vertices: Vec<usize>,
    free_bandwidth: usize,
}

impl<T: Real> Mesh<T> {
    /// Uniform mesh of `(0, 1)` with `cells` intervals.
    pub fn interval(cells: usize) -> Result<Arc<Self>> {
        if cells < 1 {
            return Err(invalid("cells", "must be ≥ 1"));
        }
        let n = T::from_usize_lossy(cells);
        let vertices = (0..=cells).map(|i| [T::from_usize_lossy(i) / n, T::zero()]).collect();
        let cells_v = (0..cells).map(|i| vec![i, i + 1]).collect();
        let mut boundary = vec![false; cells + 1];
        boundary[0] = true;
        boundary[cells] = true;
        Self::from_parts(1, vertices, cells_v, boundary).map(Arc::new)
    }

    /// Uniform right-triangle mesh of the unit square, `cells_per_side²` squares each cut along the
    /// `(i, j) → (i+1, j+1)` diagonal.
    pub fn unit_square(cells_per_side: usize) -> Result<Arc<Self>> {
        if cells_per_side < 1 {
            return Err(invalid("cells_per_side", "must be ≥ 1"));
        }
        let m = cells_per_side;
        let n = T::from_usize_lossy(m);
        let idx = |i: usize, j: usize| j * (m + 1) + i;
        let mut vertices = Vec::with_capacity((m + 1) * (m + 1));
        let mut boundary = Vec::with_capacity((m + 1) * (m + 1));
        for j in 0..=m {
            for i in 0..=m {
                vertices.push([T::from_usize_lossy(i) / n, T::from_usize_lossy(j) / n]);
                boundary.push(i == 0 || j == 0 || i == m || j == m);
            }
        }
        let mut cells = Vec::with_capacity(2 * m * m);
        for j in 0..m {
            for i in 0..m {
                cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                cells.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Self::from_parts(2, vertices, cells, boundary).map(Arc::new)
    }

    fn from_parts(dimension: usize, vertices: Vec<[T; 2]>, cells: Vec<Vec<usize>>, boundary: Vec<bool>) -> Result<Self> {
        let mut elements = Vec::with_capacity(cells.len());
        for (e, c) in cells.iter().enumerate() {
            let geom = match dimension {
                1 => {
                    let (a, b) = (vertices[c[0]][0], vertices[c[1]][0]);
                    let h = b - a;
                    ElementGeometry {
                        vertices: [c[0], c[1], usize::MAX],
                        measure: h.abs(),
                        basis_gradients: [[-T::one() / h, T::zero()], [T::one() / h, T::zero()], [T::zero(); 2]],
                        centroid: [(a + b) * T::lit(0.5), T::zero()],
                    }
                }
                2 => {
                    let [p0, p1, p2] = [vertices[c[0]], vertices[c[1]], vertices[c[2]]];
                    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                    let g1 = [(p2[1] - p0[1]) / det, -(p2[0] - p0[0]) / det];
                    let g2 = [-(p1[1] - p0[1]) / det, (p1[0] - p0[0]) / det];
                    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
                    let third = T::lit(1.0 / 3.0);
                    ElementGeometry {
                        vertices: [c[0], c[1], c[2]],
                        measure: det.abs() * T::lit(0.5),
                        basis_gradients: [g0, g1, g2],
                        centroid: [(p0[0] + p1[0] + p2[0]) * third, (p0[1] + p1[1] + p2[1]) * third],
                    }
                }
                d => return Err(invalid("dimension", format!("{d} is not 1 or 2"))),
            };
            if !(geom.measure > T::zero()) {
                return Err(Error::Domain(format!("element {e} has non-positive measure")));
            }
            elements.push(geom);
        }
        let mut free_index = vec![None; vertices.len()];
        let mut free_vertices = Vec::new();
        for (v, &b) in boundary.iter().enumerate() {
            if !b {
                free_index[v] = Some(free_vertices.len());
                free_vertices.push(v);
            }
        }
        let mut free_bandwidth = 0;
        for el in &elements {
            let local = &el.vertices[..=dimension];
            for &a in local {
                for &b in local {
                    if let (Some(fa), Some(fb)) = (free_index[a], free_index[b]) {
                        free_bandwidth = free_bandwidth.max(fa.abs_diff(fb));
                    }
                }
            }
        }
        Ok(Self { dimension, vertices, elements, boundary, free_index, free_vertices, free_bandwidth })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &[T; 2] {
        &self.vertices[v]
    }

    pub fn elements(&self) -> &[ElementGeometry<T>] {
        &self.elements
    }

    /// Local vertex indices of element `e` (2 in 1D, 3 in 2D).
    pub fn element_vertices(&self, e: usize) -> &[usize] {
        &self.elements[e].vertices[..=self.dimension]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn free_index(&self, v: usize) -> Option<usize> {
        self.free_index[v]
    }

    pub fn free_vertices(&self) -> &[usize] {
        &self.free_vertices
    }

    pub fn num_free(&self) -> usize {
        self.free_vertices.len()
    }

    /// Half-bandwidth of any matrix coupling free vertices that share an element.
    pub fn free_bandwidth(&self) -> usize {
        self.free_bandwidth
    }

    pub fn measure(&self) -> T {
        self.elements.iter().map(|e| e.measure).sum()
    }

    pub fn diameter(&self) -> T {
        if self.dimension == 1 {
            T::one()
        } else {
            T::lit(2.0).sqrt()
        }
    }

    /// Row-sum lumped mass weight of every vertex.
    pub fn lumped_mass(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.vertices.len()];
        let share = T::one() / T::from_usize_lossy(self.dimension + 1);
        for el in &self.elements {
            for &v in &el.vertices[..=self.dimension] {
                w[v] = w[v] + el.measure * share;
            }
        }
        w
    }

    /// Exact P1 element mass matrix entry factor: `∫_K φ_a φ_b = |K| (1 + δ_ab) / ((d+1)(d+2))`.
    pub(crate) fn mass_entry(&self, measure: T, same: bool) -> T {
        let d = self.dimension;
        let denom = T::from_usize_lossy((d + 1) * (d + 2));
        let num = if same { T::lit(2.0) } else { T::one() };
        measure * num / denom
    }

    pub(crate) fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_boundary_and_measure() {
        let m = Mesh::<f64>::interval(8).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_free(), 7);
        assert!(m.is_boundary(0) && m.is_boundary(8) && !m.is_boundary(4));
        assert!((m.measure() - 1.0).abs() < 1e-15);
        assert_eq!(m.free_bandwidth(), 1);
    }

    #[test]
    fn square_boundary_is_exactly_the_outer_ring() {
        let n = 4;
        let m = Mesh::<f64>::unit_square(n).unwrap();
        assert_eq!(m.num_elements(), 2 * n * n);
        for (v, x) in m.vertices().iter().enumerate() {
            let on = x[0] == 0.0 || x[1] == 0.0 || x[0] == 1.0 || x[1] == 1.0;
            assert_eq!(on, m.is_boundary(v));
        }
        assert!((m.measure() - 1.0).abs() < 1e-14);
        let lumped: f64 = m.lumped_mass().iter().sum();
        assert!((lumped - 1.0).abs() < 1e-14);
        assert!(m.elements().iter().all(|e| e.measure > 0.0));
    }

    #[test]
    fn basis_gradients_sum_to_zero() {
        let m = Mesh::<f64>::unit_square(3).unwrap();
        for e in m.elements() {
            for k in 0..2 {
                let s: f64 = e.basis_gradients.iter().map(|g| g[k]).sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_cells_rejected() {
        assert!(Mesh::<f64>::interval(0).is_err());
        assert!(Mesh::<f64>::unit_square(0).is_err());
    }
}
