//! Symmetric banded storage and its Cholesky factorization.

use crate::scalar::Real;

/// Symmetric matrix stored by its lower band: `band[i][k] = A[i][i - k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBanded<T> {
    n: usize,
    bandwidth: usize,
    band: Vec<Vec<T>>,
}

impl<T: Real> SymmetricBanded<T> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self { n, bandwidth, band: vec![vec![T::zero(); bandwidth + 1]; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Adds `v` to `A[i][j]` (and therefore to `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        assert!(k <= self.bandwidth, "entry ({i}, {j}) outside band {}", self.bandwidth);
        self.band[r][k] = self.band[r][k] + v;
    }

    pub fn scale(&mut self, c: T) {
        for row in &mut self.band {
            for v in row.iter_mut() {
                *v = *v * c;
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > self.bandwidth {
            T::zero()
        } else {
            self.band[r][k]
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        self.band.iter().map(|row| row[0]).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            y[i] = y[i] + self.band[i][0] * x[i];
            for k in 1..=self.bandwidth.min(i) {
                let a = self.band[i][k];
                let j = i - k;
                y[i] = y[i] + a * x[j];
                y[j] = y[j] + a * x[i];
            }
        }
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Banded Cholesky `A = L Lᵀ`; `None` when a pivot is not strictly positive or not finite.
    pub fn cholesky(&self) -> Option<BandedCholesky<T>> {
        let n = self.n;
        let bw = self.bandwidth;
        let mut l = vec![vec![T::zero(); bw + 1]; n];
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            for j in jmin..=i {
                let mut s = self.band[i][i - j];
                let kmin = jmin.max(j.saturating_sub(bw));
                for k in kmin..j {
                    s = s - l[i][i - k] * l[j][j - k];
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return None;
                    }
                    l[i][0] = s.sqrt();
                } else {
                    l[i][i - j] = s / l[j][0];
                }
            }
        }
        Some(BandedCholesky { n, bandwidth: bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    n: usize,
    bandwidth: usize,
    l: Vec<Vec<T>>,
}

impl<T: Real> BandedCholesky<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let bw = self.bandwidth;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s = s - self.l[i][i - k] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in (i + 1)..(i + 1 + bw).min(self.n) {
                s = s - self.l[k][k - i] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_tridiagonal_system() {
        let n = 6;
        let mut a = SymmetricBanded::<f64>::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = a.cholesky().unwrap().solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_has_no_factor() {
        let mut a = SymmetricBanded::<f64>::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(0, 1, 2.0);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn wide_band_matches_dense_product() {
        let n = 9;
        let bw = 3;
        let mut a = SymmetricBanded::<f64>::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 10.0 + i as f64);
            for k in 1..=bw.min(i) {
                a.add(i, i - k, 0.3 / k as f64);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let dense = a.to_dense();
        let y = a.mul_vec(&x);
        for i in 0..n {
            let yi: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
            assert!((yi - y[i]).abs() < 1e-13);
        }
        let sol = a.cholesky().unwrap().solve(&y);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-12);
        }
    }
}
