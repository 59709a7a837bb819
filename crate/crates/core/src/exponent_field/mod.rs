//! Variable exponents `p(x)` and the modular/Luxemburg machinery of `L^{p(x)}`.

mod checks;
mod simon;

pub use checks::{
    holder_pairing_check, holder_pairing_check_with_constant, norm_modular_bounds_check, power_norm_inequality_check,
    BoundRegime, HolderReport, NormModularReport, PowerNormReport, HOLDER_CONSTANT,
};
pub use simon::{fit_simon_constants, simon_reference_bounds, simon_vector_ops, SimonFit};

use crate::discretization::{Mesh, MeshFunction};
use crate::error::{invalid, Error, Result};
use crate::quadrature::simplex_power_integral;
use crate::scalar::Real;

/// Piecewise-constant exponent, one value per mesh element (sampled at the centroid).
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField<T> {
    element_values: Vec<T>,
    p_minus: T,
    p_plus: T,
    log_holder_estimate: Option<T>,
}

impl<T: Real> ExponentField<T> {
    /// Exponent with every value in `(1, ∞)`.
    pub fn new(element_values: Vec<T>) -> Result<Self> {
        let field = Self::with_lower_bound(element_values, T::one())?;
        if field.p_minus <= T::one() {
            return Err(invalid("exponent", format!("values must exceed 1, found {}", field.p_minus)));
        }
        Ok(field)
    }

    /// Exponent-like field whose values satisfy `value ≥ lower` (used for the weights of power-norm estimates).
    pub fn with_lower_bound(element_values: Vec<T>, lower: T) -> Result<Self> {
        if element_values.is_empty() {
            return Err(invalid("exponent", "no elements"));
        }
        let mut p_minus = T::infinity();
        let mut p_plus = T::neg_infinity();
        for (e, &v) in element_values.iter().enumerate() {
            if !v.is_finite() || v < lower {
                return Err(invalid("exponent", format!("element {e}: value {v} is not a finite number ≥ {lower}")));
            }
            p_minus = p_minus.min(v);
            p_plus = p_plus.max(v);
        }
        Ok(Self { element_values, p_minus, p_plus, log_holder_estimate: None })
    }

    pub fn constant(mesh: &Mesh<T>, value: T) -> Result<Self> {
        Self::new(vec![value; mesh.num_elements()])
    }

    /// Samples `p` at element centroids.
    pub fn from_fn(mesh: &Mesh<T>, p: impl Fn(&[T; 2]) -> T) -> Result<Self> {
        Self::new(mesh.elements().iter().map(|e| p(&e.centroid)).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.element_values
    }

    pub fn value(&self, e: usize) -> T {
        self.element_values[e]
    }

    pub fn num_elements(&self) -> usize {
        self.element_values.len()
    }

    pub fn p_minus(&self) -> T {
        self.p_minus
    }

    pub fn p_plus(&self) -> T {
        self.p_plus
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// Conjugate exponent `p/(p-1)`.
    pub fn conjugate(&self) -> Result<Self> {
        Self::new(self.element_values.iter().map(|&p| p / (p - T::one())).collect())
    }

    /// Pointwise product; the result only has to be ≥ 1.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.num_elements() != other.num_elements() {
            return Err(Error::MeshMismatch("exponent fields of different size".into()));
        }
        Self::with_lower_bound(self.element_values.iter().zip(&other.element_values).map(|(&a, &b)| a * b).collect(), T::one())
    }

    /// Elements where `p > 2`.
    pub fn superquadratic_elements(&self) -> Vec<usize> {
        (0..self.num_elements()).filter(|&e| self.element_values[e] > T::lit(2.0)).collect()
    }

    /// Checks `2d/(d+2) < p_- ≤ p_+ < d`, the standing assumption of the continuous theory.
    pub fn check_standing_assumptions(&self, dimension: usize) -> Result<()> {
        let d = T::from_usize_lossy(dimension);
        let lower = T::lit(2.0) * d / (d + T::lit(2.0));
        if self.p_minus > lower && self.p_plus < d {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "need {lower} < p_- ≤ p_+ < {d}, got p_- = {}, p_+ = {}",
                self.p_minus, self.p_plus
            )))
        }
    }

    pub fn log_holder_estimate(&self) -> Option<T> {
        self.log_holder_estimate
    }

    /// Attaches the diagnostic `max |p(x)-p(y)|·|ln|x-y||` over centroid pairs closer than a quarter of the
    /// domain diameter.
    pub fn with_log_holder_estimate(mut self, mesh: &Mesh<T>) -> Result<Self> {
        self.check_mesh(mesh)?;
        let radius = T::lit(0.25) * mesh.diameter();
        let els = mesh.elements();
        let mut best = T::zero();
        for a in 0..els.len() {
            for b in (a + 1)..els.len() {
                let dx = els[a].centroid[0] - els[b].centroid[0];
                let dy = els[a].centroid[1] - els[b].centroid[1];
                let r = (dx * dx + dy * dy).sqrt();
                if r > T::zero() && r <= radius {
                    let dp = (self.element_values[a] - self.element_values[b]).abs();
                    best = best.max(dp * r.ln().abs());
                }
            }
        }
        self.log_holder_estimate = Some(best);
        Ok(self)
    }

    pub(crate) fn check_mesh(&self, mesh: &Mesh<T>) -> Result<()> {
        if self.num_elements() == mesh.num_elements() {
            Ok(())
        } else {
            Err(Error::MeshMismatch(format!(
                "exponent has {} values, mesh has {} elements",
                self.num_elements(),
                mesh.num_elements()
            )))
        }
    }
}

/// `ρ_p(u) = ∫_Ω |u|^{p(x)} dx`, integrated exactly element by element.
pub fn semimodular<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>) -> Result<T> {
    p.check_mesh(u.mesh())?;
    Ok(element_power_moments(u, p, T::one()).into_iter().sum())
}

/// `∫_e |u/scale|^{p_e}` for every element.
pub(crate) fn element_power_moments<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>, scale: T) -> Vec<T> {
    let mesh = u.mesh();
    (0..mesh.num_elements())
        .map(|e| {
            let vals: Vec<T> = u.element_values(e).into_iter().map(|v| v / scale).collect();
            simplex_power_integral(&vals, mesh.elements()[e].measure, p.value(e))
        })
        .collect()
}

/// One term `m (c/λ)^q` of a modular written as a function of the dilation `λ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModularTerm<T> {
    pub moment: T,
    pub scale: T,
    pub exponent: T,
}

pub(crate) fn modular_at<T: Real>(terms: &[ModularTerm<T>], lambda: T) -> T {
    terms.iter().map(|t| t.moment * (t.scale / lambda).powf(t.exponent)).sum()
}

/// Root of `λ ↦ Σ m (c/λ)^q = 1` by bisection in `[1e-16 S, 1e16 S]` (`S = max c`), geometric midpoints,
/// at most 200 iterations, relative bracket width `1e-12`.
pub(crate) fn luxemburg_root<T: Real>(terms: &[ModularTerm<T>]) -> T {
    let terms: Vec<_> = terms.iter().copied().filter(|t| t.moment > T::zero()).collect();
    if terms.is_empty() {
        return T::zero();
    }
    let s = terms.iter().fold(T::zero(), |m, t| m.max(t.scale));
    let mut lo = T::lit(1e-16) * s;
    let mut hi = T::lit(1e16) * s;
    let tol = T::lit(1e-12).max(T::lit(4.0) * T::epsilon());
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        // ρ is strictly decreasing in λ
        if modular_at(&terms, mid) > T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * hi {
            break;
        }
    }
    (lo * hi).sqrt()
}

/// Luxemburg norm `inf{λ > 0 : ρ_p(u/λ) ≤ 1}`; zero for the zero function.
pub fn luxemburg_norm<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>) -> Result<T> {
    p.check_mesh(u.mesh())?;
    let s = u.max_abs();
    if s == T::zero() {
        return Ok(T::zero());
    }
    let moments = element_power_moments(u, p, s);
    let terms: Vec<_> = moments
        .into_iter()
        .zip(p.values())
        .map(|(m, &q)| ModularTerm { moment: m, scale: s, exponent: q })
        .collect();
    Ok(luxemburg_root(&terms))
}
