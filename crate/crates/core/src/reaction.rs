//! Reaction terms `f(x, u)` together with the structure the solvers rely on.

use std::fmt;
use std::sync::Arc;

use crate::discretization::MeshFunction;
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

pub type PointFn<T> = Arc<dyn Fn(&[T; 2], T) -> T + Send + Sync>;
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type RangeFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Spatially uniform bounds on `f` by nondecreasing functions of `u`.
#[derive(Clone, Default)]
pub enum GrowthBounds<T> {
    #[default]
    Undeclared,
    /// `|f(x, v)| ≤ L0(v)`
    TwoSided { l0: ScalarFn<T> },
    /// `L1(v) ≤ f(x, v) ≤ L2(v)`
    Ordered { l1: ScalarFn<T>, l2: ScalarFn<T> },
}

impl<T> fmt::Debug for GrowthBounds<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Undeclared => write!(f, "Undeclared"),
            Self::TwoSided { .. } => write!(f, "TwoSided"),
            Self::Ordered { .. } => write!(f, "Ordered"),
        }
    }
}

#[derive(Clone)]
pub struct ReactionTerm<T> {
    name: String,
    eval: PointFn<T>,
    derivative: Option<PointFn<T>>,
    nonincreasing: bool,
    independent_of_u: bool,
    lipschitz: Option<RangeFn<T>>,
    bounds: GrowthBounds<T>,
    growth: Option<(T, T)>,
}

impl<T> fmt::Debug for ReactionTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionTerm")
            .field("name", &self.name)
            .field("nonincreasing", &self.nonincreasing)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ReactionTerm<T> {
    pub fn new(name: impl Into<String>, f: impl Fn(&[T; 2], T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            derivative: None,
            nonincreasing: false,
            independent_of_u: false,
            lipschitz: None,
            bounds: GrowthBounds::Undeclared,
            growth: None,
        }
    }

    pub fn zero() -> Self {
        Self::source("zero", |_| T::zero())
    }

    /// Pure source `f(x, u) = g(x)`.
    pub fn source(name: impl Into<String>, g: impl Fn(&[T; 2]) -> T + Send + Sync + 'static) -> Self {
        let mut r = Self::new(name, move |x, _| g(x));
        r.derivative = Some(Arc::new(|_, _| T::zero()));
        r.nonincreasing = true;
        r.independent_of_u = true;
        r.lipschitz = Some(Arc::new(|_, _| T::zero()));
        r
    }

    /// `f(x, u) = g(x) + Σ c_k u^{k}` with integer powers `k ≥ 1`; derivative, monotonicity and the
    /// Lipschitz modulus on bounded ranges are derived from the coefficients.
    pub fn polynomial(name: impl Into<String>, g: impl Fn(&[T; 2]) -> T + Send + Sync + 'static, terms: Vec<(T, i32)>) -> Self {
        assert!(terms.iter().all(|&(_, k)| k >= 1), "powers must be ≥ 1");
        let t_eval = terms.clone();
        let mut r = Self::new(name, move |x, u| g(x) + t_eval.iter().map(|&(c, k)| c * u.powi(k)).sum::<T>());
        let t_der = terms.clone();
        r.derivative = Some(Arc::new(move |_, u| {
            t_der
                .iter()
                .map(|&(c, k)| c * T::from_i32(k).unwrap() * u.powi(k - 1))
                .sum::<T>()
        }));
        let active: Vec<_> = terms.iter().filter(|t| t.0 != T::zero()).copied().collect();
        r.independent_of_u = active.is_empty();
        r.nonincreasing = active.iter().all(|&(c, k)| c < T::zero() && k % 2 == 1);
        let t_lip = active;
        r.lipschitz = Some(Arc::new(move |a: T, b: T| {
            let m = a.abs().max(b.abs());
            t_lip.iter().map(|&(c, k)| c.abs() * T::from_i32(k).unwrap() * m.powi(k - 1)).sum::<T>()
        }));
        r
    }

    pub fn with_derivative(mut self, df: impl Fn(&[T; 2], T) -> T + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    /// Declares `u ↦ f(x, u)` nonincreasing for every `x`.
    pub fn declare_nonincreasing(mut self) -> Self {
        self.nonincreasing = true;
        self
    }

    /// Lipschitz modulus of `u ↦ f(x, u)` on `[a, b]`.
    pub fn with_lipschitz(mut self, lip: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        self.lipschitz = Some(Arc::new(lip));
        self
    }

    pub fn with_two_sided_bound(mut self, l0: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.bounds = GrowthBounds::TwoSided { l0: Arc::new(l0) };
        self
    }

    pub fn with_ordered_bounds(
        mut self,
        l1: impl Fn(T) -> T + Send + Sync + 'static,
        l2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.bounds = GrowthBounds::Ordered { l1: Arc::new(l1), l2: Arc::new(l2) };
        self
    }

    /// Growth pair `(C, β)`: `|f(x, s)| ≤ C (1 + |s|^β)`.
    pub fn with_growth(mut self, c: T, beta: T) -> Self {
        self.growth = Some((c, beta));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.nonincreasing
    }

    pub fn is_independent_of_u(&self) -> bool {
        self.independent_of_u
    }

    pub fn bounds(&self) -> &GrowthBounds<T> {
        &self.bounds
    }

    pub fn growth(&self) -> Option<(T, T)> {
        self.growth
    }

    #[inline]
    pub fn eval(&self, x: &[T; 2], u: T) -> T {
        (self.eval)(x, u)
    }

    /// `∂f/∂u`, analytic when declared, otherwise a central difference.
    pub fn derivative(&self, x: &[T; 2], u: T) -> T {
        match &self.derivative {
            Some(d) => d(x, u),
            None => {
                let h = T::epsilon().cbrt() * (T::one() + u.abs());
                (self.eval(x, u + h) - self.eval(x, u - h)) / (h + h)
            }
        }
    }

    /// `F(x, s) = ∫_0^s f(x, σ) dσ` (5-point Gauss, exact for polynomials up to degree 9).
    pub fn antiderivative(&self, x: &[T; 2], s: T) -> T {
        if s == T::zero() {
            return T::zero();
        }
        gauss_legendre::<T>(5).into_iter().map(|(t, w)| w * self.eval(x, s * t)).sum::<T>() * s
    }

    /// Lipschitz modulus on `[a, b]` when one is known.
    pub fn lipschitz_on(&self, a: T, b: T) -> Option<T> {
        self.lipschitz.as_ref().map(|l| l(a.min(b), a.max(b)))
    }

    /// Nodal evaluation `x_i ↦ f(x_i, u_i)`.
    pub fn apply(&self, u: &MeshFunction<T>) -> MeshFunction<T> {
        let mesh = u.mesh();
        let vals = mesh.vertices().iter().zip(u.values()).map(|(x, &v)| self.eval(x, v)).collect();
        MeshFunction::from_values(mesh, vals).expect("same vertex count")
    }
}
