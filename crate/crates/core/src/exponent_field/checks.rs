//! Numerical checks of the classical inequalities of variable-exponent Lebesgue spaces.

use super::{element_power_moments, luxemburg_norm, luxemburg_root, semimodular, ExponentField, ModularTerm};
use crate::discretization::MeshFunction;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, simplex_power_integral, simplex_rule};
use crate::scalar::Real;

/// Admissible constant used for the generalized Hölder check.
pub const HOLDER_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRegime {
    /// `‖u‖ ≥ 1`: `‖u‖^{p_-} ≤ ρ ≤ ‖u‖^{p_+}`
    AboveOne,
    /// `‖u‖ ≤ 1`: `‖u‖^{p_+} ≤ ρ ≤ ‖u‖^{p_-}`
    BelowOne,
}

#[derive(Debug, Clone)]
pub struct NormModularReport<T> {
    pub norm: T,
    pub modular: T,
    pub regime: BoundRegime,
    pub lower_bound: T,
    pub upper_bound: T,
    /// `modular - lower_bound`
    pub lower_slack: T,
    /// `upper_bound - modular`
    pub upper_slack: T,
    pub holds: bool,
}

pub fn norm_modular_bounds_check<T: Real>(u: &MeshFunction<T>, p: &ExponentField<T>) -> Result<NormModularReport<T>> {
    if u.is_zero() {
        return Err(Error::Domain("norm/modular bounds need u ≠ 0".into()));
    }
    let norm = luxemburg_norm(u, p)?;
    let modular = semimodular(u, p)?;
    let (regime, lower_bound, upper_bound) = if norm >= T::one() {
        (BoundRegime::AboveOne, norm.powf(p.p_minus()), norm.powf(p.p_plus()))
    } else {
        (BoundRegime::BelowOne, norm.powf(p.p_plus()), norm.powf(p.p_minus()))
    };
    let lower_slack = modular - lower_bound;
    let upper_slack = upper_bound - modular;
    // the computed norm carries a relative error of about 1e-12
    let tol = T::lit(1e-10) * (T::one() + modular);
    Ok(NormModularReport {
        norm,
        modular,
        regime,
        lower_bound,
        upper_bound,
        lower_slack,
        upper_slack,
        holds: lower_slack >= -tol && upper_slack >= -tol,
    })
}

#[derive(Debug, Clone)]
pub struct HolderReport<T> {
    /// `∫|fg|`
    pub lhs: T,
    pub norm_f: T,
    /// Norm of `g` in `L^{p_c(x)}`.
    pub norm_g_conjugate: T,
    pub constant: T,
    /// `lhs / (‖f‖ ‖g‖)`, zero when either norm vanishes.
    pub ratio: T,
    pub holds: bool,
}

pub fn holder_pairing_check<T: Real>(f: &MeshFunction<T>, g: &MeshFunction<T>, p: &ExponentField<T>) -> Result<HolderReport<T>> {
    holder_pairing_check_with_constant(f, g, p, T::lit(HOLDER_CONSTANT))
}

/// Hölder check with an explicit constant (a negative constant is how fault injection is exercised).
pub fn holder_pairing_check_with_constant<T: Real>(
    f: &MeshFunction<T>,
    g: &MeshFunction<T>,
    p: &ExponentField<T>,
    constant: T,
) -> Result<HolderReport<T>> {
    f.check_same_mesh(g)?;
    let lhs = abs_product_integral(f, g);
    let norm_f = luxemburg_norm(f, p)?;
    let norm_g_conjugate = luxemburg_norm(g, &p.conjugate()?)?;
    let rhs = constant * norm_f * norm_g_conjugate;
    let denom = norm_f * norm_g_conjugate;
    let ratio = if denom > T::zero() { lhs / denom } else { T::zero() };
    let tol = T::lit(1e-12) * (T::one() + lhs.abs());
    Ok(HolderReport { lhs, norm_f, norm_g_conjugate, constant, ratio, holds: lhs <= rhs + tol })
}

/// `∫_Ω |f g| dx`: exact in 1D (split at sign changes), refined quadrature in 2D.
pub(crate) fn abs_product_integral<T: Real>(f: &MeshFunction<T>, g: &MeshFunction<T>) -> T {
    let mesh = f.mesh();
    let mut total = T::zero();
    if mesh.dimension() == 1 {
        let gauss = gauss_legendre::<T>(2);
        for e in 0..mesh.num_elements() {
            let (fv, gv) = (f.element_values(e), g.element_values(e));
            let mut cuts = vec![T::zero(), T::one()];
            for v in [&fv, &gv] {
                let d = v[1] - v[0];
                if d != T::zero() {
                    let s = -v[0] / d;
                    if s > T::zero() && s < T::one() {
                        cuts.push(s);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut acc = T::zero();
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                for &(s, wt) in &gauss {
                    let t = a + (b - a) * s;
                    let fx = fv[0] + (fv[1] - fv[0]) * t;
                    let gx = gv[0] + (gv[1] - gv[0]) * t;
                    acc = acc + wt * (b - a) * (fx * gx).abs();
                }
            }
            total = total + acc * mesh.elements()[e].measure;
        }
    } else {
        let k = 6;
        let rule = simplex_rule::<T>(2, 3);
        let kf = T::from_usize_lossy(k);
        for e in 0..mesh.num_elements() {
            let (fv, gv) = (f.element_values(e), g.element_values(e));
            let mut acc = T::zero();
            let eval = |x: T, y: T| {
                let b = [T::one() - x - y, x, y];
                let fx: T = (0..3).map(|i| fv[i] * b[i]).sum();
                let gx: T = (0..3).map(|i| gv[i] * b[i]).sum();
                (fx * gx).abs()
            };
            for i in 0..k {
                for j in 0..(k - i) {
                    let (xi, yj) = (T::from_usize_lossy(i), T::from_usize_lossy(j));
                    // upward sub-triangle (i,j),(i+1,j),(i,j+1) and, if present, the downward one
                    let mut subs = vec![[(xi, yj), (xi + T::one(), yj), (xi, yj + T::one())]];
                    if j + 1 < k - i {
                        subs.push([(xi + T::one(), yj), (xi + T::one(), yj + T::one()), (xi, yj + T::one())]);
                    }
                    for s in subs {
                        for (bc, w) in &rule {
                            let x = (bc[0] * s[0].0 + bc[1] * s[1].0 + bc[2] * s[2].0) / kf;
                            let y = (bc[0] * s[0].1 + bc[1] * s[1].1 + bc[2] * s[2].1) / kf;
                            acc = acc + *w * eval(x, y);
                        }
                    }
                }
            }
            total = total + acc / (kf * kf) * mesh.elements()[e].measure;
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct PowerNormReport<T> {
    /// `‖ |f|^{p(x)} ‖_{L^{q(x)}}`
    pub lhs: T,
    /// `‖f‖^{p_-} + ‖f‖^{p_+}` with the norm taken in `L^{p(x)q(x)}`
    pub rhs: T,
    pub norm_pq: T,
    pub slack: T,
    pub holds: bool,
}

/// Power-norm inequality `‖f^{p(x)}‖_{L^{q(x)}} ≤ ‖f‖^{p_-}_{L^{pq}} + ‖f‖^{p_+}_{L^{pq}}`.
pub fn power_norm_inequality_check<T: Real>(
    f: &MeshFunction<T>,
    p_exp: &ExponentField<T>,
    q_exp: &ExponentField<T>,
) -> Result<PowerNormReport<T>> {
    p_exp.check_mesh(f.mesh())?;
    q_exp.check_mesh(f.mesh())?;
    if p_exp.p_minus() < T::zero() {
        return Err(Error::Domain("power exponent must be ≥ 0".into()));
    }
    let pq = p_exp
        .product(q_exp)
        .map_err(|_| Error::Domain("need p(x)·q(x) ≥ 1 on every element".into()))?;
    let norm_pq = luxemburg_norm(f, &pq)?;
    let s = f.max_abs();
    let lhs = if s == T::zero() {
        T::zero()
    } else {
        let moments = element_power_moments(f, &pq, s);
        let mesh = f.mesh();
        let terms: Vec<_> = (0..mesh.num_elements())
            .map(|e| {
                let (pe, qe) = (p_exp.value(e), q_exp.value(e));
                let moment = if pe == T::zero() {
                    simplex_power_integral(&[T::one(), T::one()][..mesh.dimension() + 1], mesh.elements()[e].measure, qe)
                } else {
                    moments[e]
                };
                ModularTerm { moment, scale: s.powf(pe), exponent: qe }
            })
            .collect();
        luxemburg_root(&terms)
    };
    let rhs = norm_pq.powf(p_exp.p_minus()) + norm_pq.powf(p_exp.p_plus());
    let slack = rhs - lhs;
    Ok(PowerNormReport { lhs, rhs, norm_pq, slack, holds: slack >= -T::lit(1e-10) * (T::one() + rhs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Mesh;

    #[test]
    fn holder_zero_and_cauchy_schwarz_cases() {
        let m = Mesh::<f64>::interval(20).unwrap();
        let p = ExponentField::constant(&m, 2.0).unwrap();
        let f = MeshFunction::from_fn(&m, |x| (3.0 * x[0]).sin() + 0.2);
        let r0 = holder_pairing_check(&f, &MeshFunction::zeros(&m), &p).unwrap();
        assert_eq!(r0.lhs, 0.0);
        assert!(r0.holds);
        let r = holder_pairing_check(&f, &f, &p).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-10, "ratio {}", r.ratio);
        assert!(r.holds);
        let bad = holder_pairing_check_with_constant(&f, &f, &p, -2.0).unwrap();
        assert!(!bad.holds);
    }

    #[test]
    fn abs_product_in_2d_is_accurate() {
        let m = Mesh::<f64>::unit_square(4).unwrap();
        let f = MeshFunction::constant(&m, 2.0);
        let g = MeshFunction::from_fn(&m, |x| x[0] + x[1]);
        assert!((abs_product_integral(&f, &g) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_norm_degenerate_cases() {
        let m = Mesh::<f64>::interval(16).unwrap();
        let one = ExponentField::with_lower_bound(vec![1.0; 16], 0.0).unwrap();
        let two = ExponentField::constant(&m, 2.0).unwrap();
        let zero = MeshFunction::zeros(&m);
        let r = power_norm_inequality_check(&zero, &one, &two).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let f = MeshFunction::from_fn(&m, |x| x[0] * (1.0 - x[0]) * 4.0);
        let r = power_norm_inequality_check(&f, &one, &two).unwrap();
        // p ≡ 1: ‖f‖ ≤ 2‖f‖
        assert!((r.lhs - r.norm_pq).abs() < 1e-10 * r.lhs);
        assert!((r.rhs - 2.0 * r.norm_pq).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn power_norm_rejects_small_product() {
        let m = Mesh::<f64>::interval(4).unwrap();
        let half = ExponentField::with_lower_bound(vec![0.25; 4], 0.0).unwrap();
        let two = ExponentField::constant(&m, 2.0).unwrap();
        let f = MeshFunction::constant(&m, 1.0);
        assert!(matches!(power_norm_inequality_check(&f, &half, &two), Err(Error::Domain(_))));
    }
}
