//! Quadrature rules and closed-form integrals of powers of affine functions.

use crate::scalar::Real;

/// Gauss-Legendre rule with `n` points mapped to `[0, 1]`, weights summing to one.
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1, "at least one quadrature point");
    let mut rule = Vec::with_capacity(n);
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    for i in 0..n {
        // Tricomi initial guess for the i-th root of P_n on [-1, 1]
        let mut x = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + half)).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), x);
            for k in 2..=n {
                let kf = T::from_usize_lossy(k);
                let p2 = ((two * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { T::one() } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - T::one());
            let dx = pn / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        if n == 1 {
            rule.push((half, T::one()));
            return rule;
        }
        let w = two / ((T::one() - x * x) * dp * dp);
        rule.push((half * (T::one() - x), half * w));
    }
    rule.reverse();
    rule
}

/// Quadrature on a reference simplex of dimension 1 or 2 given as barycentric
/// coordinates and weights that sum to one (multiply by the element measure).
/// `n` points per direction; exact for polynomial degree `2n - 2` in 2D and `2n - 1` in 1D.
pub fn simplex_rule<T: Real>(dimension: usize, n: usize) -> Vec<([T; 3], T)> {
    let line = gauss_legendre::<T>(n);
    match dimension {
        1 => line.iter().map(|&(s, w)| ([T::one() - s, s, T::zero()], w)).collect(),
        2 => {
            let mut out = Vec::with_capacity(n * n);
            let two = T::lit(2.0);
            for &(xi, wx) in &line {
                for &(eta, wy) in &line {
                    let x = xi;
                    let y = (T::one() - xi) * eta;
                    out.push(([T::one() - x - y, x, y], two * wx * wy * (T::one() - xi)));
                }
            }
            out
        }
        d => panic!("unsupported simplex dimension {d}"),
    }
}

/// `∫_l^r |s|^p (alpha + beta s) ds`, stable when the interval is short relative to its distance from zero.
pub fn power_times_affine<T: Real>(l: T, r: T, p: T, alpha: T, beta: T) -> T {
    if r <= l {
        return T::zero();
    }
    if l < T::zero() && r > T::zero() {
        return power_times_affine(l, T::zero(), p, alpha, beta) + power_times_affine(T::zero(), r, p, alpha, beta);
    }
    let width = r - l;
    let far = l.abs().max(r.abs());
    if width > T::lit(0.05) * far {
        let p1 = p + T::one();
        let p2 = p + T::lit(2.0);
        let f = |s: T| s.signum() * s.abs().powf(p1) / p1;
        let h = |s: T| s.abs().powf(p2) / p2;
        let f = |s: T| if s == T::zero() { T::zero() } else { f(s) };
        alpha * (f(r) - f(l)) + beta * (h(r) - h(l))
    } else {
        gauss_legendre::<T>(6)
            .into_iter()
            .map(|(s, w)| {
                let x = l + width * s;
                w * x.abs().powf(p) * (alpha + beta * x)
            })
            .sum::<T>()
            * width
    }
}

/// Exact `∫_K |u|^p dx` for `u` affine on the simplex `K` with the given vertex values.
/// `values.len()` is 2 (interval) or 3 (triangle); `measure` is `|K|`.
pub fn simplex_power_integral<T: Real>(values: &[T], measure: T, p: T) -> T {
    if p == T::zero() {
        return measure;
    }
    let mut v: Vec<T> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite nodal values"));
    let lo = v[0];
    let hi = v[v.len() - 1];
    let spread = hi - lo;
    let scale = lo.abs().max(hi.abs());
    if scale == T::zero() {
        return T::zero();
    }
    if spread <= T::lit(1e-4) * scale {
        // nearly constant, |u|^p is smooth and does not change sign
        let dim = values.len() - 1;
        return simplex_rule::<T>(dim, 4)
            .into_iter()
            .map(|(b, w)| {
                let u: T = values.iter().zip(b.iter()).map(|(&a, &c)| a * c).sum();
                w * u.abs().powf(p)
            })
            .sum::<T>()
            * measure;
    }
    match v.len() {
        2 => measure / spread * power_times_affine(lo, hi, p, T::one(), T::zero()),
        3 => {
            let mid = v[1];
            let two_area = T::lit(2.0) * measure;
            let mut total = T::zero();
            if mid > lo {
                // density 2|K| (s - lo) / ((mid - lo)(hi - lo))
                let c = two_area / ((mid - lo) * spread);
                total = total + c * power_times_affine(lo, mid, p, -lo, T::one());
            }
            if hi > mid {
                let c = two_area / ((hi - mid) * spread);
                total = total + c * power_times_affine(mid, hi, p, hi, -T::one());
            }
            total
        }
        n => panic!("simplex with {n} vertices"),
    }
}
