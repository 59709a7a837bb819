//! Pointwise vector inequalities for the map `ξ ↦ |ξ|^{p-2} ξ`.

use crate::scalar::{signed_pow, Real};

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn flux<T: Real>(v: &[T], p: T) -> Vec<T> {
    let r = norm(v);
    if r == T::zero() {
        return vec![T::zero(); v.len()];
    }
    let factor = signed_pow(r, p) / r;
    v.iter().map(|&x| factor * x).collect()
}

/// `( ||u|^{p-2}u - |v|^{p-2}v| , ⟨|u|^{p-2}u - |v|^{p-2}v, u - v⟩ )`.
pub fn simon_vector_ops<T: Real>(u: &[T], v: &[T], p: T) -> (T, T) {
    assert_eq!(u.len(), v.len());
    let (a, b) = (flux(u, p), flux(v, p));
    let diff: Vec<T> = a.iter().zip(&b).map(|(&x, &y)| x - y).collect();
    let mono = diff.iter().zip(u.iter().zip(v)).map(|(&d, (&x, &y))| d * (x - y)).sum();
    (norm(&diff), mono)
}

/// Right-hand sides (without constants) of the two vector inequalities:
/// difference bound `|u-v|(|u|+|v|)^{p-2}` (`p ≥ 2`) or `|u-v|^{p-1}` (`p ≤ 2`), and
/// monotonicity bound `|u-v|^p` (`p ≥ 2`) or `|u-v|²/(|u|+|v|)^{2-p}` (`p ≤ 2`).
pub fn simon_reference_bounds<T: Real>(u: &[T], v: &[T], p: T) -> (T, T) {
    let d: Vec<T> = u.iter().zip(v).map(|(&x, &y)| x - y).collect();
    let dn = norm(&d);
    let s = norm(u) + norm(v);
    let two = T::lit(2.0);
    if dn == T::zero() {
        return (T::zero(), T::zero());
    }
    if p >= two {
        (dn * s.powf(p - two), dn.powf(p))
    } else {
        (dn.powf(p - T::one()), dn * dn / s.powf(two - p))
    }
}

/// Empirical constants from a sample: `c` is the largest observed ratio of the difference
/// to its bound, `c_tilde` the smallest ratio of the monotonicity pairing to its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimonFit<T> {
    pub c: T,
    pub c_tilde: T,
    pub min_monotonicity: T,
    pub samples: usize,
}

pub fn fit_simon_constants<T: Real>(pairs: &[(Vec<T>, Vec<T>)], p: T) -> SimonFit<T> {
    let mut c = T::zero();
    let mut c_tilde = T::infinity();
    let mut min_mono = T::infinity();
    let mut samples = 0;
    for (u, v) in pairs {
        let (diff, mono) = simon_vector_ops(u, v, p);
        let (rd, rm) = simon_reference_bounds(u, v, p);
        min_mono = min_mono.min(mono);
        if rd > T::zero() && rm > T::zero() {
            c = c.max(diff / rd);
            c_tilde = c_tilde.min(mono / rm);
            samples += 1;
        }
    }
    SimonFit { c, c_tilde, min_monotonicity: min_mono, samples }
}
