//! Spatially constant barriers `v' = L(v)` bounding the reaction iterates in `L∞`.

use crate::error::{invalid, Error, Result};
use crate::reaction::{GrowthBounds, ReactionTerm, ScalarFn};
use crate::rothe::{RotheRun, TimeGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// `v0' = L0(v0)`, `v0(0) = κ`; bounds `|u|`.
    TwoSided,
    /// `v1' = min(L1(v1), 0)`, `v1(0) = −κ`.
    Lower,
    /// `v2' = max(L2(v2), 0)`, `v2(0) = κ`.
    Upper,
}

impl BarrierKind {
    pub fn initial_value<T: Real>(self, kappa: T) -> T {
        match self {
            Self::Lower => -kappa,
            _ => kappa,
        }
    }

    fn normalize<T: Real>(self, l: T) -> T {
        if l.is_nan() {
            return l;
        }
        match self {
            Self::TwoSided => l,
            Self::Lower => l.min(T::zero()),
            Self::Upper => l.max(T::zero()),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::TwoSided => "v0",
            Self::Lower => "v1",
            Self::Upper => "v2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierTrajectory<T> {
    pub kind: BarrierKind,
    pub kappa: T,
    /// `(t_n, v(t_n))`, truncated at blow-up or failure.
    pub samples: Vec<(T, T)>,
    /// First time `|v|` crossed the blow-up threshold; `None` means no blow-up was seen.
    pub t_max_estimate: Option<T>,
    /// Set when `L` returned a non-finite value.
    pub failure: Option<String>,
}

impl<T: Real> BarrierTrajectory<T> {
    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn last_value(&self) -> T {
        self.samples.last().map(|s| s.1).unwrap_or_else(|| self.kind.initial_value(self.kappa))
    }

    /// `true` when the samples are monotone in the direction the kind prescribes.
    pub fn is_monotone(&self) -> bool {
        self.samples.windows(2).all(|w| match self.kind {
            BarrierKind::Lower => w[1].1 <= w[0].1,
            _ => w[1].1 >= w[0].1,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.t_max_estimate.is_none() && self.failure.is_none()
    }
}

fn rk4<T: Real>(l: &dyn Fn(T) -> T, kind: BarrierKind, v: T, h: T) -> T {
    let f = |s: T| kind.normalize(l(s));
    let half = T::lit(0.5);
    let k1 = f(v);
    let k2 = f(v + half * h * k1);
    let k3 = f(v + half * h * k2);
    let k4 = f(v + h * k3);
    v + h / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4)
}

/// Number of substeps of at most `dt` covering `span`; ratios within a few ulps of an integer
/// are rounded so that `1.0 / 0.02` gives 50 steps rather than 51.
fn substeps<T: Real>(span: T, dt: T) -> Option<usize> {
    let r = span / dt;
    let near = r.round();
    let m = if (r - near).abs() <= T::lit(64.0) * T::epsilon() * near { near } else { r.ceil() };
    m.to_usize().map(|m| m.max(1))
}

/// Integrates through the sample times with at most `dt` per substep, then on to `extend_to`
/// (unsampled) to detect blow-up just beyond the last sample.
fn integrate<T: Real>(
    l: &dyn Fn(T) -> T,
    kind: BarrierKind,
    kappa: T,
    times: &[T],
    dt: T,
    extend_to: T,
) -> BarrierTrajectory<T> {
    let threshold = T::lit(crate::BLOWUP_THRESHOLD);
    let mut v = kind.initial_value(kappa);
    let mut out = BarrierTrajectory { kind, kappa, samples: vec![(times[0], v)], t_max_estimate: None, failure: None };
    let mut t = times[0];
    let mut targets: Vec<(T, bool)> = times[1..].iter().map(|&s| (s, true)).collect();
    if extend_to > *times.last().expect("nonempty") {
        targets.push((extend_to, false));
    }
    for (target, sampled) in targets {
        let span = target - t;
        let m = substeps(span, dt).unwrap_or(1);
        let h = span / T::from_usize_lossy(m);
        for k in 1..=m {
            let next = rk4(l, kind, v, h);
            let t_next = if k == m { target } else { t + h * T::from_usize_lossy(k) };
            if next.is_nan() {
                out.failure = Some(format!("non-finite L evaluation near t = {t_next}"));
                return out;
            }
            v = next;
            if v.abs() > threshold {
                out.t_max_estimate = Some(t_next);
                return out;
            }
        }
        t = target;
        if sampled {
            out.samples.push((t, v));
        }
    }
    out
}

/// Fixed-step RK4 over `[0, horizon]`, sampled every step (`dt` is shrunk to divide the horizon).
pub fn integrate_barrier<T: Real>(
    l: &dyn Fn(T) -> T,
    kind: BarrierKind,
    kappa: T,
    horizon: T,
    dt: T,
) -> Result<BarrierTrajectory<T>> {
    check_args(kappa, horizon, dt)?;
    let steps = substeps(horizon, dt).ok_or_else(|| invalid("dt", "too small for the horizon"))?;
    let grid = TimeGrid::new(horizon, steps)?;
    Ok(integrate(l, kind, kappa, &grid.times(), dt, horizon))
}

/// RK4 with substeps of at most `dt`, sampled at the grid times.
pub fn integrate_on_grid<T: Real>(
    l: &dyn Fn(T) -> T,
    kind: BarrierKind,
    kappa: T,
    grid: &TimeGrid<T>,
    dt: T,
) -> Result<BarrierTrajectory<T>> {
    check_args(kappa, grid.horizon(), dt)?;
    Ok(integrate(l, kind, kappa, &grid.times(), dt, grid.horizon()))
}

fn check_args<T: Real>(kappa: T, horizon: T, dt: T) -> Result<()> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(invalid("dt", "must be positive"));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(invalid("T", "must be positive"));
    }
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(invalid("kappa", "must be a nonnegative finite number"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum BarrierSet<T> {
    TwoSided(BarrierTrajectory<T>),
    Ordered { lower: BarrierTrajectory<T>, upper: BarrierTrajectory<T> },
}

impl<T: Real> BarrierSet<T> {
    pub fn trajectories(&self) -> Vec<&BarrierTrajectory<T>> {
        match self {
            Self::TwoSided(v) => vec![v],
            Self::Ordered { lower, upper } => vec![lower, upper],
        }
    }

    pub fn blowup_time(&self) -> Option<T> {
        self.trajectories().iter().filter_map(|t| t.t_max_estimate).reduce(T::min)
    }

    pub fn num_samples(&self) -> usize {
        self.trajectories().iter().map(|t| t.samples.len()).min().unwrap_or(0)
    }

    /// Admissible interval at sample `n`.
    pub fn bounds_at(&self, n: usize) -> (T, T) {
        match self {
            Self::TwoSided(v) => (-v.samples[n].1, v.samples[n].1),
            Self::Ordered { lower, upper } => (lower.samples[n].1, upper.samples[n].1),
        }
    }

    /// Interval at the last sample; the barriers are monotone, so it contains all earlier ones.
    pub fn range_at_horizon(&self) -> (T, T) {
        self.bounds_at(self.num_samples() - 1)
    }
}

/// Barriers for a reaction with declared bounds, sampled on `grid`; `None` when `f` declares no
/// bounds (no containment certificate). Integration continues to `T/0.9` to catch blow-up just past `T`.
pub fn build_barriers<T: Real>(f: &ReactionTerm<T>, kappa: T, grid: &TimeGrid<T>, dt: T) -> Option<BarrierSet<T>> {
    let extend = grid.horizon() / T::lit(0.9);
    let times = grid.times();
    let run = |l: &ScalarFn<T>, kind| integrate(&**l, kind, kappa, &times, dt, extend);
    match f.bounds() {
        GrowthBounds::Undeclared => None,
        GrowthBounds::TwoSided { l0 } => Some(BarrierSet::TwoSided(run(l0, BarrierKind::TwoSided))),
        GrowthBounds::Ordered { l1, l2 } => {
            Some(BarrierSet::Ordered { lower: run(l1, BarrierKind::Lower), upper: run(l2, BarrierKind::Upper) })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport<T> {
    /// Largest excess over the slack-free barrier (negative when strictly inside).
    pub worst_violation: T,
    pub worst_step: usize,
    pub worst_vertex: usize,
    pub steps_checked: usize,
    pub holds: bool,
}

/// Nodal check `lower(t_n) ≤ u^n ≤ upper(t_n)` with slack `1e-6·(1 + |v(t_n)|)`.
pub fn containment_check<T: Real>(run: &RotheRun<T>, barriers: &BarrierSet<T>) -> Result<ContainmentReport<T>> {
    if barriers.num_samples() < run.iterates.len() {
        return Err(Error::Precondition(format!(
            "barriers have {} samples but the run has {} iterates",
            barriers.num_samples(),
            run.iterates.len()
        )));
    }
    let slack = |v: T| T::lit(1e-6) * (T::one() + v.abs());
    let mut report = ContainmentReport {
        worst_violation: T::neg_infinity(),
        worst_step: 0,
        worst_vertex: 0,
        steps_checked: run.iterates.len(),
        holds: true,
    };
    for (n, u) in run.iterates.iter().enumerate() {
        let (lo, hi) = barriers.bounds_at(n);
        for (i, &v) in u.values().iter().enumerate() {
            let excess = (lo - v).max(v - hi);
            if excess > report.worst_violation {
                report.worst_violation = excess;
                report.worst_step = n;
                report.worst_vertex = i;
            }
            if v < lo - slack(lo) || v > hi + slack(hi) || v.is_nan() {
                report.holds = false;
            }
        }
    }
    Ok(report)
}
