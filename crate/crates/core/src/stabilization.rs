//! Long-time behaviour: convergence to the steady state, sub/supersolution sandwich, contraction.

use std::sync::Arc;

use crate::barrier::BarrierSet;
use crate::discretization::{Mesh, MeshFunction};
use crate::elliptic::{solve_stationary, solve_torsion, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::exponent_field::ExponentField;
use crate::reaction::ReactionTerm;
use crate::rothe::{run, Forcing, RotheRun, RunOptions, RunStatus, TimeGrid};
use crate::scalar::Real;

/// Relative tolerance of the nodal monotonicity, ordering and no-expansion checks.
pub const STABILIZATION_TOLERANCE: f64 = 1e-7;
pub const MAX_MU_DOUBLINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sandwich<T> {
    Off,
    /// Smallest `μ = 2^k`, `k ≤ 20`, passing the dominance check.
    Auto,
    Mu(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizeOptions<T> {
    /// `‖u^n − u_∞‖_∞` below which the run counts as converged.
    pub threshold: T,
    pub sandwich: Sandwich<T>,
}

impl<T: Real> Default for StabilizeOptions<T> {
    fn default() -> Self {
        Self { threshold: T::lit(1e-5), sandwich: Sandwich::Off }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationRow<T> {
    pub n: usize,
    pub t: T,
    pub dist_linf: T,
    /// `max(u₂ − u₁)`
    pub sandwich_gap: Option<T>,
    /// `min(u − u₁)`
    pub lower_margin: Option<T>,
    /// `min(u₂ − u)`
    pub upper_margin: Option<T>,
    pub min_value: T,
}

#[derive(Debug, Clone)]
pub struct StabilizationReport<T> {
    pub steady_state: MeshFunction<T>,
    pub rows: Vec<StabilizationRow<T>>,
    pub final_iterate: MeshFunction<T>,
    pub status: RunStatus,
    pub mu: Option<T>,
    /// Steps where a sandwich trajectory moved the wrong way or the ordering `u₁ ≤ u₂` failed.
    pub monotonicity_violations: usize,
    /// Steps where `u₁ ≤ u ≤ u₂` failed.
    pub ordering_violations: usize,
    /// Steps where the distance to `u_∞` exceeded an earlier one by more than the tolerance.
    pub expansion_violations: usize,
    pub max_expansion: T,
    pub tolerance: T,
    pub threshold: T,
    pub converged_at: Option<(usize, T)>,
}

impl<T: Real> StabilizationReport<T> {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub fn final_distance(&self) -> T {
        self.rows.last().map(|r| r.dist_linf).unwrap_or_else(T::nan)
    }

    pub fn final_gap(&self) -> Option<T> {
        self.rows.last().and_then(|r| r.sandwich_gap)
    }

    pub fn holds(&self) -> bool {
        self.status == RunStatus::Completed
            && self.expansion_violations == 0
            && self.monotonicity_violations == 0
            && self.ordering_violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceViolation<T> {
    pub vertex: usize,
    pub x: [T; 2],
    pub w: T,
    pub f_abs: T,
}

/// First free vertex where `μ < max(|f(x, w_μ)|, |f(x, −w_μ)|)`.
pub fn dominance_violation<T: Real>(mu: T, w: &MeshFunction<T>, f: &ReactionTerm<T>) -> Option<DominanceViolation<T>> {
    let mesh = w.mesh();
    mesh.free_vertices().iter().find_map(|&v| {
        let x = *mesh.vertex(v);
        let wv = w.values()[v];
        let f_abs = f.eval(&x, wv).abs().max(f.eval(&x, -wv).abs());
        (!(mu >= f_abs)).then_some(DominanceViolation { vertex: v, x, w: wv, f_abs })
    })
}

/// First free vertex where `|u₀| > w_μ`.
fn enclosure_violation<T: Real>(w: &MeshFunction<T>, u0: &MeshFunction<T>) -> Option<usize> {
    let slack = T::lit(STABILIZATION_TOLERANCE) * (T::one() + u0.max_abs());
    w.mesh().free_vertices().iter().copied().find(|&v| !(u0.values()[v].abs() <= w.values()[v] + slack))
}

fn mu_failure<T: Real>(mu: T, w: &MeshFunction<T>, f: &ReactionTerm<T>, enclose: Option<&MeshFunction<T>>) -> Option<String> {
    if let Some(d) = dominance_violation(mu, w, f) {
        return Some(format!(
            "μ = {mu} does not dominate f at vertex {} (x = ({}, {})): w_μ = {}, |f| = {}",
            d.vertex, d.x[0], d.x[1], d.w, d.f_abs
        ));
    }
    let u0 = enclose?;
    enclosure_violation(w, u0).map(|v| {
        format!("u0 = {} is outside [−w_μ, w_μ] at vertex {v} for μ = {mu} (w_μ = {})", u0.values()[v], w.values()[v])
    })
}

/// Torsion level `μ` and `w_μ` solving `−Δ_{p(x)} w = μ` with the dominance check passed and,
/// when `enclose` is given, `|u₀| ≤ w_μ` at every free vertex.
pub fn select_mu<T: Real>(
    f: &ReactionTerm<T>,
    exponent: &ExponentField<T>,
    mesh: &Arc<Mesh<T>>,
    options: &SolverOptions<T>,
    mu: Option<T>,
    enclose: Option<&MeshFunction<T>>,
) -> Result<(T, MeshFunction<T>)> {
    let torsion = |m: T| solve_torsion(m, exponent, mesh, options).and_then(|r| r.into_result(None)).map(|r| r.solution);
    if let Some(mu) = mu {
        let w = torsion(mu)?;
        return match mu_failure(mu, &w, f, enclose) {
            None => Ok((mu, w)),
            Some(msg) => Err(Error::Precondition(msg)),
        };
    }
    let mut m = T::one();
    let mut last = String::new();
    for _ in 0..=MAX_MU_DOUBLINGS {
        let w = torsion(m)?;
        match mu_failure(m, &w, f, enclose) {
            None => return Ok((m, w)),
            Some(msg) => last = msg,
        }
        m = m + m;
    }
    Err(Error::Precondition(format!("no μ ≤ 2^{MAX_MU_DOUBLINGS} works; last attempt: {last}")))
}

fn scale_of<T: Real>(fs: &[&MeshFunction<T>]) -> T {
    fs.iter().map(|f| f.max_abs()).fold(T::one(), T::max)
}

fn run_pair<T: Real>(
    a: &MeshFunction<T>,
    b: &MeshFunction<T>,
    forcing: &Forcing<T>,
    grid: &TimeGrid<T>,
    exponent: &ExponentField<T>,
    options: &RunOptions<T>,
) -> Result<(RotheRun<T>, RotheRun<T>)> {
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| run(a, forcing, grid, exponent, options));
        let hb = s.spawn(|| run(b, forcing, grid, exponent, options));
        (ha.join().expect("run thread panicked"), hb.join().expect("run thread panicked"))
    });
    Ok((ra?, rb?))
}

fn require_monotone<T: Real>(f: &ReactionTerm<T>) -> Result<()> {
    if f.is_nonincreasing() {
        Ok(())
    } else {
        Err(Error::NonMonotoneReaction(format!("{} is not declared nonincreasing in u", f.name())))
    }
}

/// Refuses `Δt·Lip(f) ≥ 1` on `[−r, r]`.
fn gate<T: Real>(f: &ReactionTerm<T>, dt: T, r: T) -> Result<()> {
    if let Some(lip) = f.lipschitz_on(-r, r) {
        if dt * lip >= T::one() {
            return Err(Error::StepRefused(format!(
                "Δt·Lip(f) = {} ≥ 1 on [−{r}, {r}] (Lip = {lip}); need Δt < {}",
                dt * lip,
                T::one() / lip
            )));
        }
    }
    Ok(())
}

struct SandwichRuns<T> {
    mu: T,
    lower: RotheRun<T>,
    upper: RotheRun<T>,
}

fn count_sandwich_violations<T: Real>(s: &SandwichRuns<T>, tol: T) -> usize {
    let steps = s.lower.iterates.len().min(s.upper.iterates.len());
    (0..steps)
        .filter(|&n| {
            let (l, u) = (&s.lower.iterates[n], &s.upper.iterates[n]);
            let ordered = l.values().iter().zip(u.values()).all(|(&a, &b)| a <= b + tol);
            let monotone = n == 0 || {
                let (lp, up) = (&s.lower.iterates[n - 1], &s.upper.iterates[n - 1]);
                l.values().iter().zip(lp.values()).all(|(&a, &b)| a >= b - tol)
                    && u.values().iter().zip(up.values()).all(|(&a, &b)| a <= b + tol)
            };
            !(ordered && monotone)
        })
        .count()
}

fn min_diff<T: Real>(a: &MeshFunction<T>, b: &MeshFunction<T>) -> T {
    a.values().iter().zip(b.values()).map(|(&x, &y)| x - y).fold(T::infinity(), T::min)
}

fn build_report<T: Real>(
    main: &RotheRun<T>,
    steady: MeshFunction<T>,
    sandwich: Option<&SandwichRuns<T>>,
    tol: T,
    threshold: T,
    status: RunStatus,
) -> Result<StabilizationReport<T>> {
    let mut rows = Vec::with_capacity(main.iterates.len());
    let mut running_min = T::infinity();
    let mut expansion_violations = 0;
    let mut max_expansion = T::neg_infinity();
    let mut converged_at = None;
    let mut ordering_violations = 0;
    for (n, u) in main.iterates.iter().enumerate() {
        let t = main.grid.time(n);
        let dist = u.sub(&steady)?.max_abs();
        if n > 0 {
            let excess = dist - running_min;
            max_expansion = max_expansion.max(excess);
            if excess > tol {
                expansion_violations += 1;
            }
        }
        running_min = running_min.min(dist);
        if converged_at.is_none() && dist <= threshold {
            converged_at = Some((n, t));
        }
        let (mut gap, mut lower_margin, mut upper_margin) = (None, None, None);
        if let Some(s) = sandwich {
            if let (Some(l), Some(h)) = (s.lower.iterates.get(n), s.upper.iterates.get(n)) {
                gap = Some(h.sub(l)?.max_abs());
                lower_margin = Some(min_diff(u, l));
                upper_margin = Some(min_diff(h, u));
                if lower_margin.unwrap() < -tol || upper_margin.unwrap() < -tol {
                    ordering_violations += 1;
                }
            }
        }
        rows.push(StabilizationRow { n, t, dist_linf: dist, sandwich_gap: gap, lower_margin, upper_margin, min_value: u.min_value() });
    }
    Ok(StabilizationReport {
        steady_state: steady,
        rows,
        final_iterate: main.last().clone(),
        status,
        mu: sandwich.map(|s| s.mu),
        monotonicity_violations: sandwich.map(|s| count_sandwich_violations(s, tol)).unwrap_or(0),
        ordering_violations,
        expansion_violations,
        max_expansion: if max_expansion.is_finite() { max_expansion } else { T::zero() },
        tolerance: tol,
        threshold,
        converged_at,
    })
}

fn combined_status<T: Real>(runs: &[&RotheRun<T>]) -> RunStatus {
    runs.iter().map(|r| r.status.clone()).find(|s| *s != RunStatus::Completed).unwrap_or(RunStatus::Completed)
}

/// Runs from `u0` and measures `‖u^n − u_∞‖_∞` against the stationary solution.
pub fn stabilize<T: Real>(
    u0: &MeshFunction<T>,
    f: &Arc<ReactionTerm<T>>,
    exponent: &ExponentField<T>,
    grid: &TimeGrid<T>,
    run_options: &RunOptions<T>,
    options: &StabilizeOptions<T>,
) -> Result<StabilizationReport<T>> {
    require_monotone(f)?;
    if !(options.threshold > T::zero()) {
        return Err(invalid("threshold", "must be positive"));
    }
    let mesh = u0.mesh();
    let steady = solve_stationary(f, exponent, mesh, &run_options.solver)?.into_result(None)?.solution;
    let u0 = u0.clone().with_dirichlet();
    let mut radius = steady.max_abs() + u0.sub(&steady)?.max_abs();
    let sandwich_data = match options.sandwich {
        Sandwich::Off => None,
        Sandwich::Auto => Some(select_mu(f, exponent, mesh, &run_options.solver, None, Some(&u0))?),
        Sandwich::Mu(mu) => Some(select_mu(f, exponent, mesh, &run_options.solver, Some(mu), Some(&u0))?),
    };
    if let Some((_, w)) = &sandwich_data {
        radius = radius.max(w.max_abs());
    }
    gate(f, grid.dt(), radius)?;
    let forcing = Forcing::Reaction(Arc::clone(f));
    let tol = T::lit(STABILIZATION_TOLERANCE) * scale_of(&[&u0, &steady]);
    let (main, sandwich) = match sandwich_data {
        None => (run(&u0, &forcing, grid, exponent, run_options)?, None),
        Some((mu, w)) => {
            let (main, pair) = std::thread::scope(|s| {
                let h = s.spawn(|| run(&u0, &forcing, grid, exponent, run_options));
                let pair = run_pair(&w.scaled(-T::one()), &w, &forcing, grid, exponent, run_options);
                (h.join().expect("run thread panicked"), pair)
            });
            let (lower, upper) = pair?;
            (main?, Some(SandwichRuns { mu, lower, upper }))
        }
    };
    let status = match &sandwich {
        Some(s) => combined_status(&[&main, &s.lower, &s.upper]),
        None => main.status.clone(),
    };
    build_report(&main, steady, sandwich.as_ref(), tol, options.threshold, status)
}

/// Trajectories from `−w_μ` and `w_μ`; the report's distance is that of the farther one.
pub fn sandwich_run<T: Real>(
    f: &Arc<ReactionTerm<T>>,
    mu: Option<T>,
    exponent: &ExponentField<T>,
    mesh: &Arc<Mesh<T>>,
    grid: &TimeGrid<T>,
    run_options: &RunOptions<T>,
    threshold: T,
) -> Result<StabilizationReport<T>> {
    require_monotone(f)?;
    let steady = solve_stationary(f, exponent, mesh, &run_options.solver)?.into_result(None)?.solution;
    let (mu, w) = select_mu(f, exponent, mesh, &run_options.solver, mu, None)?;
    gate(f, grid.dt(), w.max_abs())?;
    let forcing = Forcing::Reaction(Arc::clone(f));
    let (lower, upper) = run_pair(&w.scaled(-T::one()), &w, &forcing, grid, exponent, run_options)?;
    let tol = T::lit(STABILIZATION_TOLERANCE) * scale_of(&[&w, &steady]);
    let status = combined_status(&[&lower, &upper]);
    let runs = SandwichRuns { mu, lower, upper };
    let mut report = build_report(&runs.upper, steady.clone(), Some(&runs), tol, threshold, status)?;
    // Distance of the farther trajectory; the no-expansion scan is redone on it.
    let mut running_min = T::infinity();
    report.expansion_violations = 0;
    report.max_expansion = T::zero();
    report.converged_at = None;
    report.ordering_violations = 0;
    for row in report.rows.iter_mut() {
        let n = row.n;
        let d_low = runs.lower.iterates[n].sub(&steady)?.max_abs();
        row.dist_linf = row.dist_linf.max(d_low);
        row.min_value = runs.lower.iterates[n].min_value();
        row.lower_margin = None;
        row.upper_margin = None;
        if n > 0 {
            report.max_expansion = report.max_expansion.max(row.dist_linf - running_min);
            if row.dist_linf > running_min + tol {
                report.expansion_violations += 1;
            }
        }
        running_min = running_min.min(row.dist_linf);
        if report.converged_at.is_none() && row.dist_linf <= threshold {
            report.converged_at = Some((n, row.t));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SemigroupContractionReport<T> {
    pub omega: T,
    /// `(t_n, ‖u^n − v^n‖_∞, e^{ω t_n}‖u₀ − v₀‖_∞)`
    pub series: Vec<(T, T, T)>,
    pub worst_excess: T,
    pub tolerance: T,
    pub holds: bool,
}

fn certified_range<T: Real>(b: &Option<BarrierSet<T>>) -> Option<(T, T)> {
    b.as_ref().map(|b| b.range_at_horizon())
}

/// `‖u^n − v^n‖_∞ ≤ e^{ω t_n}‖u₀ − v₀‖_∞ + tol`, with `ω` from the declared Lipschitz modulus on
/// the barrier-certified range unless given.
pub fn semigroup_contraction_check<T: Real>(
    u0: &MeshFunction<T>,
    v0: &MeshFunction<T>,
    forcing: &Forcing<T>,
    exponent: &ExponentField<T>,
    grid: &TimeGrid<T>,
    run_options: &RunOptions<T>,
    omega: Option<T>,
) -> Result<SemigroupContractionReport<T>> {
    u0.check_same_mesh(v0)?;
    let (ru, rv) = run_pair(u0, v0, forcing, grid, exponent, run_options)?;
    let (ru, rv) = (ru.into_result()?, rv.into_result()?);
    let omega = match (omega, forcing) {
        (Some(w), _) => w,
        (None, Forcing::Source(_)) => T::zero(),
        (None, Forcing::Reaction(f)) if f.is_nonincreasing() || f.is_independent_of_u() => T::zero(),
        (None, Forcing::Reaction(f)) => {
            let range = match (certified_range(&ru.barriers), certified_range(&rv.barriers)) {
                (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
                _ => return Err(Error::Precondition("no certified range for ω; declare growth bounds or pass ω".into())),
            };
            f.lipschitz_on(range.0, range.1)
                .ok_or_else(|| Error::Precondition(format!("{} declares no Lipschitz modulus; pass ω", f.name())))?
        }
    };
    let gap0 = ru.iterates[0].sub(&rv.iterates[0])?.max_abs();
    let tol = T::lit(STABILIZATION_TOLERANCE) * scale_of(&[u0, v0]);
    let mut series = Vec::with_capacity(ru.iterates.len());
    let mut worst_excess = T::neg_infinity();
    for (n, (a, b)) in ru.iterates.iter().zip(&rv.iterates).enumerate() {
        let t = grid.time(n);
        let gap = a.sub(b)?.max_abs();
        let bound = (omega * t).exp() * gap0;
        worst_excess = worst_excess.max(gap - bound);
        series.push((t, gap, bound));
    }
    Ok(SemigroupContractionReport { omega, series, worst_excess, tolerance: tol, holds: worst_excess <= tol })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport<T> {
    pub min_value: T,
    pub worst_step: usize,
    pub tolerance: T,
    pub holds: bool,
}

/// Nonnegativity of every iterate, for `u₀ ≥ 0` and `f(x, 0) ≥ 0`.
pub fn positivity_check<T: Real>(run: &RotheRun<T>, f: &ReactionTerm<T>) -> Result<PositivityReport<T>> {
    let mesh = run.mesh();
    if let Some(v) = mesh.free_vertices().iter().find(|&&v| f.eval(mesh.vertex(v), T::zero()) < T::zero()) {
        return Err(Error::Precondition(format!("f(x, 0) < 0 at vertex {v}")));
    }
    let u0 = &run.iterates[0];
    if u0.min_value() < T::zero() {
        return Err(Error::Precondition("initial datum has negative values".into()));
    }
    let tol = T::lit(1e-9) * (T::one() + u0.max_abs());
    let (worst_step, min_value) = run
        .iterates
        .iter()
        .map(|u| u.min_value())
        .enumerate()
        .fold((0, T::infinity()), |acc, (n, m)| if m < acc.1 { (n, m) } else { acc });
    Ok(PositivityReport { min_value, worst_step, tolerance: tol, holds: min_value >= -tol })
}
