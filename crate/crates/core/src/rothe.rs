//! Rothe semi-discretization: implicit in the diffusion, explicit in the reaction.

use std::fmt;
use std::sync::Arc;

use crate::barrier::{build_barriers, BarrierSet};
use crate::discretization::{assemble_mass_terms, dirichlet_energy, discrete_norms, Mesh, MeshFunction};
use crate::elliptic::{solve_resolvent, ResolventProblem, SolveReport, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::exponent_field::ExponentField;
use crate::quadrature::{gauss_legendre, simplex_power_integral, simplex_rule};
use crate::reaction::ReactionTerm;
use crate::scalar::Real;

/// Uniform grid `t_n = n·Δt`, `Δt = T/N`, with `t_N = T` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    steps: usize,
    dt: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(invalid("N", "must be ≥ 1"));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(invalid("T", "must be a positive finite number"));
        }
        Ok(Self { horizon, steps, dt: horizon / T::from_usize_lossy(steps) })
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn time(&self, n: usize) -> T {
        if n >= self.steps {
            self.horizon
        } else {
            T::from_usize_lossy(n) * self.dt
        }
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }

    /// Same horizon, `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self::new(self.horizon, self.steps * factor).expect("refinement of a valid grid")
    }
}

pub type SourceFn<T> = Arc<dyn Fn(T, &[T; 2]) -> T + Send + Sync>;

/// Right-hand side of the evolution.
#[derive(Clone)]
pub enum Forcing<T> {
    /// Time-dependent source `h(t, x)`, averaged over each step.
    Source(SourceFn<T>),
    /// Reaction `f(x, u)` evaluated at the previous iterate.
    Reaction(Arc<ReactionTerm<T>>),
}

impl<T: Real> Forcing<T> {
    pub fn source(h: impl Fn(T, &[T; 2]) -> T + Send + Sync + 'static) -> Self {
        Self::Source(Arc::new(h))
    }

    pub fn reaction(f: ReactionTerm<T>) -> Self {
        Self::Reaction(Arc::new(f))
    }

    pub fn none() -> Self {
        Self::source(|_, _| T::zero())
    }

    pub fn as_reaction(&self) -> Option<&Arc<ReactionTerm<T>>> {
        match self {
            Self::Reaction(f) => Some(f),
            Self::Source(_) => None,
        }
    }
}

impl<T> fmt::Debug for Forcing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Source(_) => write!(f, "Source"),
            Self::Reaction(r) => write!(f, "Reaction({r:?})"),
        }
    }
}

/// `h^n = (1/Δt) ∫_{t_{n-1}}^{t_n} h(s, ·) ds` by 3-point Gauss in time, nodal in space; `n = 1..=N`.
pub fn average_source<T: Real>(h: &SourceFn<T>, grid: &TimeGrid<T>, mesh: &Arc<Mesh<T>>) -> Vec<MeshFunction<T>> {
    let rule = gauss_legendre::<T>(3);
    (1..=grid.steps())
        .map(|n| {
            let (a, b) = (grid.time(n - 1), grid.time(n));
            MeshFunction::from_fn(mesh, |x| rule.iter().map(|&(s, w)| w * h(a + (b - a) * s, x)).sum())
        })
        .collect()
}

/// One step: solves `u − dt Δ_{p(x)} u = u_prev + dt·source` starting from `u_prev`.
pub fn step<T: Real>(
    u_prev: &MeshFunction<T>,
    source: &MeshFunction<T>,
    dt: T,
    exponent: &ExponentField<T>,
    options: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    if !(dt > T::zero()) {
        return Err(invalid("dt", "must be positive"));
    }
    let g = u_prev.lin_comb(T::one(), source, dt)?;
    let prob = ResolventProblem::new(dt, g, exponent.clone()).with_options(*options);
    solve_resolvent(&prob, u_prev)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    pub n: usize,
    pub t: T,
    pub linf: T,
    pub l2: T,
    pub modular_gradient: T,
    /// `‖(u^n − u^{n−1})/Δt‖_{L²}` (zero at `n = 0`)
    pub step_rate: T,
    /// `Φ(u^n) = ∫|∇u^n|^{p(x)}/p(x)`
    pub energy: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUpSuspected { step: usize },
    SolverFailed { step: usize, reason: String },
    StepRefused { step: usize, reason: String },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::BlowUpSuspected { .. } => "blow-up suspected",
            Self::SolverFailed { .. } => "solver failure",
            Self::StepRefused { .. } => "step refused",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    Averaged,
    Reaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions<T> {
    pub solver: SolverOptions<T>,
    pub blowup_threshold: T,
    /// Barrier ODE step as a fraction of the Rothe step.
    pub barrier_substeps: usize,
    /// Refuse horizons at or beyond `0.9·T_max` of the barrier ODEs.
    pub horizon_fraction: T,
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            blowup_threshold: T::lit(crate::BLOWUP_THRESHOLD),
            barrier_substeps: 10,
            horizon_fraction: T::lit(0.9),
        }
    }
}

impl<T: Real> RunOptions<T> {
    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.solver.tolerance = tol;
        self
    }
}

/// Complete record of a time-stepping run.
#[derive(Debug, Clone)]
pub struct RotheRun<T> {
    pub grid: TimeGrid<T>,
    pub exponent: ExponentField<T>,
    /// `u^0, …, u^M` with `M = N` on completion.
    pub iterates: Vec<MeshFunction<T>>,
    /// Source used in each step, `h^1, …, h^M`.
    pub sources: Vec<MeshFunction<T>>,
    pub source_mode: SourceMode,
    pub diagnostics: Vec<StepDiagnostics<T>>,
    pub solver_iterations: Vec<usize>,
    pub status: RunStatus,
    pub tolerance: T,
    /// Barrier trajectories when the reaction declares growth bounds.
    pub barriers: Option<BarrierSet<T>>,
    /// Steps where `Δt·Lip(f)` on the range of the previous iterate reached 1 (only monitored
    /// when no barrier certificate exists).
    pub monotonicity_warnings: Vec<usize>,
}

impl<T: Real> RotheRun<T> {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn blow_up_suspected(&self) -> bool {
        matches!(self.status, RunStatus::BlowUpSuspected { .. })
    }

    pub fn has_containment_certificate(&self) -> bool {
        self.barriers.is_some()
    }

    pub fn last(&self) -> &MeshFunction<T> {
        self.iterates.last().expect("u^0 is always present")
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        self.iterates[0].mesh()
    }

    pub fn into_result(self) -> Result<Self> {
        match &self.status {
            RunStatus::Completed => Ok(self),
            RunStatus::SolverFailed { step, reason } => Err(Error::SolverFailure { step: Some(*step), reason: reason.clone() }),
            RunStatus::StepRefused { reason, .. } => Err(Error::StepRefused(reason.clone())),
            RunStatus::BlowUpSuspected { step } => {
                Err(Error::SolverFailure { step: Some(*step), reason: "blow-up suspected".into() })
            }
        }
    }
}

fn diagnostics<T: Real>(
    n: usize,
    t: T,
    u: &MeshFunction<T>,
    prev: Option<&MeshFunction<T>>,
    dt: T,
    p: &ExponentField<T>,
) -> Result<StepDiagnostics<T>> {
    let (linf, l2, modular_gradient) = discrete_norms(u, p)?;
    let step_rate = match prev {
        Some(prev) => {
            let d = u.sub(prev)?;
            let (_, dd) = assemble_mass_terms(&d, &d)?;
            dd.max(T::zero()).sqrt() / dt
        }
        None => T::zero(),
    };
    Ok(StepDiagnostics { n, t, linf, l2, modular_gradient, step_rate, energy: dirichlet_energy(u, p)? })
}

/// Runs the scheme from `u0` over `grid`.
///
/// Invalid input and refused horizons are errors; per-step failures truncate the run and are
/// reported in [`RotheRun::status`].
pub fn run<T: Real>(
    u0: &MeshFunction<T>,
    forcing: &Forcing<T>,
    grid: &TimeGrid<T>,
    exponent: &ExponentField<T>,
    options: &RunOptions<T>,
) -> Result<RotheRun<T>> {
    let mesh = u0.mesh();
    exponent.check_mesh(mesh)?;
    if !u0.is_finite() {
        return Err(Error::Domain("initial datum is not finite".into()));
    }
    let u_init = u0.clone().with_dirichlet();
    let dt = grid.dt();
    let mut barriers = None;
    let mut certified_range = None;
    if let Forcing::Reaction(f) = forcing {
        let kappa = u_init.max_abs();
        let dt_barrier = dt / T::from_usize_lossy(options.barrier_substeps.max(1));
        if let Some(set) = build_barriers(f, kappa, grid, dt_barrier) {
            if let Some(tmax) = set.blowup_time() {
                if grid.horizon() >= options.horizon_fraction * tmax {
                    return Err(Error::StepRefused(format!(
                        "horizon T = {} is not below {} × barrier blow-up time {}",
                        grid.horizon(),
                        options.horizon_fraction,
                        tmax
                    )));
                }
            }
            let (lo, hi) = set.range_at_horizon();
            if !f.is_independent_of_u() {
                if let Some(lip) = f.lipschitz_on(lo, hi) {
                    if dt * lip >= T::one() {
                        return Err(Error::StepRefused(format!(
                            "Δt·Lip(f) = {} ≥ 1 on the certified range [{lo}, {hi}] (Lip = {lip}); need Δt < {}",
                            dt * lip,
                            T::one() / lip
                        )));
                    }
                }
            }
            certified_range = Some((lo, hi));
            barriers = Some(set);
        }
    }

    let source_mode = match forcing {
        Forcing::Source(_) => SourceMode::Averaged,
        Forcing::Reaction(_) => SourceMode::Reaction,
    };
    let averaged = match forcing {
        Forcing::Source(h) => Some(average_source(h, grid, mesh)),
        Forcing::Reaction(_) => None,
    };
    let mut out = RotheRun {
        grid: *grid,
        exponent: exponent.clone(),
        iterates: vec![u_init.clone()],
        sources: Vec::new(),
        source_mode,
        diagnostics: vec![diagnostics(0, T::zero(), &u_init, None, dt, exponent)?],
        solver_iterations: Vec::new(),
        status: RunStatus::Completed,
        tolerance: options.solver.tolerance,
        barriers,
        monotonicity_warnings: Vec::new(),
    };
    for n in 1..=grid.steps() {
        let prev = out.iterates.last().expect("nonempty").clone();
        let source = match (&averaged, forcing) {
            (Some(h), _) => h[n - 1].clone(),
            (None, Forcing::Reaction(f)) => {
                if certified_range.is_none() && !f.is_independent_of_u() {
                    if let Some(lip) = f.lipschitz_on(prev.min_value(), prev.max_value()) {
                        if dt * lip >= T::one() {
                            out.monotonicity_warnings.push(n);
                        }
                    }
                }
                f.apply(&prev)
            }
            (None, Forcing::Source(_)) => unreachable!("sources are averaged up front"),
        };
        let g = prev.lin_comb(T::one(), &source, dt)?;
        if !g.is_finite() {
            out.status = RunStatus::BlowUpSuspected { step: n };
            return Ok(out);
        }
        let report = step(&prev, &source, dt, exponent, &options.solver)?;
        if !report.converged() {
            out.status = RunStatus::SolverFailed {
                step: n,
                reason: format!("{:?}, residual {}", report.status, report.final_residual_norm),
            };
            return Ok(out);
        }
        let u = report.solution;
        out.solver_iterations.push(report.iterations);
        out.diagnostics.push(diagnostics(n, grid.time(n), &u, Some(&prev), dt, exponent)?);
        out.sources.push(source);
        let blown = !u.is_finite() || u.max_abs() > options.blowup_threshold;
        out.iterates.push(u);
        if blown {
            out.status = RunStatus::BlowUpSuspected { step: n };
            return Ok(out);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EnergyInequalityReport<T> {
    /// `Φ(u^N) − Φ(u^0) + ½ Σ Δt ‖(u^n − u^{n−1})/Δt‖²`
    pub lhs: T,
    /// `½ Σ Δt ‖h^n‖²`
    pub rhs: T,
    /// `rhs − lhs` minimized over all partial sums `N' ≤ N`.
    pub worst_margin: T,
    pub worst_prefix: usize,
    pub allowed_slack: T,
    pub holds: bool,
}

/// Discrete energy estimate of the scheme, with all `L²` norms taken in the lumped mass used by the solver.
pub fn energy_inequality_check<T: Real>(run: &RotheRun<T>) -> Result<EnergyInequalityReport<T>> {
    let mesh = run.mesh();
    let m = mesh.lumped_mass();
    let dt = run.grid.dt();
    let half = T::lit(0.5);
    let lumped_sq = |v: &[T]| v.iter().zip(&m).map(|(&a, &w)| w * a * a).sum::<T>();
    let phi0 = dirichlet_energy(&run.iterates[0], &run.exponent)?;
    let mut kinetic = T::zero();
    let mut forcing = T::zero();
    let mut worst_margin = T::infinity();
    let mut worst_prefix = 0;
    let mut max_l1 = T::zero();
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    for n in 1..run.iterates.len() {
        let d = run.iterates[n].sub(&run.iterates[n - 1])?;
        max_l1 = max_l1.max(d.values().iter().map(|v| v.abs()).sum());
        kinetic = kinetic + half * lumped_sq(d.values()) / dt;
        forcing = forcing + half * dt * lumped_sq(run.sources[n - 1].values());
        lhs = dirichlet_energy(&run.iterates[n], &run.exponent)? - phi0 + kinetic;
        rhs = forcing;
        if rhs - lhs < worst_margin {
            worst_margin = rhs - lhs;
            worst_prefix = n;
        }
    }
    if run.iterates.len() == 1 {
        worst_margin = T::zero();
    }
    let steps = T::from_usize_lossy(run.iterates.len() - 1);
    let allowed_slack = steps * run.tolerance * (T::one() + max_l1);
    Ok(EnergyInequalityReport { lhs, rhs, worst_margin, worst_prefix, allowed_slack, holds: worst_margin >= -allowed_slack })
}

/// `E(u) = ∫|∇u|^{p(x)}/p(x) − ∫ u^{q+1}/(q+1)`; for non-integer `q` the second integrand is
/// `|u|^{q+1}`, the antiderivative of the odd extension `|u|^{q−1}u`.
pub fn blowup_energy<T: Real>(u: &MeshFunction<T>, exponent: &ExponentField<T>, q: T) -> Result<T> {
    if !(q > T::one()) {
        return Err(invalid("q", "must exceed 1"));
    }
    let phi = dirichlet_energy(u, exponent)?;
    let mesh = u.mesh();
    let r = q + T::one();
    let integral: T = if q == q.round() {
        let k = r.to_i32().expect("moderate integer power");
        let npts = (k as usize + 4) / 2;
        let rule = simplex_rule::<T>(mesh.dimension(), npts);
        (0..mesh.num_elements())
            .map(|e| {
                let vals = u.element_values(e);
                let s: T = rule
                    .iter()
                    .map(|(b, w)| {
                        let x: T = vals.iter().zip(b.iter()).map(|(&v, &c)| v * c).sum();
                        *w * x.powi(k)
                    })
                    .sum();
                s * mesh.elements()[e].measure
            })
            .sum()
    } else {
        (0..mesh.num_elements())
            .map(|e| simplex_power_integral(&u.element_values(e), mesh.elements()[e].measure, r))
            .sum()
    };
    Ok(phi - integral / r)
}

#[derive(Debug, Clone)]
pub struct CauchyReport<T> {
    /// Step counts of the runs, `N·2^k`.
    pub steps: Vec<usize>,
    /// `δ_k = max_n ‖u_{Δt/2^k}(t_n) − u_{Δt/2^{k+1}}(t_n)‖_∞` over the coarse grid times.
    pub deltas: Vec<T>,
    /// `δ_{k+1}/δ_k` (NaN when `δ_k = 0`).
    pub ratios: Vec<T>,
    pub cauchy_trend_holds: bool,
}

/// Runs with `N, 2N, …, 2^refinements N` steps and compares consecutive runs on the coarse grid.
pub fn cauchy_two_grid<T: Real>(
    u0: &MeshFunction<T>,
    forcing: &Forcing<T>,
    horizon: T,
    coarse_steps: usize,
    exponent: &ExponentField<T>,
    options: &RunOptions<T>,
    refinements: usize,
) -> Result<CauchyReport<T>> {
    if coarse_steps < 2 {
        return Err(invalid("N_coarse", "must be ≥ 2"));
    }
    if refinements < 1 {
        return Err(invalid("refinements", "must be ≥ 1"));
    }
    let base = TimeGrid::new(horizon, coarse_steps)?;
    let grids: Vec<TimeGrid<T>> = (0..=refinements).map(|k| base.refined(1 << k)).collect();
    let runs: Vec<Result<RotheRun<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = grids
            .iter()
            .map(|g| s.spawn(move || run(u0, forcing, g, exponent, options).and_then(RotheRun::into_result)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut deltas = Vec::with_capacity(refinements);
    for k in 0..refinements {
        let (a, b) = (&runs[k], &runs[k + 1]);
        let mut delta = T::zero();
        for n in 0..=coarse_steps {
            let ua = &a.iterates[n << k];
            let ub = &b.iterates[n << (k + 1)];
            delta = delta.max(ua.sub(ub)?.max_abs());
        }
        deltas.push(delta);
    }
    let ratios = deltas.windows(2).map(|w| if w[0] > T::zero() { w[1] / w[0] } else { T::nan() }).collect();
    let slack = T::lit(10.0) * options.solver.tolerance;
    let cauchy_trend_holds = deltas.windows(2).all(|w| w[1] <= w[0] + slack);
    Ok(CauchyReport { steps: grids.iter().map(|g| g.steps()).collect(), deltas, ratios, cauchy_trend_holds })
}

/// Piecewise-constant and piecewise-linear interpolants at time `t`. On `(t_{n−1}, t_n]` the
/// constant one equals `u^n`, so both coincide at grid times.
pub fn interpolants<T: Real>(run: &RotheRun<T>, t: T) -> Result<(MeshFunction<T>, MeshFunction<T>)> {
    let last = run.iterates.len() - 1;
    let t_end = run.grid.time(last);
    if !(t >= T::zero() && t <= t_end) {
        return Err(Error::Domain(format!("t = {t} outside [0, {t_end}]")));
    }
    if t == T::zero() || last == 0 {
        return Ok((run.iterates[0].clone(), run.iterates[0].clone()));
    }
    let dt = run.grid.dt();
    let mut n = (t / dt).ceil().to_usize().unwrap_or(last).clamp(1, last);
    while n > 1 && t <= run.grid.time(n - 1) {
        n -= 1;
    }
    while n < last && t > run.grid.time(n) {
        n += 1;
    }
    let theta = (t - run.grid.time(n - 1)) / dt;
    let linear = run.iterates[n - 1].lin_comb(T::one() - theta, &run.iterates[n], theta)?;
    let linear = if t == run.grid.time(n) { run.iterates[n].clone() } else { linear };
    Ok((run.iterates[n].clone(), linear))
}
