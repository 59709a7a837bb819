//! Subcommand implementations.

use std::time::Instant;

use rothe_px_core::barrier::{containment_check, integrate_barrier, BarrierKind, BarrierSet};
use rothe_px_core::elliptic::{solve_resolvent, solve_stationary, solve_torsion};
use rothe_px_core::rothe::{blowup_energy, cauchy_two_grid, energy_inequality_check, run, RotheRun, RunStatus};
use rothe_px_core::stabilization::stabilize;
use rothe_px_core::{MeshFunction, ResolventProblem, SolveReport};
use serde_json::{json, Value};

use crate::config::{load_config, ForcingSpec, ProblemKind, RunConfig};
use crate::emit::{mesh_function_csv, Cell, Csv, OutDir};
use crate::expr::{GrowthExpr, GROWTH_IDS};
use crate::{BarrierKindArg, Cli, CliError, Command, Outcome};

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Barrier { growth, kappa, horizon, dt, kind } => {
            let out = OutDir::new(&cli.out, cli.quiet)?;
            barrier(&out, growth, *kappa, *horizon, *dt, *kind)
        }
        Command::Verify { suite, expect_fail } => {
            let out = OutDir::new(&cli.out, cli.quiet)?;
            crate::verify::run_suites(&out, *suite, *expect_fail, cli.seed.unwrap_or(0), cli.quiet)
        }
        cmd => {
            let cfg = resolve_config(cli)?;
            let out = OutDir::new(&cli.out, cli.quiet)?;
            match cmd {
                Command::Elliptic => elliptic(&cfg, &out),
                Command::Parabolic => parabolic(&cfg, &out),
                Command::Steady => steady(&cfg, &out),
                Command::Stabilize => stabilize_cmd(&cfg, &out),
                Command::Cauchy { refinements } => cauchy(&cfg, &out, refinements.unwrap_or(cfg.refinements)),
                Command::Barrier { .. } | Command::Verify { .. } => unreachable!("handled above"),
            }
        }
    }
}

/// Loads `--config` (or the registry entry named by `--problem`), applies `--seed` and expands.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.problem) {
        (Some(path), None) => load_config(path)?,
        (None, Some(id)) => RunConfig::from_registry(id),
        (Some(_), Some(_)) => return Err(CliError::Config("give --config or --problem, not both".into())),
        (None, None) => return Err(CliError::Config("this subcommand needs --config or --problem".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.expand()
}

fn header(command: &str, cfg: &RunConfig) -> Value {
    json!({
        "command": command,
        "versions": { "rothe-px": env!("CARGO_PKG_VERSION"), "rothe-px-core": rothe_px_core::VERSION },
        "seed": cfg.seed,
        "config": cfg,
    })
}

fn solve_json(rep: &SolveReport<f64>) -> Value {
    json!({
        "status": format!("{:?}", rep.status),
        "iterations": rep.iterations,
        "residual": rep.final_residual_norm,
        "gradient_steps": rep.gradient_steps,
        "energy_trace": rep.energy_history,
    })
}

fn insert(v: &mut Value, key: &str, x: Value) {
    v.as_object_mut().expect("object").insert(key.to_owned(), x);
}

fn wall_times(v: &mut Value, start: Instant) {
    insert(v, "wall_times", json!({ "total_seconds": start.elapsed().as_secs_f64() }));
}

fn converged(rep: SolveReport<f64>, what: &str) -> Result<SolveReport<f64>, CliError> {
    if rep.converged() {
        Ok(rep)
    } else {
        Err(CliError::Solver(format!("{what}: {:?} after {} iterations, residual {}", rep.status, rep.iterations, rep.final_residual_norm)))
    }
}

pub fn elliptic(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let problem = cfg.problem();
    let inst = problem.instance()?;
    let opts = cfg.solver_options();
    let mut outcome = Outcome::default();
    let mut report = header("elliptic", cfg);
    match &problem.kind {
        ProblemKind::Evolution(_) => return Err(CliError::Config("elliptic needs a torsion or resolvent problem".into())),
        ProblemKind::Torsion { levels } => {
            let mut entries = Vec::new();
            let mut sups = Vec::new();
            for (i, &lambda) in levels.iter().enumerate() {
                let rep = converged(solve_torsion(lambda, &inst.exponent, &inst.mesh, &opts)?, &format!("torsion level {lambda}"))?;
                let name = if i == 0 { "solution.csv".to_owned() } else { format!("solution_level_{i}.csv") };
                out.csv(&name, &mesh_function_csv(&rep.solution))?;
                sups.push(rep.linf());
                let mut e = solve_json(&rep);
                insert(&mut e, "lambda", json!(lambda));
                insert(&mut e, "sup", json!(rep.linf()));
                insert(&mut e, "file", json!(name));
                entries.push(e);
            }
            insert(&mut report, "kind", json!("torsion"));
            insert(&mut report, "levels", Value::Array(entries));
            // ‖w_λ‖∞ / ‖w_1‖∞ = λ^{1/(p−1)} for constant p, relative to the first level
            if inst.exponent.is_constant() {
                let p = inst.exponent.p_minus();
                let base = levels[0];
                let scaling: Vec<Value> = levels
                    .iter()
                    .zip(&sups)
                    .map(|(&l, &s)| {
                        let predicted = (l / base).powf(1.0 / (p - 1.0));
                        let observed = s / sups[0];
                        let rel = (observed - predicted).abs() / predicted;
                        outcome.check(rel <= 1e-6, || format!("torsion scaling at λ = {l}: relative error {rel:e}"));
                        json!({ "lambda": l, "observed": observed, "predicted": predicted, "relative_error": rel })
                    })
                    .collect();
                insert(&mut report, "scaling", Value::Array(scaling));
            }
        }
        ProblemKind::Resolvent { lambda, rhs } => {
            let dim = problem.dimension();
            let g = MeshFunction::from_fn(&inst.mesh, |x| rhs.eval(x, dim));
            let prob = ResolventProblem::new(*lambda, g.clone(), inst.exponent.clone()).with_options(opts);
            let rep = converged(solve_resolvent(&prob, &g.with_dirichlet())?, "resolvent")?;
            out.csv("solution.csv", &mesh_function_csv(&rep.solution))?;
            insert(&mut report, "kind", json!("resolvent"));
            insert(&mut report, "solve", solve_json(&rep));
        }
    }
    out.json("report.json", &report)?;
    Ok(outcome)
}

fn status_json(status: &RunStatus) -> Value {
    match status {
        RunStatus::Completed => json!({ "label": status.label() }),
        RunStatus::BlowUpSuspected { step } => json!({ "label": status.label(), "step": step }),
        RunStatus::SolverFailed { step, reason } | RunStatus::StepRefused { step, reason } => {
            json!({ "label": status.label(), "step": step, "reason": reason })
        }
    }
}

fn timeseries(run: &RotheRun<f64>) -> Csv {
    let mut csv = Csv::new(&["n", "t", "linf", "l2", "modular_gradient", "step_rate", "energy"]);
    for d in &run.diagnostics {
        csv.row([d.n.into(), d.t.into(), d.linf.into(), d.l2.into(), d.modular_gradient.into(), d.step_rate.into(), d.energy.into()]);
    }
    csv
}

fn barrier_summary(b: &BarrierSet<f64>) -> Value {
    let (lo, hi) = b.range_at_horizon();
    json!({
        "kind": match b { BarrierSet::TwoSided(_) => "two-sided", BarrierSet::Ordered { .. } => "ordered" },
        "range_at_horizon": [lo, hi],
        "blowup_time_estimate": b.blowup_time(),
    })
}

pub fn parabolic(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ev = cfg.evolution()?;
    let inst = cfg.problem().instance()?;
    let grid = ev.grid()?;
    let u0 = ev.initial(&inst.mesh);
    let opts = cfg.run_options();
    let r = run(&u0, &ev.forcing(inst.mesh.dimension()), &grid, &inst.exponent, &opts)?;

    out.csv("timeseries.csv", &timeseries(&r))?;
    if cfg.snapshot_stride > 0 {
        let last = r.iterates.len() - 1;
        for (n, u) in r.iterates.iter().enumerate() {
            if n % cfg.snapshot_stride == 0 || n == last {
                out.csv(&format!("snapshot_{n}.csv"), &mesh_function_csv(u))?;
            }
        }
    }

    let mut outcome = Outcome::default();
    let mut meta = header("parabolic", cfg);
    insert(
        &mut meta,
        "scheme",
        json!({
            "T": grid.horizon(),
            "N": grid.steps(),
            "dt": grid.dt(),
            "source_mode": format!("{:?}", r.source_mode),
            "tolerance": r.tolerance,
            "blowup_threshold": opts.blowup_threshold,
        }),
    );
    insert(&mut meta, "status", status_json(&r.status));
    insert(&mut meta, "monotonicity_warnings", json!(r.monotonicity_warnings));
    insert(&mut meta, "solver_iterations", json!(r.solver_iterations));
    if let ForcingSpec::Reaction(spec) = &ev.forcing {
        if let Some(q) = spec.pure_power() {
            let e0 = blowup_energy(&r.iterates[0], &inst.exponent, q)?;
            insert(&mut meta, "initial_blowup_energy", json!({ "q": q, "value": e0, "negative": e0 < 0.0 }));
        }
    }
    match &r.status {
        RunStatus::Completed => {
            let e = energy_inequality_check(&r)?;
            outcome.check(e.holds, || format!("discrete energy inequality: margin {:e} at step {}", e.worst_margin, e.worst_prefix));
            insert(
                &mut meta,
                "energy_inequality",
                json!({ "lhs": e.lhs, "rhs": e.rhs, "worst_margin": e.worst_margin, "worst_prefix": e.worst_prefix, "allowed_slack": e.allowed_slack, "holds": e.holds }),
            );
        }
        RunStatus::SolverFailed { step, reason } => outcome.solver_failure = Some(format!("step {step}: {reason}")),
        RunStatus::BlowUpSuspected { .. } | RunStatus::StepRefused { .. } => {}
    }
    match &r.barriers {
        Some(b) => {
            let c = containment_check(&r, b)?;
            outcome.check(c.holds, || format!("barrier containment: excess {:e} at step {}", c.worst_violation, c.worst_step));
            let mut s = barrier_summary(b);
            insert(
                &mut s,
                "containment",
                json!({ "worst_violation": c.worst_violation, "worst_step": c.worst_step, "worst_vertex": c.worst_vertex, "steps_checked": c.steps_checked, "holds": c.holds }),
            );
            insert(&mut meta, "barriers", s);
        }
        None => insert(&mut meta, "barriers", Value::Null),
    }
    wall_times(&mut meta, start);
    out.json("run.json", &meta)?;
    Ok(outcome)
}

pub fn steady(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let ev = cfg.evolution()?;
    let inst = cfg.problem().instance()?;
    let f = ev.stationary_reaction(inst.mesh.dimension())?;
    let rep = converged(solve_stationary(&f, &inst.exponent, &inst.mesh, &cfg.solver_options())?, "stationary problem")?;
    out.csv("steady_state.csv", &mesh_function_csv(&rep.solution))?;
    let mut report = header("steady", cfg);
    insert(&mut report, "solve", solve_json(&rep));
    insert(&mut report, "sup", json!(rep.linf()));
    out.json("report.json", &report)?;
    Ok(Outcome::default())
}

pub fn stabilize_cmd(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ev = cfg.evolution()?;
    let inst = cfg.problem().instance()?;
    let f = ev.stationary_reaction(inst.mesh.dimension())?;
    if matches!(ev.forcing, ForcingSpec::Source(_)) {
        return Err(CliError::Config("stabilize needs a reaction (or no forcing)".into()));
    }
    let u0 = ev.initial(&inst.mesh);
    let rep = stabilize(&u0, &f, &inst.exponent, &ev.grid()?, &cfg.run_options(), &cfg.stabilize_options())?;

    let mut csv = Csv::new(&["n", "t", "dist_linf", "sandwich_gap", "min_value"]);
    for r in &rep.rows {
        csv.row([r.n.into(), r.t.into(), r.dist_linf.into(), r.sandwich_gap.unwrap_or(f64::NAN).into(), r.min_value.into()]);
    }
    out.csv("stabilization.csv", &csv)?;
    out.csv("steady_state.csv", &mesh_function_csv(&rep.steady_state))?;

    let mut outcome = Outcome::default();
    if let RunStatus::SolverFailed { step, reason } = &rep.status {
        outcome.solver_failure = Some(format!("step {step}: {reason}"));
    }
    outcome.check(rep.expansion_violations == 0, || {
        format!("no-expansion: {} steps, worst excess {:e}", rep.expansion_violations, rep.max_expansion)
    });
    outcome.check(rep.monotonicity_violations == 0, || format!("sandwich monotonicity: {} steps", rep.monotonicity_violations));
    outcome.check(rep.ordering_violations == 0, || format!("sandwich ordering: {} steps", rep.ordering_violations));

    let mut meta = header("stabilize", cfg);
    insert(&mut meta, "status", status_json(&rep.status));
    insert(
        &mut meta,
        "stabilization",
        json!({
            "mu": rep.mu,
            "threshold": rep.threshold,
            "tolerance": rep.tolerance,
            "converged": rep.converged(),
            "converged_at": rep.converged_at.map(|(n, t)| json!({ "n": n, "t": t })),
            "final_distance": rep.final_distance(),
            "final_gap": rep.final_gap(),
            "expansion_violations": rep.expansion_violations,
            "max_expansion": rep.max_expansion,
            "monotonicity_violations": rep.monotonicity_violations,
            "ordering_violations": rep.ordering_violations,
            "holds": rep.holds(),
        }),
    );
    wall_times(&mut meta, start);
    out.json("run.json", &meta)?;
    Ok(outcome)
}

pub fn barrier(out: &OutDir, growth: &str, kappa: f64, horizon: f64, dt: f64, kind: BarrierKindArg) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let l = GrowthExpr::named(growth)
        .ok_or_else(|| CliError::Config(format!("unknown growth `{growth}`; known: {}", GROWTH_IDS.join(", "))))?;
    let kind = match kind {
        BarrierKindArg::TwoSided => BarrierKind::TwoSided,
        BarrierKindArg::Lower => BarrierKind::Lower,
        BarrierKindArg::Upper => BarrierKind::Upper,
    };
    let tr = integrate_barrier(&|v| l.eval(v), kind, kappa, horizon, dt)?;
    let mut csv = Csv::new(&["t", "v"]);
    for &(t, v) in &tr.samples {
        csv.row([Cell::Float(t), Cell::Float(v)]);
    }
    out.csv("barrier.csv", &csv)?;
    let mut meta = json!({
        "command": "barrier",
        "versions": { "rothe-px": env!("CARGO_PKG_VERSION"), "rothe-px-core": rothe_px_core::VERSION },
        "growth": growth,
        "coefficients": l.coefficients,
        "kind": kind.label(),
        "kappa": kappa,
        "T": horizon,
        "dt": dt,
        "complete": tr.is_complete(),
        "t_max_estimate": tr.t_max_estimate,
        "failure": tr.failure,
        "monotone": tr.is_monotone(),
    });
    wall_times(&mut meta, start);
    out.json("run.json", &meta)?;
    let mut outcome = Outcome { solver_failure: tr.failure.clone(), ..Outcome::default() };
    outcome.check(tr.is_monotone(), || "barrier is not monotone".into());
    Ok(outcome)
}

pub fn cauchy(cfg: &RunConfig, out: &OutDir, refinements: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ev = cfg.evolution()?;
    let inst = cfg.problem().instance()?;
    let u0 = ev.initial(&inst.mesh);
    let forcing = ev.forcing(inst.mesh.dimension());
    let rep = cauchy_two_grid(&u0, &forcing, ev.horizon, ev.steps, &inst.exponent, &cfg.run_options(), refinements)?;
    let mut csv = Csv::new(&["k", "steps_coarse", "steps_fine", "delta", "ratio"]);
    for (k, &d) in rep.deltas.iter().enumerate() {
        let ratio = if k == 0 { f64::NAN } else { rep.ratios[k - 1] };
        csv.row([k.into(), rep.steps[k].into(), rep.steps[k + 1].into(), d.into(), ratio.into()]);
    }
    out.csv("cauchy.csv", &csv)?;
    let mut outcome = Outcome::default();
    outcome.check(rep.cauchy_trend_holds, || format!("Cauchy trend: deltas {:?}", rep.deltas));
    let mut meta = header("cauchy", cfg);
    insert(
        &mut meta,
        "cauchy",
        json!({ "refinements": refinements, "steps": rep.steps, "deltas": rep.deltas, "ratios": rep.ratios, "trend_holds": rep.cauchy_trend_holds }),
    );
    wall_times(&mut meta, start);
    out.json("run.json", &meta)?;
    Ok(outcome)
}
