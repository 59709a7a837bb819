use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rothe_px_core::elliptic::solve_stationary;
use rothe_px_core::rothe::{run, Forcing, RunOptions};
use rothe_px_core::stabilization::{
    positivity_check, sandwich_run, select_mu, semigroup_contraction_check, stabilize, Sandwich, StabilizationReport, StabilizeOptions,
};
use rothe_px_core::{Error, ExponentField, Mesh, MeshFunction, ReactionTerm, TimeGrid};

fn opts() -> RunOptions<f64> {
    RunOptions::default().with_tolerance(1e-11)
}

fn summary(r: &StabilizationReport<f64>) -> String {
    format!(
        "status {:?}, mu {:?}, expansion {} (max {:e}), monotonicity {}, ordering {}, final distance {:e}, gap {:?}",
        r.status,
        r.mu,
        r.expansion_violations,
        r.max_expansion,
        r.monotonicity_violations,
        r.ordering_violations,
        r.final_distance(),
        r.final_gap()
    )
}

fn cubic() -> Arc<ReactionTerm<f64>> {
    Arc::new(ReactionTerm::polynomial("1-u^3", |_| 1.0, vec![(-1.0, 3)]))
}

#[test]
fn stationary_initial_datum_does_not_move() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::from_fn(&m, |x| 1.8 + 0.4 * x[0]).unwrap();
    let f = cubic();
    let steady = solve_stationary(&f, &p, &m, &opts().solver).unwrap().solution;
    let rep = stabilize(&steady, &f, &p, &TimeGrid::new(1.0, 20).unwrap(), &opts(), &StabilizeOptions::default()).unwrap();
    assert!(rep.holds(), "{}", summary(&rep));
    for r in &rep.rows {
        assert!(r.dist_linf <= 1e-8, "{r:?}");
    }
}

#[test]
fn linear_decay_follows_the_first_eigenmode() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let f = Arc::new(ReactionTerm::polynomial("sin-u", |x| (PI * x[0]).sin(), vec![(-1.0, 1)]));
    let u0 = MeshFunction::zeros(&m);
    let rep = stabilize(&u0, &f, &p, &TimeGrid::new(2.0, 400).unwrap(), &opts(), &StabilizeOptions::default()).unwrap();
    assert!(rep.holds() && rep.converged(), "{}", summary(&rep));
    assert!(rep.final_distance() < 1e-4);
    let d0 = rep.rows[0].dist_linf;
    for r in rep.rows.iter().filter(|r| r.dist_linf > 1e-8) {
        let reference = d0 * (-(PI * PI + 1.0) * r.t).exp();
        let ratio = r.dist_linf / reference;
        assert!((0.5..=2.0).contains(&ratio), "t = {}: {ratio}", r.t);
    }
}

#[test]
fn both_torsion_endpoints_reach_the_same_limit() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::from_fn(&m, |x| 1.8 + 0.4 * x[0]).unwrap();
    let rep = sandwich_run(&cubic(), None, &p, &m, &TimeGrid::new(5.0, 250).unwrap(), &opts(), 1e-5).unwrap();
    assert!(rep.holds(), "{}", summary(&rep));
    assert!(rep.final_distance() <= 1e-4);
    assert!(rep.final_gap().unwrap() <= 1e-4);
}

#[test]
fn zero_reaction_sandwich_closes_on_zero() {
    let m = Mesh::<f64>::interval(24).unwrap();
    let p = ExponentField::constant(&m, 2.5).unwrap();
    let rep = sandwich_run(&Arc::new(ReactionTerm::zero()), Some(3.0), &p, &m, &TimeGrid::new(2.0, 40).unwrap(), &opts(), 1e-5)
        .unwrap();
    assert!(rep.holds(), "{}", summary(&rep));
    assert!(rep.steady_state.is_zero());
    let gaps: Vec<f64> = rep.rows.iter().map(|r| r.sandwich_gap.unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn linear_sandwich_closes_at_horizon() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let f = Arc::new(ReactionTerm::polynomial("1-u", |_| 1.0, vec![(-1.0, 1)]));
    let rep = sandwich_run(&f, Some(4.0), &p, &m, &TimeGrid::new(5.0, 100).unwrap(), &opts(), 1e-5).unwrap();
    assert!(rep.holds(), "{}", summary(&rep));
    assert!(rep.final_gap().unwrap() <= 1e-3);
}

#[test]
fn variable_exponent_sandwich_closes_at_horizon() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::from_fn(&m, |x| 2.0 + 0.5 * x[0]).unwrap();
    let f = Arc::new(ReactionTerm::polynomial("x-u", |x| x[0], vec![(-1.0, 1)]));
    let rep = sandwich_run(&f, Some(4.0), &p, &m, &TimeGrid::new(5.0, 100).unwrap(), &opts(), 1e-5).unwrap();
    assert!(rep.holds(), "{}", summary(&rep));
    assert!(rep.final_gap().unwrap() <= 1e-3);
}

#[test]
fn long_time_iterate_agrees_with_stationary_solve() {
    let m = Mesh::<f64>::unit_square(8).unwrap();
    let p = ExponentField::from_fn(&m, |x| 1.9 + 0.3 * x[1]).unwrap();
    let u0 = MeshFunction::from_fn_dirichlet(&m, |x| 16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]));
    let stab = StabilizeOptions { sandwich: Sandwich::Auto, ..StabilizeOptions::default() };
    let rep = stabilize(&u0, &cubic(), &p, &TimeGrid::new(4.0, 200).unwrap(), &opts(), &stab).unwrap();
    assert!(rep.holds(), "{}", summary(&rep));
    assert!(rep.final_distance() <= 1e-4);
    assert!(rep.mu.unwrap() >= 1.0);
}

#[test]
fn symmetric_data_give_a_symmetric_steady_state() {
    let cells = 40;
    let m = Mesh::<f64>::interval(cells).unwrap();
    let p = ExponentField::from_fn(&m, |x| 2.0 + 0.6 * (x[0] - 0.5).abs()).unwrap();
    let f = Arc::new(ReactionTerm::polynomial("even", |x| 1.0 + (PI * x[0]).sin(), vec![(-2.0, 3)]));
    let u = solve_stationary(&f, &p, &m, &opts().solver.with_tolerance(1e-13)).unwrap().solution;
    let v = u.values();
    for i in 0..=cells {
        assert!((v[i] - v[cells - i]).abs() <= 1e-9, "{i}");
    }
}

#[test]
fn contraction_without_reaction_is_monotone() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::from_fn(&m, |x| 1.6 + 0.8 * x[0]).unwrap();
    let u0 = MeshFunction::from_fn_dirichlet(&m, |x| (PI * x[0]).sin());
    let v0 = MeshFunction::from_fn_dirichlet(&m, |x| (3.0 * PI * x[0]).sin() * 0.5);
    let rep = semigroup_contraction_check(&u0, &v0, &Forcing::none(), &p, &TimeGrid::new(0.5, 25).unwrap(), &opts(), None)
        .unwrap();
    assert!(rep.holds);
    assert_eq!(rep.omega, 0.0);
    assert!(rep.series.windows(2).all(|w| w[1].1 <= w[0].1 + rep.tolerance));
    let same = semigroup_contraction_check(&u0, &u0, &Forcing::none(), &p, &TimeGrid::new(0.5, 5).unwrap(), &opts(), None)
        .unwrap();
    assert!(same.series.iter().all(|s| s.1 == 0.0));
}

#[test]
fn contraction_with_linear_growth() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let f = ReactionTerm::new("u", |_, u| u).with_two_sided_bound(|v| v).with_lipschitz(|_, _| 1.0);
    let u0 = MeshFunction::from_fn_dirichlet(&m, |x| (PI * x[0]).sin());
    let v0 = MeshFunction::from_fn_dirichlet(&m, |x| x[0] * (1.0 - x[0]));
    let rep = semigroup_contraction_check(&u0, &v0, &Forcing::reaction(f), &p, &TimeGrid::new(0.3, 30).unwrap(), &opts(), None)
        .unwrap();
    assert_eq!(rep.omega, 1.0);
    assert!(rep.holds, "{}", rep.worst_excess);
}

#[test]
fn positivity_is_preserved() {
    let m = Mesh::<f64>::interval(32).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let g = TimeGrid::new(1.0, 40).unwrap();
    let cases = [
        (ReactionTerm::zero(), MeshFunction::from_fn_dirichlet(&m, |x| x[0] * (1.0 - x[0]))),
        (ReactionTerm::polynomial("1-u", |_| 1.0, vec![(-1.0, 1)]), MeshFunction::from_fn_dirichlet(&m, |x| (PI * x[0]).sin())),
        (ReactionTerm::polynomial("-u^3", |_| 0.0, vec![(-1.0, 3)]), MeshFunction::from_fn_dirichlet(&m, |x| x[0] * (1.0 - x[0]))),
    ];
    for (f, u0) in cases {
        let r = run(&u0, &Forcing::reaction(f.clone()), &g, &p, &opts()).unwrap();
        let rep = positivity_check(&r, &f).unwrap();
        assert!(rep.holds, "{}: {rep:?}", f.name());
    }
}

#[test]
fn positivity_preconditions_are_enforced() {
    let m = Mesh::<f64>::interval(8).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let f = ReactionTerm::polynomial("-1-u", |_| -1.0, vec![(-1.0, 1)]);
    let u0 = MeshFunction::from_fn_dirichlet(&m, |x| x[0] * (1.0 - x[0]));
    let r = run(&u0, &Forcing::reaction(f.clone()), &TimeGrid::new(0.1, 2).unwrap(), &p, &opts()).unwrap();
    assert!(matches!(positivity_check(&r, &f), Err(Error::Precondition(_))));
}

#[test]
fn non_monotone_reaction_is_rejected() {
    let m = Mesh::<f64>::interval(8).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let f = Arc::new(ReactionTerm::polynomial("u", |_| 0.0, vec![(1.0, 1)]));
    let u0 = MeshFunction::zeros(&m);
    let g = TimeGrid::new(1.0, 4).unwrap();
    assert!(matches!(stabilize(&u0, &f, &p, &g, &opts(), &StabilizeOptions::default()), Err(Error::NonMonotoneReaction(_))));
    assert!(matches!(sandwich_run(&f, Some(1.0), &p, &m, &g, &opts(), 1e-5), Err(Error::NonMonotoneReaction(_))));
}

#[test]
fn weak_torsion_level_is_reported() {
    let m = Mesh::<f64>::interval(8).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let f = ReactionTerm::polynomial("100-u", |_| 100.0, vec![(-1.0, 1)]);
    let err = select_mu(&f, &p, &m, &opts().solver, Some(1.0), None).unwrap_err();
    assert!(matches!(&err, Error::Precondition(msg) if msg.contains("vertex")), "{err}");
    let (mu, _) = select_mu(&f, &p, &m, &opts().solver, None, None).unwrap();
    assert_eq!(mu, 128.0);
}

#[test]
fn explicit_mu_must_enclose_the_initial_datum() {
    let m = Mesh::<f64>::interval(16).unwrap();
    let p = ExponentField::constant(&m, 2.0).unwrap();
    let u0 = MeshFunction::from_fn_dirichlet(&m, |x| (PI * x[0]).sin());
    let stab = StabilizeOptions { sandwich: Sandwich::Mu(2.0), ..StabilizeOptions::default() };
    let err = stabilize(&u0, &cubic(), &p, &TimeGrid::new(1.0, 10).unwrap(), &opts(), &stab).unwrap_err();
    assert!(matches!(&err, Error::Precondition(msg) if msg.contains("outside")), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn trajectories_stay_inside_the_sandwich(coeffs in prop::collection::vec(-1.0f64..1.0, 17)) {
        let m = Mesh::<f64>::interval(16).unwrap();
        let p = ExponentField::from_fn(&m, |x| 1.8 + 0.4 * x[0]).unwrap();
        let f = cubic();
        let (_, w) = select_mu(&f, &p, &m, &opts().solver, Some(2.0), None).unwrap();
        let vals: Vec<f64> = w.values().iter().zip(&coeffs).map(|(a, c)| a * c).collect();
        let u0 = MeshFunction::from_values(&m, vals).unwrap();
        let stab = StabilizeOptions { sandwich: Sandwich::Mu(2.0), ..StabilizeOptions::default() };
        let rep = stabilize(&u0, &f, &p, &TimeGrid::new(1.0, 20).unwrap(), &opts(), &stab).unwrap();
        prop_assert_eq!(rep.ordering_violations, 0);
        prop_assert_eq!(rep.monotonicity_violations, 0);
        prop_assert_eq!(rep.expansion_violations, 0);
    }
}
