//! Backend-contract tests: every shipped behavior of the solve layer is
//! exercised against small instances with independently computed answers.

use repta_milp::{
    big_m_product, solve, verify_solution, Cmp, Domain, LinExpr, Model, ModelHandle, Sense,
    SolveOptions, SolveStatus, Tolerance,
};

fn exact() -> SolveOptions {
    SolveOptions::exact()
}

#[test]
fn trivial_bounded_max() {
    let mut m = Model::new("triv", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
    m.add_constraint("cap", LinExpr::from(x), Cmp::Le, 3.0).unwrap();
    m.set_objective(LinExpr::from(x)).unwrap();
    let h = m.freeze();
    let r = solve(&h, &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 3.0).abs() < 1e-9);
    assert!((r.value(x) - 3.0).abs() < 1e-9);
}

#[test]
fn contradictory_bounds_infeasible() {
    let mut m = Model::new("inf", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, f64::NEG_INFINITY, f64::INFINITY).unwrap();
    m.add_constraint("ge", LinExpr::from(x), Cmp::Ge, 1.0).unwrap();
    m.add_constraint("le", LinExpr::from(x), Cmp::Le, 0.0).unwrap();
    m.set_objective(LinExpr::from(x)).unwrap();
    let r = solve(&m.freeze(), &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_detected() {
    let mut m = Model::new("unb", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
    m.set_objective(LinExpr::from(x)).unwrap();
    let r = solve(&m.freeze(), &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Unbounded);
}

/// Knapsack with 3 items: weights [2,3,4] <= 5, values [3,4,5].
/// Oracle: brute force over all 8 assignments.
#[test]
fn knapsack_matches_brute_force() {
    let weights = [2.0, 3.0, 4.0];
    let values = [3.0, 4.0, 5.0];
    let cap = 5.0;

    let mut best = 0.0_f64;
    for mask in 0..8u32 {
        let w: f64 = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| weights[i]).sum();
        let v: f64 = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).sum();
        if w <= cap {
            best = best.max(v);
        }
    }
    assert_eq!(best, 7.0);

    let mut m = Model::new("knapsack", Sense::Maximize);
    let items: Vec<_> = (0..3)
        .map(|i| m.add_var(format!("item{i}"), Domain::Binary, 0.0, 1.0).unwrap())
        .collect();
    m.add_constraint(
        "weight",
        LinExpr::sum(items.iter().zip(weights).map(|(v, w)| (*v, w))),
        Cmp::Le,
        cap,
    )
    .unwrap();
    m.set_objective(LinExpr::sum(items.iter().zip(values).map(|(v, c)| (*v, c))))
        .unwrap();
    let h = m.freeze();
    let r = solve(&h, &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - best).abs() < 1e-9);

    // solve -> verify round trip is clean
    let report = verify_solution(&h, r.assignment().unwrap(), Tolerance::default()).unwrap();
    assert!(report.is_empty(), "unexpected violations: {report:?}");
}

#[test]
fn determinism_same_objective() {
    let build = || {
        let mut m = Model::new("det", Sense::Maximize);
        let vars: Vec<_> = (0..6)
            .map(|i| m.add_var(format!("x{i}"), Domain::Binary, 0.0, 1.0).unwrap())
            .collect();
        m.add_constraint(
            "budget",
            LinExpr::sum(vars.iter().enumerate().map(|(i, v)| (*v, 1.0 + i as f64))),
            Cmp::Le,
            9.0,
        )
        .unwrap();
        m.set_objective(LinExpr::sum(
            vars.iter().enumerate().map(|(i, v)| (*v, 2.0 + (i as f64) * 0.7)),
        ))
        .unwrap();
        m.freeze()
    };
    let a = solve(&build(), &exact()).unwrap();
    let b = solve(&build(), &exact()).unwrap();
    assert_eq!(a.objective, b.objective);
}

#[test]
fn verify_reports_perturbed_constraint() {
    let mut m = Model::new("verify", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, 10.0).unwrap();
    let y = m.add_var("y", Domain::Continuous, 0.0, 10.0).unwrap();
    m.add_constraint(
        "budget",
        LinExpr::sum([(x, 1.0), (y, 1.0)]),
        Cmp::Le,
        5.0,
    )
    .unwrap();
    m.set_objective(LinExpr::sum([(x, 1.0), (y, 1.0)])).unwrap();
    let h = m.freeze();
    let r = solve(&h, &exact()).unwrap();
    let mut assignment = r.assignment().unwrap().to_vec();

    // push x past the binding budget row
    assignment[0] += 0.5;
    let report = verify_solution(&h, &assignment, Tolerance::default()).unwrap();
    assert_eq!(report.len(), 1);
    assert_eq!(report[0].name, "budget");
    assert!((report[0].amount - 0.5).abs() < 1e-9);
}

#[test]
fn verify_reports_fractional_integer() {
    let mut m = Model::new("frac", Sense::Maximize);
    let n = m.add_var("n", Domain::Integer, 0.0, 10.0).unwrap();
    m.set_objective(LinExpr::from(n)).unwrap();
    let h = m.freeze();
    let report = verify_solution(&h, &[2.5], Tolerance::default()).unwrap();
    assert_eq!(report.len(), 1);
    assert_eq!(
        report[0].kind,
        repta_milp::ViolationKind::Integrality
    );
}

#[test]
fn verify_rejects_short_assignment() {
    let mut m = Model::new("short", Sense::Maximize);
    m.add_var("x", Domain::Continuous, 0.0, 1.0).unwrap();
    m.add_var("y", Domain::Continuous, 0.0, 1.0).unwrap();
    let h = m.freeze();
    assert!(verify_solution(&h, &[0.0], Tolerance::default()).is_err());
}

/// big-M product is exact at every integer point: enumerate b in {0,1},
/// w in {0, W/2, W} for several bound configurations.
#[test]
fn big_m_product_exhaustive() {
    for w_max in [1e-3, 1.0, 10.0, 1e3, 1e6] {
        for b_fix in [0.0, 1.0] {
            for w_frac in [0.0, 0.5, 1.0] {
                let w_fix = w_frac * w_max;
                let mut m = Model::new("bigm", Sense::Maximize);
                let b = m.add_var("b", Domain::Binary, 0.0, 1.0).unwrap();
                let w = m.add_var("w", Domain::Continuous, 0.0, w_max).unwrap();
                let z = big_m_product(&mut m, b, w, "z").unwrap();
                m.set_bounds(b, b_fix, b_fix).unwrap();
                m.set_bounds(w, w_fix, w_fix).unwrap();
                m.set_objective(LinExpr::from(z)).unwrap();
                let h = m.freeze();
                let r = solve(&h, &exact()).unwrap();
                assert_eq!(r.status, SolveStatus::Optimal, "W={w_max} b={b_fix} w={w_fix}");
                let err = (r.value(z) - b_fix * w_fix).abs();
                assert!(
                    err <= 1e-9 * w_max.max(1.0),
                    "z={} expected {} (W={w_max})",
                    r.value(z),
                    b_fix * w_fix
                );
            }
        }
    }
}

#[test]
fn big_m_requires_finite_bound() {
    let mut m = Model::new("bigm_inf", Sense::Maximize);
    let b = m.add_var("b", Domain::Binary, 0.0, 1.0).unwrap();
    let w = m.add_var("w", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
    assert!(big_m_product(&mut m, b, w, "z").is_err());
}

#[test]
fn integer_variable_respected() {
    // max 1.5*n s.t. n <= 2.6 with n integer: optimum n=2, not 2.6
    let mut m = Model::new("int", Sense::Maximize);
    let n = m.add_var("n", Domain::Integer, 0.0, 10.0).unwrap();
    m.add_constraint("cap", LinExpr::from(n), Cmp::Le, 2.6).unwrap();
    m.set_objective(LinExpr::term(n, 1.5)).unwrap();
    let r = solve(&m.freeze(), &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.value(n) - 2.0).abs() < 1e-9);
    assert!((r.objective - 3.0).abs() < 1e-9);
}

#[test]
fn lp_export_lists_constraints_line_per_line() {
    let mut m = Model::new("export", Sense::Minimize);
    let x = m.add_var("x[0]", Domain::Continuous, 0.0, 4.0).unwrap();
    let b = m.add_var("pick", Domain::Binary, 0.0, 1.0).unwrap();
    m.add_constraint("link", LinExpr::sum([(x, 1.0), (b, -4.0)]), Cmp::Le, 0.0)
        .unwrap();
    m.set_objective(LinExpr::sum([(x, 1.0), (b, 2.0)])).unwrap();
    let text = repta_milp::write_lp(&m.freeze());
    assert!(text.contains("Minimize"));
    assert!(text.contains(" link: 1 x_0_ - 4 pick <= 0"));
    assert!(text.contains("Binaries"));
    assert!(text.trim_end().ends_with("End"));
}

fn tiny_feasible_model() -> (ModelHandle, repta_milp::VarRef) {
    let mut m = Model::new("tiny", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, 2.0).unwrap();
    m.add_constraint("row", LinExpr::from(x), Cmp::Le, 1.5).unwrap();
    m.set_objective(LinExpr::from(x)).unwrap();
    (m.freeze(), x)
}

#[test]
fn empty_constraint_after_cancellation_is_accepted() {
    let mut m = Model::new("cancel", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, 1.0).unwrap();
    m.add_constraint("x_le_x", LinExpr::from(x), Cmp::Le, LinExpr::from(x))
        .unwrap();
    m.set_objective(LinExpr::from(x)).unwrap();
    let r = solve(&m.freeze(), &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 1.0).abs() < 1e-9);
}

#[test]
fn unsatisfiable_constant_constraint_is_infeasible() {
    let mut m = Model::new("zero_le_neg", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, 1.0).unwrap();
    // x - x <= -1 normalizes to 0 <= -1
    let lhs = LinExpr::sum([(x, 1.0), (x, -1.0)]);
    m.add_constraint("bad", lhs, Cmp::Le, -1.0).unwrap();
    m.set_objective(LinExpr::from(x)).unwrap();
    let r = solve(&m.freeze(), &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
}

#[test]
fn objective_constant_carried_through() {
    let (h, _) = tiny_feasible_model();
    let r = solve(&h, &exact()).unwrap();
    assert!((r.objective - 1.5).abs() < 1e-9);

    let mut m = Model::new("tiny_c", Sense::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, 2.0).unwrap();
    m.add_constraint("row", LinExpr::from(x), Cmp::Le, 1.5).unwrap();
    let mut obj = LinExpr::from(x);
    obj.add_constant(10.0);
    m.set_objective(obj).unwrap();
    let r = solve(&m.freeze(), &exact()).unwrap();
    assert!((r.objective - 11.5).abs() < 1e-9);
}
