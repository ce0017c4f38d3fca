//! Cross-checks between the solvers, the brute-force oracles and the
//! optimality conditions on random instances.

mod common;

use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};
use uilayout_core::active_set::{default_max_iter, solve_qp_as, solve_qp_as_observed};
use uilayout_core::generator::generate_layout;
use uilayout_core::interior_point::solve_qp_ip;
use uilayout_core::linalg::{independent_rows, lu_solve, Matrix};
use uilayout_core::oracle::{lp_oracle, qp_oracle};
use uilayout_core::simplex::{default_max_pivots, feasible_point, solve_lp};
use uilayout_core::*;

use common::{dot, max_abs_diff, random_lp, random_qp, rng};

/// Least-squares multipliers on the rows within `active_tol` of binding at
/// `x`; returns the stationarity residual and the smallest inequality
/// multiplier.
fn kkt_check(qp: &QpProblem, x: &[f64], active_tol: f64) -> (f64, f64) {
    let n = qp.n;
    let mut rows = qp.a_eq.clone();
    let mut is_ineq = vec![false; qp.a_eq.rows()];
    for i in 0..qp.c_ineq.rows() {
        if dot(qp.c_ineq.row(i), x) - qp.d_ineq[i] > -active_tol {
            rows.push_row(qp.c_ineq.row(i)).unwrap();
            is_ineq.push(true);
        }
    }
    let keep = independent_rows(&rows, &vec![0.0; rows.rows()]).unwrap();
    let a = rows.select_rows(&keep);
    let grad = qp.gradient(x);
    if a.rows() == 0 {
        return (grad.iter().fold(0.0, |m, v| m.max(v.abs())), 0.0);
    }
    // min ‖grad + Aᵀλ‖ through the normal equations A Aᵀ λ = −A grad.
    let gram = a.mul(&a.transpose()).unwrap();
    let rhs: Vec<f64> = a.mul_vec(&grad).iter().map(|v| -v).collect();
    let lambda = lu_solve(&gram, &rhs).unwrap();
    let mut resid = grad.clone();
    for (k, l) in lambda.iter().enumerate() {
        for j in 0..n {
            resid[j] += l * a.row(k)[j];
        }
    }
    let min_ineq = keep
        .iter()
        .zip(&lambda)
        .filter(|(i, _)| is_ineq[**i])
        .fold(0.0_f64, |m, (_, l)| m.min(*l));
    (resid.iter().fold(0.0, |m, v| m.max(v.abs())), min_ineq)
}

#[test]
fn qp_solvers_meet_kkt_conditions() {
    let mut rng = rng(17);
    for _ in 0..100 {
        let qp = random_qp(&mut rng, 5, 2, 8);
        // Barrier iterates stay a duality-gap-sized distance inside the
        // binding rows, so they are judged with looser tolerances.
        for (out, active_tol, tol) in [
            (solve_qp_as(&qp, default_max_iter(&qp)).unwrap(), 1e-9, 1e-7),
            (solve_qp_ip(&qp, &BarrierParams::default()).unwrap(), 1e-4, 1e-3),
        ] {
            assert_eq!(out.status, Status::Optimal);
            assert!(qp.max_violation(&out.x) < 1e-8);
            let (resid, min_lambda) = kkt_check(&qp, &out.x, active_tol);
            assert!(resid < tol, "stationarity residual {resid}");
            assert!(min_lambda > -tol, "negative multiplier {min_lambda}");
        }
    }
}

#[test]
fn active_set_iterates_stay_feasible_with_independent_working_sets() {
    let mut rng = rng(23);
    for _ in 0..60 {
        let qp = random_qp(&mut rng, 6, 2, 8);
        let mut seen = 0;
        solve_qp_as_observed(&qp, default_max_iter(&qp), &mut |x, ws| {
            seen += 1;
            assert!(qp.max_violation(x) < 1e-9);
            let mut w = qp.a_eq.clone();
            for &i in ws.indices() {
                w.push_row(qp.c_ineq.row(i)).unwrap();
                assert!((dot(qp.c_ineq.row(i), x) - qp.d_ineq[i]).abs() < 1e-8);
            }
            let full = independent_rows(&w, &vec![0.0; w.rows()]).unwrap();
            assert_eq!(full.len(), w.rows(), "working set rows are dependent");
        })
        .unwrap();
        assert!(seen >= 1);
    }
}

#[test]
fn qp_solvers_agree_with_oracle_on_larger_row_counts() {
    let mut rng = rng(31);
    for _ in 0..40 {
        let qp = random_qp(&mut rng, 4, 1, 12);
        let x_star = qp_oracle(&qp).unwrap();
        let ip = solve_qp_ip(&qp, &BarrierParams::default()).unwrap();
        let act = solve_qp_as(&qp, default_max_iter(&qp)).unwrap();
        assert!(max_abs_diff(&ip.x, &x_star) < 1e-3);
        assert!(max_abs_diff(&act.x, &x_star) < 1e-6);
    }
}

#[test]
fn infeasible_qp_reported_by_both_strategies() {
    // x ≤ 1 and x ≥ 2
    let qp = QpProblem::new(
        Matrix::from_diagonal(&[2.0]),
        vec![0.0],
        Matrix::zeros(0, 1),
        vec![],
        Matrix::from_rows(1, &[vec![1.0], vec![-1.0]]).unwrap(),
        vec![1.0, -2.0],
    )
    .unwrap();
    assert_eq!(qp_oracle(&qp), Err(Error::Infeasible));
    assert_eq!(solve_qp_ip(&qp, &BarrierParams::default()).unwrap().status, Status::Infeasible);
    assert_eq!(solve_qp_as(&qp, 50).unwrap().status, Status::Infeasible);
}

#[test]
fn simplex_matches_oracle_on_mixed_instances() {
    let mut rng = rng(41);
    for _ in 0..200 {
        let lp = random_lp(&mut rng);
        let out = solve_lp(&lp, default_max_pivots(&lp));
        match lp_oracle(&lp) {
            Ok(v) => {
                assert_eq!(out.status, Status::Optimal);
                assert!((out.objective - v).abs() < 1e-7);
                assert!(lp.max_violation(&out.x) < 1e-9);
            }
            Err(Error::Infeasible) => assert_eq!(out.status, Status::Infeasible),
            Err(Error::Unbounded) => assert_eq!(out.status, Status::Unbounded),
            Err(e) => panic!("oracle failed: {e}"),
        }
    }
}

#[test]
fn strategies_agree_on_generated_layouts() {
    let opts = SolveOptions::default();
    for (w, seed) in [(3, 1), (10, 2), (25, 3), (60, 4)] {
        let spec = generate_layout(w, seed);
        let ip = solve_layout(&spec, Strategy::InteriorPoint, &opts).unwrap();
        let act = solve_layout(&spec, Strategy::ActiveSet, &opts).unwrap();
        let lp = solve_layout(&spec, Strategy::Simplex, &opts).unwrap();
        for sol in [&ip, &act, &lp] {
            assert_eq!(sol.status, Status::Optimal);
            assert!(spec.max_hard_error(&sol.x) < 1e-6);
        }
        // Both QP strategies minimize the same strictly convex objective in
        // the slacks, so their objectives coincide.
        assert!((ip.objective - act.objective).abs() <= 1e-5 * (1.0 + act.objective.abs()));
        // The LP optimum bounds the total weighted violation of any point,
        // the QP solution included.
        let qp_total: f64 = act.errors.iter().sum();
        assert!(lp.objective <= qp_total + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_hard_rows_admit_a_base_solution(w in 1usize..80, seed in 0u64..1000) {
        let spec = generate_layout(w, seed);
        let qp = to_qp(&spec);
        let x = feasible_point(&qp.a_eq, &qp.b_eq, &qp.c_ineq, &qp.d_ineq).unwrap();
        prop_assert!(qp.max_violation(&x) < 1e-9);
    }

    #[test]
    fn spec_text_round_trips(w in 1usize..40, seed in 0u64..1000) {
        let spec = generate_layout(w, seed);
        let text = serialize_spec(&spec);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(&back.constraints, &spec.constraints);
        prop_assert_eq!(serialize_spec(&back), text);
    }

    #[test]
    fn as_objective_matches_oracle(seed in 0u64..10_000) {
        let mut rng = rng(seed);
        let qp = random_qp(&mut rng, 4, 2, 6);
        let x_star = qp_oracle(&qp).unwrap();
        let out = solve_qp_as(&qp, default_max_iter(&qp)).unwrap();
        prop_assert!((out.objective - qp.objective(&x_star)).abs() < 1e-7);
    }
}
