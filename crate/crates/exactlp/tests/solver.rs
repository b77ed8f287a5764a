use exactlp::{
    ratio, ratio_int, solve, verify_certificate, LpOutcome, LpProblem, Relation, Sense, VarBounds,
};
use num_traits::Zero;

#[test]
fn maximizes_single_bounded_variable() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::nonneg());
    p.set_objective(Sense::Maximize, &[(x, ratio_int(1))]);
    p.add_constraint(&[(x, ratio_int(1))], Relation::Le, ratio(3, 7));
    let out = solve(&p).unwrap();
    match &out {
        LpOutcome::Optimal {
            primal, objective, ..
        } => {
            assert_eq!(primal[x], ratio(3, 7));
            assert_eq!(*objective, ratio(3, 7));
        }
        other => panic!("expected optimal, got {other:?}"),
    }
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn contradictory_pair_is_infeasible_with_unit_farkas() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::free());
    p.set_objective(Sense::Feasibility, &[]);
    p.add_constraint(&[(x, ratio_int(1))], Relation::Ge, ratio_int(1));
    p.add_constraint(&[(x, ratio_int(1))], Relation::Le, ratio_int(0));
    let out = solve(&p).unwrap();
    match &out {
        LpOutcome::Infeasible { farkas } => {
            assert_eq!(farkas.row_multipliers, vec![ratio_int(1), ratio_int(1)]);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn unbounded_ray_is_certified() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::nonneg());
    let y = p.add_var("y", VarBounds::free());
    p.set_objective(Sense::Maximize, &[(x, ratio_int(1)), (y, ratio_int(1))]);
    p.add_constraint(&[(y, ratio_int(1))], Relation::Le, ratio_int(5));
    let out = solve(&p).unwrap();
    assert!(matches!(out, LpOutcome::Unbounded { .. }));
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn equality_system_solves_exactly() {
    // x + y = 1, x - y = 1/3  =>  x = 2/3, y = 1/3
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::free());
    let y = p.add_var("y", VarBounds::free());
    p.set_objective(Sense::Minimize, &[(x, ratio_int(1))]);
    p.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(1))],
        Relation::Eq,
        ratio_int(1),
    );
    p.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(-1))],
        Relation::Eq,
        ratio(1, 3),
    );
    let out = solve(&p).unwrap();
    let primal = out.primal().unwrap();
    assert_eq!(primal[x], ratio(2, 3));
    assert_eq!(primal[y], ratio(1, 3));
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn conflicting_bounds_are_infeasible() {
    let mut p = LpProblem::new();
    p.add_var("x", VarBounds::interval(ratio_int(2), ratio_int(1)));
    p.set_objective(Sense::Feasibility, &[]);
    let out = solve(&p).unwrap();
    assert!(matches!(out, LpOutcome::Infeasible { .. }));
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn redundant_and_duplicate_rows_are_harmless() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::nonneg());
    let y = p.add_var("y", VarBounds::nonneg());
    p.set_objective(Sense::Maximize, &[(x, ratio_int(2)), (y, ratio_int(1))]);
    for _ in 0..3 {
        p.add_constraint(
            &[(x, ratio_int(1)), (y, ratio_int(1))],
            Relation::Le,
            ratio_int(4),
        );
    }
    // A 0 = 0 row that phase 1 must discard as redundant.
    p.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(1))],
        Relation::Eq,
        ratio_int(4),
    );
    let out = solve(&p).unwrap();
    assert_eq!(out.objective().unwrap(), &ratio_int(8));
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn perturbed_primal_is_rejected() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::nonneg());
    p.set_objective(Sense::Maximize, &[(x, ratio_int(1))]);
    p.add_constraint(&[(x, ratio_int(1))], Relation::Le, ratio(3, 7));
    let out = solve(&p).unwrap();
    if let LpOutcome::Optimal {
        mut primal,
        objective,
        row_duals,
    } = out
    {
        primal[0] += ratio(1, 1_000_000);
        let bad = LpOutcome::Optimal {
            primal,
            objective,
            row_duals,
        };
        let errs = verify_certificate(&p, &bad).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("constraint 0")));
    } else {
        panic!("expected optimal");
    }
}

#[test]
fn zeroed_farkas_is_rejected() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::free());
    p.set_objective(Sense::Feasibility, &[]);
    p.add_constraint(&[(x, ratio_int(1))], Relation::Ge, ratio_int(1));
    p.add_constraint(&[(x, ratio_int(1))], Relation::Le, ratio_int(0));
    let out = solve(&p).unwrap();
    if let LpOutcome::Infeasible { mut farkas } = out {
        for m in farkas.row_multipliers.iter_mut() {
            m.set_zero();
        }
        let bad = LpOutcome::Infeasible { farkas };
        assert!(verify_certificate(&p, &bad).is_err());
    } else {
        panic!("expected infeasible");
    }
}

#[test]
fn identical_problems_yield_identical_outcomes() {
    let build = || {
        let mut p = LpProblem::new();
        let x = p.add_var("x", VarBounds::nonneg());
        let y = p.add_var("y", VarBounds::nonneg());
        let z = p.add_var("z", VarBounds::free());
        p.set_objective(
            Sense::Maximize,
            &[(x, ratio_int(3)), (y, ratio_int(2)), (z, ratio_int(-1))],
        );
        p.add_constraint(
            &[(x, ratio_int(1)), (y, ratio_int(2)), (z, ratio_int(1))],
            Relation::Le,
            ratio_int(10),
        );
        p.add_constraint(
            &[(x, ratio_int(3)), (y, ratio_int(1))],
            Relation::Le,
            ratio_int(15),
        );
        p.add_constraint(&[(z, ratio_int(1))], Relation::Ge, ratio(-1, 2));
        p
    };
    let a = solve(&build()).unwrap();
    let b = solve(&build()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn degenerate_ties_terminate() {
    // Three planes through the optimal vertex (1,1).
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::nonneg());
    let y = p.add_var("y", VarBounds::nonneg());
    p.set_objective(Sense::Maximize, &[(x, ratio_int(1)), (y, ratio_int(1))]);
    p.add_constraint(&[(x, ratio_int(1))], Relation::Le, ratio_int(1));
    p.add_constraint(&[(y, ratio_int(1))], Relation::Le, ratio_int(1));
    p.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(1))],
        Relation::Le,
        ratio_int(2),
    );
    let out = solve(&p).unwrap();
    assert_eq!(out.objective().unwrap(), &ratio_int(2));
    verify_certificate(&p, &out).unwrap();

    // And a cut corner: optimum at (1/3, 1/3).
    let mut p2 = LpProblem::new();
    let x = p2.add_var("x", VarBounds::nonneg());
    let y = p2.add_var("y", VarBounds::nonneg());
    p2.set_objective(Sense::Maximize, &[(x, ratio_int(1)), (y, ratio_int(1))]);
    p2.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(2))],
        Relation::Le,
        ratio_int(1),
    );
    p2.add_constraint(
        &[(x, ratio_int(2)), (y, ratio_int(1))],
        Relation::Le,
        ratio_int(1),
    );
    let out2 = solve(&p2).unwrap();
    assert_eq!(out2.objective().unwrap(), &ratio(2, 3));
    verify_certificate(&p2, &out2).unwrap();
}

#[test]
fn empty_variable_list_is_an_error() {
    let p = LpProblem::new();
    assert!(solve(&p).is_err());
}

#[test]
fn dump_lists_rationals_and_labels() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::interval(ratio_int(0), ratio(7, 2)));
    p.set_objective(Sense::Maximize, &[(x, ratio(2, 3))]);
    p.add_labeled_constraint(&[(x, ratio_int(1))], Relation::Le, ratio(3, 7), "cap");
    let text = p.dump();
    assert!(text.contains("2/3 x"));
    assert!(text.contains("<= 3/7"));
    assert!(text.contains("[cap]"));
    assert!(text.contains("0 <= x <= 7/2"));
}

#[test]
fn negative_payoff_direction_duals_verify() {
    // Minimization with mixed relations; checks the dual sign conventions.
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::nonneg());
    let y = p.add_var("y", VarBounds::nonneg());
    p.set_objective(Sense::Minimize, &[(x, ratio_int(2)), (y, ratio_int(3))]);
    p.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(1))],
        Relation::Ge,
        ratio_int(4),
    );
    p.add_constraint(
        &[(x, ratio_int(1)), (y, ratio_int(-1))],
        Relation::Le,
        ratio_int(2),
    );
    let out = solve(&p).unwrap();
    assert_eq!(out.objective().unwrap(), &ratio_int(9));
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn feasibility_only_reports_a_point() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", VarBounds::free());
    p.set_objective(Sense::Feasibility, &[]);
    p.add_constraint(&[(x, ratio_int(2))], Relation::Eq, ratio(5, 3));
    let out = solve(&p).unwrap();
    assert_eq!(out.primal().unwrap()[0], ratio(5, 6));
    verify_certificate(&p, &out).unwrap();
}

#[test]
fn bounded_above_only_variable_works() {
    let mut p = LpProblem::new();
    let x = p.add_var(
        "x",
        VarBounds {
            lower: None,
            upper: Some(ratio_int(4)),
        },
    );
    p.set_objective(Sense::Maximize, &[(x, ratio_int(1))]);
    let out = solve(&p).unwrap();
    assert_eq!(out.objective().unwrap(), &ratio_int(4));
    verify_certificate(&p, &out).unwrap();

    let mut p2 = LpProblem::new();
    let x2 = p2.add_var(
        "x",
        VarBounds {
            lower: None,
            upper: Some(ratio_int(4)),
        },
    );
    p2.set_objective(Sense::Minimize, &[(x2, ratio_int(1))]);
    let out2 = solve(&p2).unwrap();
    assert!(matches!(out2, LpOutcome::Unbounded { .. }));
    verify_certificate(&p2, &out2).unwrap();
}
