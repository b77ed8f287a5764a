//! Agreement with brute force: on box-bounded problems with at most three
//! variables, the simplex optimum must equal the best value over all vertices
//! found by intersecting constraint planes directly.

use exactlp::{solve, verify_certificate, LpOutcome, LpProblem, Rational, Relation, Sense, VarBounds};
use num_traits::Zero;
use proptest::prelude::*;

/// Solves a square rational system by elimination; `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in 0..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Every constraint and finite bound, written as (coeffs, rhs, relation).
fn planes(p: &LpProblem) -> Vec<(Vec<Rational>, Rational, Relation)> {
    let n = p.n_vars();
    let mut out = Vec::new();
    for c in &p.constraints {
        out.push((c.coeffs.clone(), c.rhs.clone(), c.relation));
    }
    for (j, b) in p.bounds.iter().enumerate() {
        let mut unit = vec![Rational::zero(); n];
        unit[j] = Rational::from_integer(1.into());
        if let Some(l) = &b.lower {
            out.push((unit.clone(), l.clone(), Relation::Ge));
        }
        if let Some(u) = &b.upper {
            out.push((unit.clone(), u.clone(), Relation::Le));
        }
    }
    out
}

fn feasible(p: &LpProblem, x: &[Rational]) -> bool {
    planes(p).iter().all(|(coeffs, rhs, rel)| {
        let v: Rational = coeffs
            .iter()
            .zip(x)
            .map(|(c, xi)| c * xi)
            .fold(Rational::zero(), |a, b| a + b);
        match rel {
            Relation::Le => &v <= rhs,
            Relation::Eq => &v == rhs,
            Relation::Ge => &v >= rhs,
        }
    })
}

/// Enumerates candidate vertices from all n-subsets of planes.
fn best_vertex_value(p: &LpProblem) -> Option<Rational> {
    let n = p.n_vars();
    let planes = planes(p);
    let idx: Vec<usize> = (0..planes.len()).collect();
    let mut best: Option<Rational> = None;
    for combo in subsets(&idx, n) {
        let a: Vec<Vec<Rational>> = combo.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<Rational> = combo.iter().map(|&i| planes[i].1.clone()).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if !feasible(p, &x) {
            continue;
        }
        let val: Rational = p
            .objective
            .iter()
            .zip(&x)
            .map(|(c, xi)| c * xi)
            .fold(Rational::zero(), |acc, t| acc + t);
        best = Some(match best {
            None => val,
            Some(b) if val > b => val,
            Some(b) => b,
        });
    }
    best
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

prop_compose! {
    fn arb_problem()(
        n_vars in 1usize..=3,
    )(
        n_vars in Just(n_vars),
        lowers in prop::collection::vec(small_rational(), n_vars),
        widths in prop::collection::vec(1i64..=4, n_vars),
        obj in prop::collection::vec(small_rational(), n_vars),
        rows in prop::collection::vec(
            (prop::collection::vec(small_rational(), n_vars), small_rational(), 0u8..3),
            0..4,
        ),
    ) -> LpProblem {
        let mut p = LpProblem::new();
        for j in 0..n_vars {
            let lo = lowers[j].clone();
            let hi = &lo + Rational::from_integer(widths[j].into());
            p.add_var(format!("x{j}"), VarBounds::interval(lo, hi));
        }
        let coeffs: Vec<_> = obj.iter().cloned().enumerate().collect();
        p.set_objective(Sense::Maximize, &coeffs);
        for (row, rhs, rel) in rows {
            let rel = match rel { 0 => Relation::Le, 1 => Relation::Eq, _ => Relation::Ge };
            let sparse: Vec<_> = row.into_iter().enumerate().collect();
            p.add_constraint(&sparse, rel, rhs);
        }
        p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn simplex_agrees_with_vertex_enumeration(p in arb_problem()) {
        let out = solve(&p).unwrap();
        verify_certificate(&p, &out).unwrap();
        match (&out, best_vertex_value(&p)) {
            (LpOutcome::Optimal { objective, .. }, Some(best)) => {
                prop_assert_eq!(objective, &best);
            }
            (LpOutcome::Infeasible { .. }, None) => {}
            (outcome, oracle) => {
                return Err(TestCaseError::fail(format!(
                    "solver {outcome:?} disagrees with oracle {oracle:?}"
                )));
            }
        }
    }
}
