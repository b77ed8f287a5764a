use num_traits::{One, Signed, Zero};

use crate::problem::{LpProblem, Relation, Sense};
use crate::solver::{FarkasCertificate, LpOutcome};
use crate::Rational;

/// Re-checks an outcome against its problem by direct substitution.
/// Returns every mismatch found; an empty error list means the certificate
/// is exact.
pub fn verify_certificate(problem: &LpProblem, outcome: &LpOutcome) -> Result<(), Vec<String>> {
    let mut errs = Vec::new();
    match outcome {
        LpOutcome::Optimal {
            primal,
            objective,
            row_duals,
        } => {
            check_primal_feasible(problem, primal, &mut errs);
            let sense = problem.sense.unwrap_or(Sense::Feasibility);
            if sense != Sense::Feasibility {
                let val = inner(&problem.objective, primal);
                if &val != objective {
                    errs.push(format!(
                        "objective value mismatch: primal gives {val}, reported {objective}"
                    ));
                }
                check_dual_optimality(problem, objective, row_duals, sense, &mut errs);
            }
        }
        LpOutcome::Infeasible { farkas } => check_farkas(problem, farkas, &mut errs),
        LpOutcome::Unbounded {
            ray,
            feasible_point,
        } => {
            check_primal_feasible(problem, feasible_point, &mut errs);
            check_ray(problem, ray, &mut errs);
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

fn inner(coeffs: &[Rational], point: &[Rational]) -> Rational {
    coeffs
        .iter()
        .zip(point)
        .map(|(c, x)| c * x)
        .fold(Rational::zero(), |a, b| a + b)
}

fn check_primal_feasible(problem: &LpProblem, primal: &[Rational], errs: &mut Vec<String>) {
    if primal.len() != problem.n_vars() {
        errs.push(format!(
            "primal has {} entries for {} variables",
            primal.len(),
            problem.n_vars()
        ));
        return;
    }
    for (k, c) in problem.constraints.iter().enumerate() {
        let lhs = inner(&c.coeffs, primal);
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Eq => lhs == c.rhs,
            Relation::Ge => lhs >= c.rhs,
        };
        if !ok {
            errs.push(format!(
                "constraint {k}{} violated: {lhs} {} {}",
                c.label
                    .as_deref()
                    .map(|l| format!(" ({l})"))
                    .unwrap_or_default(),
                c.relation.symbol(),
                c.rhs
            ));
        }
    }
    for (j, b) in problem.bounds.iter().enumerate() {
        if let Some(l) = &b.lower {
            if &primal[j] < l {
                errs.push(format!("variable {j} below lower bound: {} < {l}", primal[j]));
            }
        }
        if let Some(u) = &b.upper {
            if &primal[j] > u {
                errs.push(format!("variable {j} above upper bound: {} > {u}", primal[j]));
            }
        }
    }
}

/// Bounded-variable dual optimality: sign-feasible row duals whose reduced
/// costs charge only finite bounds and reproduce the objective exactly.
fn check_dual_optimality(
    problem: &LpProblem,
    objective: &Rational,
    row_duals: &[Rational],
    sense: Sense,
    errs: &mut Vec<String>,
) {
    if row_duals.len() != problem.constraints.len() {
        errs.push("row dual vector length mismatch".to_string());
        return;
    }
    for (k, (c, y)) in problem.constraints.iter().zip(row_duals).enumerate() {
        let ok = match (sense, c.relation) {
            (_, Relation::Eq) => true,
            (Sense::Maximize, Relation::Le) => !y.is_negative(),
            (Sense::Maximize, Relation::Ge) => !y.is_positive(),
            (Sense::Minimize, Relation::Le) => !y.is_positive(),
            (Sense::Minimize, Relation::Ge) => !y.is_negative(),
            (Sense::Feasibility, _) => true,
        };
        if !ok {
            errs.push(format!("dual multiplier {k} has the wrong sign: {y}"));
        }
    }
    let mut dual_value: Rational = problem
        .constraints
        .iter()
        .zip(row_duals)
        .map(|(c, y)| y * &c.rhs)
        .fold(Rational::zero(), |a, b| a + b);
    for j in 0..problem.n_vars() {
        let mut d = problem.objective[j].clone();
        for (c, y) in problem.constraints.iter().zip(row_duals) {
            if !c.coeffs[j].is_zero() {
                d -= y * &c.coeffs[j];
            }
        }
        if d.is_zero() {
            continue;
        }
        let b = &problem.bounds[j];
        // The residual reduced cost must be chargeable to a finite bound.
        let charge = match (sense, d.is_positive()) {
            (Sense::Maximize, true) | (Sense::Minimize, false) => b.upper.as_ref(),
            _ => b.lower.as_ref(),
        };
        match charge {
            Some(bound) => dual_value += &d * bound,
            None => errs.push(format!(
                "reduced cost {d} of variable {j} cannot be charged to a finite bound"
            )),
        }
    }
    if &dual_value != objective {
        errs.push(format!(
            "strong duality fails: dual value {dual_value}, primal objective {objective}"
        ));
    }
}

fn check_farkas(problem: &LpProblem, farkas: &FarkasCertificate, errs: &mut Vec<String>) {
    let n = problem.n_vars();
    if farkas.row_multipliers.len() != problem.constraints.len()
        || farkas.lower_bound_multipliers.len() != n
        || farkas.upper_bound_multipliers.len() != n
    {
        errs.push("Farkas certificate has wrong dimensions".to_string());
        return;
    }
    let mut nonzero = false;
    for (k, (c, m)) in problem
        .constraints
        .iter()
        .zip(&farkas.row_multipliers)
        .enumerate()
    {
        if c.relation != Relation::Eq && m.is_negative() {
            errs.push(format!("Farkas multiplier {k} is negative: {m}"));
        }
        nonzero |= !m.is_zero();
    }
    for (j, m) in farkas.lower_bound_multipliers.iter().enumerate() {
        if m.is_negative() {
            errs.push(format!("lower bound multiplier {j} is negative"));
        } else if !m.is_zero() && problem.bounds[j].lower.is_none() {
            errs.push(format!("lower bound multiplier {j} on an unbounded side"));
        }
        nonzero |= !m.is_zero();
    }
    for (j, m) in farkas.upper_bound_multipliers.iter().enumerate() {
        if m.is_negative() {
            errs.push(format!("upper bound multiplier {j} is negative"));
        } else if !m.is_zero() && problem.bounds[j].upper.is_none() {
            errs.push(format!("upper bound multiplier {j} on an unbounded side"));
        }
        nonzero |= !m.is_zero();
    }
    if !nonzero {
        errs.push("Farkas certificate is identically zero".to_string());
        return;
    }

    // Combine every row in `<=` orientation; coefficients must cancel and
    // the combined right-hand side must be negative.
    let mut combined = vec![Rational::zero(); n];
    let mut rhs = Rational::zero();
    for (c, m) in problem.constraints.iter().zip(&farkas.row_multipliers) {
        if m.is_zero() {
            continue;
        }
        let flip = if c.relation == Relation::Ge {
            -Rational::one()
        } else {
            Rational::one()
        };
        for (j, a) in c.coeffs.iter().enumerate() {
            if !a.is_zero() {
                combined[j] += m * &(a * &flip);
            }
        }
        rhs += m * &(&c.rhs * &flip);
    }
    for (j, m) in farkas.lower_bound_multipliers.iter().enumerate() {
        if !m.is_zero() {
            combined[j] -= m;
            rhs -= m * problem.bounds[j].lower.as_ref().unwrap();
        }
    }
    for (j, m) in farkas.upper_bound_multipliers.iter().enumerate() {
        if !m.is_zero() {
            combined[j] += m;
            rhs += m * problem.bounds[j].upper.as_ref().unwrap();
        }
    }
    for (j, c) in combined.iter().enumerate() {
        if !c.is_zero() {
            errs.push(format!(
                "Farkas combination leaves coefficient {c} on variable {j}"
            ));
        }
    }
    if !rhs.is_negative() {
        errs.push(format!("Farkas combination gives 0 <= {rhs}, not negative"));
    }
}

fn check_ray(problem: &LpProblem, ray: &[Rational], errs: &mut Vec<String>) {
    if ray.len() != problem.n_vars() {
        errs.push("ray length mismatch".to_string());
        return;
    }
    if ray.iter().all(Rational::is_zero) {
        errs.push("ray is identically zero".to_string());
        return;
    }
    for (k, c) in problem.constraints.iter().enumerate() {
        let v = inner(&c.coeffs, ray);
        let ok = match c.relation {
            Relation::Le => !v.is_positive(),
            Relation::Eq => v.is_zero(),
            Relation::Ge => !v.is_negative(),
        };
        if !ok {
            errs.push(format!("ray violates constraint {k}: direction {v}"));
        }
    }
    for (j, b) in problem.bounds.iter().enumerate() {
        if b.lower.is_some() && ray[j].is_negative() {
            errs.push(format!("ray decreases lower-bounded variable {j}"));
        }
        if b.upper.is_some() && ray[j].is_positive() {
            errs.push(format!("ray increases upper-bounded variable {j}"));
        }
    }
    let gain = inner(&problem.objective, ray);
    let improving = match problem.sense {
        Some(Sense::Maximize) => gain.is_positive(),
        Some(Sense::Minimize) => gain.is_negative(),
        _ => false,
    };
    if !improving {
        errs.push(format!("ray objective direction {gain} does not improve"));
    }
}
