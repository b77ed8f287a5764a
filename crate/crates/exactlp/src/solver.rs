use num_bigint::Sign;
use num_traits::{One, Signed, Zero};

use crate::problem::{LpError, LpProblem, Relation, Sense};
use crate::tableau::{Row, Tableau};
use crate::Rational;

/// Farkas proof of infeasibility: nonnegative multipliers on the constraints
/// rewritten in `<=` form (signed on equalities) plus bound multipliers, whose
/// combination yields `0 <= negative`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub row_multipliers: Vec<Rational>,
    pub lower_bound_multipliers: Vec<Rational>,
    pub upper_bound_multipliers: Vec<Rational>,
}

/// Outcome of an exact solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        primal: Vec<Rational>,
        objective: Rational,
        /// One dual multiplier per original constraint row.
        row_duals: Vec<Rational>,
    },
    Infeasible {
        farkas: FarkasCertificate,
    },
    Unbounded {
        ray: Vec<Rational>,
        /// Feasible point at which the improving ray was detected.
        feasible_point: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn objective(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { objective, .. } => Some(objective),
            _ => None,
        }
    }

    pub fn primal(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { primal, .. } => Some(primal),
            _ => None,
        }
    }
}

/// How a user variable is represented by nonnegative standard-form columns.
#[derive(Debug, Clone)]
enum VarRepr {
    /// x = lower + col
    Shift { col: usize, lower: Rational },
    /// x = upper - col
    Mirror { col: usize, upper: Rational },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowOrigin {
    User(usize),
    /// Upper bound row `x_j <= u_j` for a shifted variable.
    UpperBound(usize),
}

struct StdRow {
    coeffs: Vec<Rational>,
    relation: Relation,
    rhs: Rational,
    origin: RowOrigin,
    /// -1 if the row was negated to make the rhs nonnegative.
    sign: i8,
}

struct StdForm {
    reprs: Vec<VarRepr>,
    n_struct: usize,
    rows: Vec<StdRow>,
}

/// Solves the program exactly. Identical problems yield identical outcomes:
/// the pivot rule is Bland's and all construction orders are fixed.
pub fn solve(problem: &LpProblem) -> Result<LpOutcome, LpError> {
    problem.validate()?;
    let sense = problem.sense.unwrap_or(Sense::Feasibility);
    let std = build_std_form(problem);
    let n_rows = std.rows.len();
    let n_struct = std.n_struct;
    let n_slack = std
        .rows
        .iter()
        .filter(|r| r.relation != Relation::Eq)
        .count();
    let n_cols = n_struct + n_slack + n_rows;

    // Assemble the initial tableau with an all-artificial basis.
    let mut rows = Vec::with_capacity(n_rows);
    let mut art_col = Vec::with_capacity(n_rows);
    let mut slack_idx = 0usize;
    for (i, r) in std.rows.iter().enumerate() {
        let mut dense = vec![Rational::zero(); n_cols + 1];
        let s = if r.sign < 0 {
            -Rational::one()
        } else {
            Rational::one()
        };
        for (j, c) in r.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[j] = c * &s;
            }
        }
        match r.relation {
            Relation::Le => {
                dense[n_struct + slack_idx] = s.clone();
                slack_idx += 1;
            }
            Relation::Ge => {
                dense[n_struct + slack_idx] = -s.clone();
                slack_idx += 1;
            }
            Relation::Eq => {}
        }
        let a = n_struct + n_slack + i;
        dense[a] = Rational::one();
        art_col.push(a);
        dense[n_cols] = &r.rhs * &s;
        debug_assert!(!dense[n_cols].is_negative());
        rows.push(Row::from_rationals(&dense));
    }

    // Phase-1 objective: minimize the sum of artificials. Reduced costs are
    // 0 - sum of each column over the rows; rhs cell is -(sum of rhs).
    let mut obj = vec![Rational::zero(); n_cols + 1];
    for (j, cell) in obj.iter_mut().enumerate() {
        if j >= n_struct + n_slack && j < n_cols {
            continue; // artificial: cost 1, reduced cost 1 - 1 = 0
        }
        let mut acc = Rational::zero();
        for row in std_rows_iter(&rows, j) {
            acc += row;
        }
        *cell = -acc;
    }

    let mut t = Tableau {
        rows,
        obj: Row::from_rationals(&obj),
        basis: art_col.clone(),
        n_cols,
    };

    // Phase 1: all columns may enter.
    run_simplex(&mut t, None);
    if t.objective_value().is_positive() {
        let farkas = extract_farkas(problem, &std, &t, &art_col);
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // Drive any basic artificials out; rows that cannot pivot are redundant.
    let art_start = n_struct + n_slack;
    let mut keep = vec![true; t.rows.len()];
    for i in 0..t.rows.len() {
        if t.basis[i] < art_start {
            continue;
        }
        let col = (0..art_start).find(|&j| t.rows[i].sign(j) != Sign::NoSign);
        match col {
            Some(j) => t.pivot(i, j),
            None => keep[i] = false,
        }
    }
    let mut kept_rows = Vec::new();
    let mut kept_basis = Vec::new();
    let mut kept_art = Vec::new();
    let mut kept_origin = Vec::new();
    let mut kept_sign = Vec::new();
    for i in 0..t.rows.len() {
        if keep[i] {
            kept_rows.push(t.rows[i].clone());
            kept_basis.push(t.basis[i]);
            kept_art.push(art_col[i]);
            kept_origin.push(std.rows[i].origin);
            kept_sign.push(std.rows[i].sign);
        }
    }
    t.rows = kept_rows;
    t.basis = kept_basis;

    // Internal objective is always a minimization.
    let (std_cost, obj_const) = internal_objective(problem, &std, sense, n_cols);
    if sense != Sense::Feasibility {
        let mut r = vec![Rational::zero(); n_cols + 1];
        let mut z = Rational::zero();
        for (j, cell) in r.iter_mut().enumerate().take(n_cols) {
            let mut acc = std_cost[j].clone();
            for (i, b) in t.basis.iter().enumerate() {
                if !std_cost[*b].is_zero() {
                    let e = t.entry(i, j);
                    if !e.is_zero() {
                        acc -= &std_cost[*b] * e;
                    }
                }
            }
            *cell = acc;
        }
        for (i, b) in t.basis.iter().enumerate() {
            if !std_cost[*b].is_zero() {
                z += &std_cost[*b] * t.rhs(i);
            }
        }
        r[n_cols] = -z;
        t.obj = Row::from_rationals(&r);

        if let Some(q) = run_simplex(&mut t, Some(art_start)) {
            let ray = extract_ray(problem, &std, &t, q);
            let feasible_point = extract_primal(problem, &std, &t);
            return Ok(LpOutcome::Unbounded {
                ray,
                feasible_point,
            });
        }
    }

    // Optimal (or feasible, for feasibility-only problems).
    let primal = extract_primal(problem, &std, &t);
    let objective = if sense == Sense::Feasibility {
        Rational::zero()
    } else {
        let z_int = t.objective_value();
        match sense {
            Sense::Maximize => obj_const - z_int,
            _ => obj_const + z_int,
        }
    };
    let row_duals = extract_duals(problem, &t, &kept_art, &kept_origin, &kept_sign, sense);
    Ok(LpOutcome::Optimal {
        primal,
        objective,
        row_duals,
    })
}

fn std_rows_iter<'a>(rows: &'a [Row], j: usize) -> impl Iterator<Item = Rational> + 'a {
    rows.iter().map(move |r| r.value(j))
}

/// Bland's rule simplex. `barred_from` bars columns at or above the index
/// from entering (used to freeze artificials in phase 2). Returns the
/// entering column on unboundedness, `None` at optimality.
fn run_simplex(t: &mut Tableau, barred_from: Option<usize>) -> Option<usize> {
    let limit = barred_from.unwrap_or(t.n_cols);
    loop {
        // Entering: smallest index with negative reduced cost.
        let mut entering = None;
        for j in 0..limit {
            if t.obj.sign(j) == Sign::Minus {
                entering = Some(j);
                break;
            }
        }
        let q = match entering {
            Some(q) => q,
            None => return None,
        };
        // Ratio test; ties resolved by the smallest basis variable index.
        // The row's shared denominator cancels: ratio_i = num[rhs]/num[q].
        let rhs_col = t.rhs_col();
        let mut best: Option<usize> = None;
        for i in 0..t.rows.len() {
            if t.rows[i].sign(q) != Sign::Plus {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => {
                    use std::cmp::Ordering;
                    let lhs = &t.rows[i].num[rhs_col] * &t.rows[b].num[q];
                    let rhs = &t.rows[b].num[rhs_col] * &t.rows[i].num[q];
                    match lhs.cmp(&rhs) {
                        Ordering::Less => i,
                        Ordering::Greater => b,
                        Ordering::Equal => {
                            if t.basis[i] < t.basis[b] {
                                i
                            } else {
                                b
                            }
                        }
                    }
                }
            });
        }
        match best {
            Some(p) => t.pivot(p, q),
            None => return Some(q),
        }
    }
}

fn build_std_form(problem: &LpProblem) -> StdForm {
    let mut reprs = Vec::with_capacity(problem.n_vars());
    let mut n_struct = 0usize;
    for b in &problem.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), _) => {
                reprs.push(VarRepr::Shift {
                    col: n_struct,
                    lower: l.clone(),
                });
                n_struct += 1;
            }
            (None, Some(u)) => {
                reprs.push(VarRepr::Mirror {
                    col: n_struct,
                    upper: u.clone(),
                });
                n_struct += 1;
            }
            (None, None) => {
                reprs.push(VarRepr::Split {
                    pos: n_struct,
                    neg: n_struct + 1,
                });
                n_struct += 2;
            }
        }
    }

    // Duplicate rows are removed; duplicates keep zero multipliers.
    let mut reps: Vec<usize> = Vec::new();
    for (k, c) in problem.constraints.iter().enumerate() {
        let dup = reps.iter().any(|&r| {
            let rc = &problem.constraints[r];
            rc.relation == c.relation && rc.rhs == c.rhs && rc.coeffs == c.coeffs
        });
        if !dup {
            reps.push(k);
        }
    }

    let mut rows = Vec::new();
    for &k in &reps {
        let c = &problem.constraints[k];
        let mut coeffs = vec![Rational::zero(); n_struct];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &reprs[j] {
                VarRepr::Shift { col, lower } => {
                    coeffs[*col] = a.clone();
                    rhs -= a * lower;
                }
                VarRepr::Mirror { col, upper } => {
                    coeffs[*col] = -a.clone();
                    rhs -= a * upper;
                }
                VarRepr::Split { pos, neg } => {
                    coeffs[*pos] = a.clone();
                    coeffs[*neg] = -a.clone();
                }
            }
        }
        let sign = if rhs.is_negative() { -1 } else { 1 };
        rows.push(StdRow {
            coeffs,
            relation: c.relation,
            rhs,
            origin: RowOrigin::User(k),
            sign,
        });
    }

    // Upper bounds of doubly-bounded variables become explicit rows.
    for (j, b) in problem.bounds.iter().enumerate() {
        if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
            if let VarRepr::Shift { col, .. } = &reprs[j] {
                let mut coeffs = vec![Rational::zero(); n_struct];
                coeffs[*col] = Rational::one();
                let rhs = u - l;
                let sign = if rhs.is_negative() { -1 } else { 1 };
                rows.push(StdRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs,
                    origin: RowOrigin::UpperBound(j),
                    sign,
                });
            }
        }
    }

    StdForm {
        reprs,
        n_struct,
        rows,
    }
}

/// Maps the user objective onto standard columns; returns (costs, constant)
/// with costs already negated for maximization (internal sense is min).
fn internal_objective(
    problem: &LpProblem,
    std: &StdForm,
    sense: Sense,
    n_cols: usize,
) -> (Vec<Rational>, Rational) {
    let mut cost = vec![Rational::zero(); n_cols + 1];
    let mut constant = Rational::zero();
    for (j, c) in problem.objective.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        match &std.reprs[j] {
            VarRepr::Shift { col, lower } => {
                cost[*col] = c.clone();
                constant += c * lower;
            }
            VarRepr::Mirror { col, upper } => {
                cost[*col] = -c.clone();
                constant += c * upper;
            }
            VarRepr::Split { pos, neg } => {
                cost[*pos] = c.clone();
                cost[*neg] = -c.clone();
            }
        }
    }
    if sense == Sense::Maximize {
        for c in cost.iter_mut() {
            *c = -c.clone();
        }
    }
    (cost, constant)
}

fn std_col_values(t: &Tableau) -> Vec<Rational> {
    let mut vals = vec![Rational::zero(); t.n_cols];
    for (i, &b) in t.basis.iter().enumerate() {
        vals[b] = t.rhs(i);
    }
    vals
}

fn extract_primal(problem: &LpProblem, std: &StdForm, t: &Tableau) -> Vec<Rational> {
    let vals = std_col_values(t);
    problem
        .variables
        .iter()
        .enumerate()
        .map(|(j, _)| match &std.reprs[j] {
            VarRepr::Shift { col, lower } => lower + &vals[*col],
            VarRepr::Mirror { col, upper } => upper - &vals[*col],
            VarRepr::Split { pos, neg } => &vals[*pos] - &vals[*neg],
        })
        .collect()
}

/// Row duals for the original constraints, from the reduced costs of the
/// artificial columns at optimality.
fn extract_duals(
    problem: &LpProblem,
    t: &Tableau,
    kept_art: &[usize],
    kept_origin: &[RowOrigin],
    kept_sign: &[i8],
    sense: Sense,
) -> Vec<Rational> {
    let mut duals = vec![Rational::zero(); problem.constraints.len()];
    if sense == Sense::Feasibility {
        return duals;
    }
    for (i, &a) in kept_art.iter().enumerate() {
        // artificial cost is 0 in phase 2, so pi_i = -reduced_cost(a_i)
        let pi = -t.reduced_cost(a);
        let rho = if kept_sign[i] < 0 { -pi } else { pi };
        if let RowOrigin::User(k) = kept_origin[i] {
            // Duplicate rows keep a zero multiplier; representatives carry it.
            duals[k] = match sense {
                Sense::Maximize => -rho,
                _ => rho,
            };
        }
    }
    duals
}

fn extract_farkas(
    problem: &LpProblem,
    std: &StdForm,
    t: &Tableau,
    art_col: &[usize],
) -> FarkasCertificate {
    let n_user = problem.constraints.len();
    let n_vars = problem.n_vars();
    let mut rho = vec![Rational::zero(); std.rows.len()];
    for (i, &a) in art_col.iter().enumerate() {
        // phase-1 artificial cost is 1, so pi_i = 1 - reduced_cost(a_i)
        let pi = Rational::one() - t.reduced_cost(a);
        rho[i] = if std.rows[i].sign < 0 { -pi } else { pi };
    }

    let mut row_multipliers = vec![Rational::zero(); n_user];
    let mut lower = vec![Rational::zero(); n_vars];
    let mut upper = vec![Rational::zero(); n_vars];
    for (i, r) in std.rows.iter().enumerate() {
        let m = match r.relation {
            Relation::Ge => rho[i].clone(),
            _ => -rho[i].clone(),
        };
        match r.origin {
            RowOrigin::User(k) => row_multipliers[k] = m,
            RowOrigin::UpperBound(j) => upper[j] += m,
        }
    }

    // Residual coefficients over standard columns map to bound multipliers.
    for j in 0..n_vars {
        let residual = |col: usize| -> Rational {
            let mut acc = Rational::zero();
            for (i, r) in std.rows.iter().enumerate() {
                if !r.coeffs[col].is_zero() {
                    acc -= &rho[i] * &r.coeffs[col];
                }
            }
            acc
        };
        match &std.reprs[j] {
            VarRepr::Shift { col, .. } => lower[j] += residual(*col),
            VarRepr::Mirror { col, .. } => upper[j] += residual(*col),
            VarRepr::Split { .. } => {}
        }
    }

    FarkasCertificate {
        row_multipliers,
        lower_bound_multipliers: lower,
        upper_bound_multipliers: upper,
    }
}

fn extract_ray(problem: &LpProblem, std: &StdForm, t: &Tableau, q: usize) -> Vec<Rational> {
    let mut dir = vec![Rational::zero(); t.n_cols];
    if q < t.n_cols {
        dir[q] = Rational::one();
    }
    for (i, &b) in t.basis.iter().enumerate() {
        let e = t.entry(i, q);
        if !e.is_zero() {
            dir[b] = -e;
        }
    }
    problem
        .variables
        .iter()
        .enumerate()
        .map(|(j, _)| match &std.reprs[j] {
            VarRepr::Shift { col, .. } => dir[*col].clone(),
            VarRepr::Mirror { col, .. } => -dir[*col].clone(),
            VarRepr::Split { pos, neg } => &dir[*pos] - &dir[*neg],
        })
        .collect()
}
