use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use crate::Rational;

/// Index of a declared variable.
pub type VarId = usize;

/// Objective sense. `Feasibility` skips the optimization phase entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
    Feasibility,
}

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// A single linear constraint with a dense coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
    pub label: Option<String>,
}

/// Per-variable bounds; `None` on both sides means the variable is free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn free() -> Self {
        VarBounds::default()
    }

    pub fn nonneg() -> Self {
        VarBounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn interval(lower: Rational, upper: Rational) -> Self {
        VarBounds {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("problem has no variables")]
    EmptyVariableList,
    #[error("constraint {constraint} has {got} coefficients for {expected} variables")]
    CoefficientLength {
        constraint: usize,
        expected: usize,
        got: usize,
    },
    #[error("constraint references undeclared variable {0}")]
    DanglingVariable(VarId),
    #[error("objective vector has {got} coefficients for {expected} variables")]
    ObjectiveLength { expected: usize, got: usize },
}

/// An exact-rational linear program.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub variables: Vec<String>,
    pub sense: Option<Sense>,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

impl LpProblem {
    pub fn new() -> Self {
        LpProblem {
            variables: Vec::new(),
            sense: None,
            objective: Vec::new(),
            constraints: Vec::new(),
            bounds: Vec::new(),
        }
    }

    /// Declares a variable and returns its id. Existing rows gain a zero
    /// coefficient, so variables may be added after constraints.
    pub fn add_var(&mut self, name: impl Into<String>, bounds: VarBounds) -> VarId {
        self.variables.push(name.into());
        self.objective.push(Rational::zero());
        self.bounds.push(bounds);
        for c in self.constraints.iter_mut() {
            c.coeffs.push(Rational::zero());
        }
        self.variables.len() - 1
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: &[(VarId, Rational)]) {
        self.sense = Some(sense);
        for c in self.objective.iter_mut() {
            c.set_zero();
        }
        for (v, c) in coeffs {
            self.objective[*v] = c.clone();
        }
    }

    pub fn set_objective_coeff(&mut self, var: VarId, coeff: Rational) {
        self.objective[var] = coeff;
    }

    /// Adds a constraint given as a sparse coefficient list.
    pub fn add_constraint(
        &mut self,
        coeffs: &[(VarId, Rational)],
        relation: Relation,
        rhs: Rational,
    ) -> usize {
        let mut dense = vec![Rational::zero(); self.variables.len()];
        for (v, c) in coeffs {
            dense[*v] += c.clone();
        }
        self.constraints.push(Constraint {
            coeffs: dense,
            relation,
            rhs,
            label: None,
        });
        self.constraints.len() - 1
    }

    pub fn add_labeled_constraint(
        &mut self,
        coeffs: &[(VarId, Rational)],
        relation: Relation,
        rhs: Rational,
        label: impl Into<String>,
    ) -> usize {
        let row = self.add_constraint(coeffs, relation, rhs);
        self.constraints[row].label = Some(label.into());
        row
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.variables.is_empty() {
            return Err(LpError::EmptyVariableList);
        }
        let n = self.variables.len();
        if self.objective.len() != n {
            return Err(LpError::ObjectiveLength {
                expected: n,
                got: self.objective.len(),
            });
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::CoefficientLength {
                    constraint: i,
                    expected: n,
                    got: c.coeffs.len(),
                });
            }
        }
        Ok(())
    }

    /// Plain-text listing of the program for external audit.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Some(Sense::Maximize) => "maximize",
            Some(Sense::Minimize) => "minimize",
            Some(Sense::Feasibility) | None => "feasibility",
        };
        let _ = writeln!(out, "{} {}", sense, linear_form(&self.objective, &self.variables));
        let _ = writeln!(out, "subject to");
        for c in &self.constraints {
            let tag = c.label.as_deref().unwrap_or("");
            let _ = writeln!(
                out,
                "  {} {} {}{}",
                linear_form(&c.coeffs, &self.variables),
                c.relation.symbol(),
                c.rhs,
                if tag.is_empty() {
                    String::new()
                } else {
                    format!("   [{tag}]")
                }
            );
        }
        let _ = writeln!(out, "bounds");
        for (name, b) in self.variables.iter().zip(&self.bounds) {
            let lo = b
                .lower
                .as_ref()
                .map(|r| r.to_string())
                .unwrap_or_else(|| "-inf".into());
            let hi = b
                .upper
                .as_ref()
                .map(|r| r.to_string())
                .unwrap_or_else(|| "+inf".into());
            let _ = writeln!(out, "  {} <= {} <= {}", lo, name, hi);
        }
        out
    }
}

fn linear_form(coeffs: &[Rational], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (c, name) in coeffs.iter().zip(names) {
        if !c.is_zero() {
            parts.push(format!("{c} {name}"));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}
