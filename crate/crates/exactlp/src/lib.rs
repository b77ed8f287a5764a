//! Exact linear programming over arbitrary-precision rationals.
//!
//! Every verdict comes with a certificate that can be re-checked by direct
//! substitution: an optimal vertex with row duals, a Farkas certificate of
//! infeasibility, or an unboundedness ray. The solver is a two-phase primal
//! simplex with Bland's index-minimal pivot rule, so it terminates on every
//! input and identical problems always produce identical outcomes.

mod problem;
mod solver;
mod tableau;
mod verify;

pub use problem::{Constraint, LpError, LpProblem, Relation, Sense, VarBounds, VarId};
pub use solver::{solve, FarkasCertificate, LpOutcome};
pub use verify::verify_certificate;

/// Arbitrary-precision rational scalar used throughout the solver.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from an integer pair.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Shorthand for an integer-valued rational.
pub fn ratio_int(value: i64) -> Rational {
    Rational::from_integer(value.into())
}
