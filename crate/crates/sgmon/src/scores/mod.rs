//! Limit equilibrium score programs: the direction-weighted score k(lambda),
//! the halfspace polytope it carves out, the strongly symmetric variants and
//! their payoff interval, essentiality of the public signal, strict
//! improvement verification, and the finite-block construction verifier.

mod block;
mod essential;
mod polytope;
mod program;
mod transport;

pub use block::{verify_block_construction, BlockConstructionReport, BlockError, FeasiblePoint};
pub use essential::{
    check_essentiality, verify_strict_improvement, BindingCycleReport, EssentialityReport,
    StrictImprovementReport, StrictImprovementStatus,
};
pub use polytope::{limit_polytope, LimitPayoffPolytope, PolytopeError};
pub use program::{
    simple_cycles, solve_score, solve_score_mon, sse_interval, sse_interval_solutions,
    MarkovProfile, ScoreError, ScoreMode, ScoreOutcome, ScoreProgramSpec, ScoreSolution,
    SseInterval,
};
pub use transport::{check_point_feasible, transport_solution, TransportedPoint};
