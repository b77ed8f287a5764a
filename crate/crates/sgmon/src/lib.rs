//! Exact-rational tooling for comparing monitoring structures of finite
//! stochastic games and computing limit equilibrium score programs.
//!
//! The crate is organized around the data model in [`game`]: a
//! [`game::StochasticGame`] plus a [`game::MonitoringStructure`] induce a
//! [`game::JointKernel`] over (next state, public signal) pairs. The
//! [`garbling`] module decides informativeness orders between kernels by
//! exact linear programming, [`scores`] computes the limit score programs
//! and payoff polytopes built on those kernels, [`markov`] holds the chain
//! utilities behind the irreducibility and invariance arguments, and
//! [`apps`] generates the worked example instances end to end.
//!
//! All arithmetic is exact: probabilities, payoffs, scores, and certificates
//! are arbitrary-precision rationals throughout.

pub mod apps;
pub mod fileio;
pub mod game;
pub mod garbling;
mod linalg;
pub mod markov;
pub mod rat;
pub mod scores;

pub use exactlp;
pub use rat::Rational;
