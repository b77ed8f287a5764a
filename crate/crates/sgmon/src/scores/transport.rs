//! Witness transport: maps a feasible point of the score program under a
//! garbled kernel to one under the finer kernel with the same value. The
//! increments split into an edge part (the best signal's increment per
//! transition, which already satisfies the cycle family) and a nonpositive-
//! score remainder, which is pushed through the garbling channel.

use num_traits::Zero;

use crate::game::{JointKernel, StochasticGame};
use crate::garbling::GarblingWitness;
use crate::rat::Rational;

use super::program::{lam_dot, profile_data_for, simple_cycles, MarkovProfile, ScoreSolution};

/// A candidate point for the score program under another kernel.
#[derive(Debug, Clone)]
pub struct TransportedPoint {
    pub lambda: Vec<Rational>,
    pub profile: MarkovProfile,
    pub v: Vec<Rational>,
    /// x[state][outcome of the finer kernel][payoff dim]
    pub x: Vec<Vec<Vec<Rational>>>,
}

impl TransportedPoint {
    pub fn value(&self) -> Rational {
        lam_dot(&self.lambda, &self.v)
    }
}

/// Builds the finer-kernel point from a solution under the garbled kernel
/// and a garbling witness (coarse from fine).
pub fn transport_solution(
    solution: &ScoreSolution,
    coarse: &JointKernel,
    fine: &JointKernel,
    witness: &GarblingWitness,
) -> TransportedPoint {
    let n_states = coarse.n_states();
    let ny = coarse.n_signals();
    let ny_fine = fine.n_signals();

    let x = (0..n_states)
        .map(|s| {
            // Edge increments: the best coarse signal per next state.
            let edge: Vec<Vec<Rational>> = (0..n_states)
                .map(|t| {
                    let best = (0..ny)
                        .max_by(|&a, &b| {
                            lam_dot(&solution.lambda, &solution.x[s][t * ny + a]).cmp(&lam_dot(
                                &solution.lambda,
                                &solution.x[s][t * ny + b],
                            ))
                        })
                        .expect("nonempty signal set");
                    solution.x[s][t * ny + best].clone()
                })
                .collect();
            let remainder = |o: usize| -> Vec<Rational> {
                let t = o / ny;
                solution.x[s][o]
                    .iter()
                    .zip(&edge[t])
                    .map(|(a, b)| a - b)
                    .collect()
            };
            let ch = &witness.per_state[s];
            (0..n_states * ny_fine)
                .map(|src| {
                    let t_src = src / ny_fine;
                    let mut out = edge[t_src].clone();
                    if !ch.gamma[src].is_zero() {
                        for (o, phi) in ch.phi[src].iter().enumerate() {
                            if !phi.is_zero() {
                                let rem = remainder(o);
                                for (acc, r) in out.iter_mut().zip(&rem) {
                                    if !r.is_zero() {
                                        *acc += &ch.gamma[src] * phi * r;
                                    }
                                }
                            }
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();

    TransportedPoint {
        lambda: solution.lambda.clone(),
        profile: solution.profile.clone(),
        v: solution.v.clone(),
        x,
    }
}

/// Exact feasibility of a point for the score program under a kernel:
/// adding-up equalities, incentive rows, and the full cycle family via the
/// edge scores.
pub fn check_point_feasible(
    game: &StochasticGame,
    kernel: &JointKernel,
    point: &TransportedPoint,
) -> Result<(), String> {
    let sym = match point.profile {
        MarkovProfile::Pure(_) => None,
        _ => Some(
            crate::game::SymmetricGame::new(game.clone())
                .map_err(|e| format!("symmetric view unavailable: {e}"))?,
        ),
    };
    let data = profile_data_for(game, sym.as_ref(), kernel, &point.profile);
    let n_out = kernel.outcome_count();
    for (s, stage) in data.stages.iter().enumerate() {
        for i in 0..data.n_obj {
            let mut acc = stage.u[i].clone();
            for o in 0..n_out {
                if !stage.dist[o].is_zero() {
                    acc += &stage.dist[o] * &point.x[s][o][i];
                }
            }
            if acc != point.v[i] {
                return Err(format!(
                    "adding-up equality fails at state {s}, dim {i}: {acc} vs {}",
                    point.v[i]
                ));
            }
        }
        for (i, u_dev, dist) in &stage.deviations {
            let mut acc = u_dev.clone();
            for o in 0..n_out {
                if !dist[o].is_zero() {
                    acc += &dist[o] * &point.x[s][o][*i];
                }
            }
            if acc > point.v[*i] {
                return Err(format!(
                    "incentive fails at state {s}, dim {i}: deviation {acc} vs {}",
                    point.v[*i]
                ));
            }
        }
    }
    let scores = super::program::edge_scores(
        &point.lambda,
        &point.x,
        kernel.n_states(),
        kernel.n_signals(),
    );
    for cycle in simple_cycles(kernel.n_states()) {
        let len = cycle.len();
        let total: Rational = (0..len)
            .map(|i| scores[cycle[i]][cycle[(i + 1) % len]].clone())
            .fold(Rational::zero(), |a, b| a + b);
        if total > Rational::zero() {
            return Err(format!("cycle {cycle:?} violates feasibility: {total}"));
        }
    }
    Ok(())
}
