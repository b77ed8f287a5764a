//! Markov-chain utilities: invariant distributions, irreducibility over all
//! pure Markov profiles, invariance transfer for signed extended strategies,
//! and admissibility of action profiles under kernel-equivalent deviations.

use num_traits::{One, Zero};
use thiserror::Error;

use exactlp::{solve, LpOutcome, LpProblem, Relation, Sense, VarBounds};

use crate::game::{JointKernel, StochasticGame};
use crate::linalg;
use crate::rat::{sum, Rational};

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("profile assigns out-of-range actions")]
    BadProfile,
    #[error("chain is reducible under profile {profile:?}")]
    Reducible { profile: Vec<usize> },
    #[error("invariant distribution is not unique under profile {profile:?}")]
    NotUnique { profile: Vec<usize> },
    #[error("invariant distributions differ under profile {profile:?}")]
    DifferentInvariants { profile: Vec<usize> },
    #[error("signed vector is not invariant under the base transition (state {state})")]
    NotInvariantUnderBase { state: usize },
    #[error("extended strategy rows must sum to one (state {state})")]
    BadRowSum { state: usize },
    #[error("internal LP error: {0}")]
    Lp(#[from] exactlp::LpError),
}

/// State-wise signed action weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedMarkovStrategy {
    /// `weights[s][a]` over full action profiles; rows sum to 1 exactly.
    pub weights: Vec<Vec<Rational>>,
}

impl ExtendedMarkovStrategy {
    pub fn validate(&self) -> Result<(), MarkovError> {
        for (s, row) in self.weights.iter().enumerate() {
            if !sum(row).is_one() {
                return Err(MarkovError::BadRowSum { state: s });
            }
        }
        Ok(())
    }
}

/// Signed state vector certified invariant under an extended strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedInvariantVector {
    pub values: Vec<Rational>,
}

/// A pure Markov profile: one action profile per state.
pub type PureMarkovProfile = Vec<usize>;

fn transition_matrix(game: &StochasticGame, profile: &PureMarkovProfile) -> Vec<Vec<Rational>> {
    (0..game.n_states())
        .map(|s| game.transition_row(s, profile[s]).to_vec())
        .collect()
}

/// Unique invariant distribution of q under a pure Markov profile, or
/// `None` when the fixed-point space has dimension above one. Uniqueness is
/// decided by the exact rank of Q^T - I.
pub fn invariant_distribution(
    game: &StochasticGame,
    profile: &PureMarkovProfile,
) -> Option<Vec<Rational>> {
    let n = game.n_states();
    let q = transition_matrix(game, profile);
    // rows of (Q^T - I)
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|t| {
            (0..n)
                .map(|s| {
                    let mut v = q[s][t].clone();
                    if s == t {
                        v -= Rational::one();
                    }
                    v
                })
                .collect()
        })
        .collect();
    if linalg::rank(m.clone()) != n - 1 {
        return None;
    }
    // Append the normalization row and solve exactly.
    m.push(vec![Rational::one(); n]);
    let mut b = vec![Rational::zero(); n];
    b.push(Rational::one());
    linalg::solve_unique(&m, &b)
}

fn all_pure_profiles(game: &StochasticGame) -> Vec<PureMarkovProfile> {
    let n_prof = game.profiles().total();
    let n_states = game.n_states();
    let mut out = Vec::new();
    let total = n_prof.pow(n_states as u32);
    for mut idx in 0..total {
        let mut p = vec![0; n_states];
        for slot in p.iter_mut().rev() {
            *slot = idx % n_prof;
            idx /= n_prof;
        }
        out.push(p);
    }
    out
}

fn strongly_connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let reach = |from: usize, forward: bool| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let edge = if forward { adj[u][v] } else { adj[v][u] };
                if edge && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    reach(0, true).iter().all(|&b| b) && reach(0, false).iter().all(|&b| b)
}

/// Checks strong connectivity of the support graph under every pure Markov
/// profile; reports the first reducible profile.
pub fn check_irreducible_all_pure_profiles(
    game: &StochasticGame,
) -> Result<(), PureMarkovProfile> {
    for profile in all_pure_profiles(game) {
        let n = game.n_states();
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|s| {
                game.transition_row(s, profile[s])
                    .iter()
                    .map(|p| !p.is_zero())
                    .collect()
            })
            .collect();
        if !strongly_connected(&adj) {
            return Err(profile);
        }
    }
    Ok(())
}

/// Exact equality of invariant distributions under two transition laws, per
/// pure Markov profile. Both games must be irreducible under every profile.
pub fn check_same_invariants(
    game: &StochasticGame,
    other: &StochasticGame,
) -> Result<(), MarkovError> {
    check_irreducible_all_pure_profiles(game)
        .map_err(|profile| MarkovError::Reducible { profile })?;
    check_irreducible_all_pure_profiles(other)
        .map_err(|profile| MarkovError::Reducible { profile })?;
    for profile in all_pure_profiles(game) {
        let pi = invariant_distribution(game, &profile)
            .ok_or_else(|| MarkovError::NotUnique {
                profile: profile.clone(),
            })?;
        let pi2 = invariant_distribution(other, &profile)
            .ok_or_else(|| MarkovError::NotUnique {
                profile: profile.clone(),
            })?;
        if pi != pi2 {
            return Err(MarkovError::DifferentInvariants { profile });
        }
    }
    Ok(())
}

/// Signed invariance equation: sum_s beta_s sum_a alpha_s(a) q(t|s,a) = beta_t.
fn invariance_residuals(
    game: &StochasticGame,
    alpha: &ExtendedMarkovStrategy,
    beta: &SignedInvariantVector,
) -> Vec<Rational> {
    let n = game.n_states();
    (0..n)
        .map(|t| {
            let mut acc = Rational::zero();
            for s in 0..n {
                for a in game.profiles().iter() {
                    let w = &alpha.weights[s][a];
                    if !w.is_zero() {
                        let q = game.transition(s, a, t);
                        if !q.is_zero() {
                            acc += &beta.values[s] * w * q;
                        }
                    }
                }
            }
            acc - &beta.values[t]
        })
        .collect()
}

/// Checks that invariance of `beta` under (`alpha`, q) transfers to q'.
/// Preconditions (row sums, same invariants, base invariance) are verified;
/// the post-condition is asserted exactly at every state, returning the
/// first counterexample state if any.
pub fn verify_invariance_transfer(
    game: &StochasticGame,
    other: &StochasticGame,
    alpha: &ExtendedMarkovStrategy,
    beta: &SignedInvariantVector,
) -> Result<Result<(), usize>, MarkovError> {
    alpha.validate()?;
    check_same_invariants(game, other)?;
    let base = invariance_residuals(game, alpha, beta);
    if let Some(state) = base.iter().position(|r| !r.is_zero()) {
        return Err(MarkovError::NotInvariantUnderBase { state });
    }
    let transferred = invariance_residuals(other, alpha, beta);
    Ok(match transferred.iter().position(|r| !r.is_zero()) {
        Some(state) => Err(state),
        None => Ok(()),
    })
}

/// Solves the invariance equation for a signed vector given (`alpha`, q):
/// a nonzero left fixed vector of the signed transition matrix.
pub fn solve_signed_invariant(
    game: &StochasticGame,
    alpha: &ExtendedMarkovStrategy,
) -> Option<SignedInvariantVector> {
    let n = game.n_states();
    // M[s][t] = sum_a alpha_s(a) q(t|s,a); rows sum to 1.
    let m: Vec<Vec<Rational>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|t| {
                    let mut acc = Rational::zero();
                    for a in game.profiles().iter() {
                        let w = &alpha.weights[s][a];
                        if !w.is_zero() {
                            acc += w * game.transition(s, a, t);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    // beta M = beta  <=>  (M^T - I) beta = 0
    let mt: Vec<Vec<Rational>> = (0..n)
        .map(|t| {
            (0..n)
                .map(|s| {
                    let mut v = m[s][t].clone();
                    if s == t {
                        v -= Rational::one();
                    }
                    v
                })
                .collect()
        })
        .collect();
    let ns = linalg::nullspace(mt);
    ns.into_iter().next().map(|values| SignedInvariantVector { values })
}

/// Violating deviation found by the admissibility LP.
#[derive(Debug, Clone)]
pub struct AdmissibilityViolation {
    pub state: usize,
    pub player: usize,
    /// Mixed deviation with a strictly higher payoff and an identical kernel.
    pub deviation: Vec<Rational>,
    pub gain: Rational,
}

/// Decides admissibility of a (rational-mixture) profile: at each (state,
/// player), maximizes the deviator's payoff over mixed deviations whose
/// induced kernel column is unchanged. Admissible iff no optimum exceeds
/// the on-path payoff.
pub fn check_admissible(
    game: &StochasticGame,
    kernel: &JointKernel,
    mixtures: &[Vec<Rational>],
) -> Result<Result<(), AdmissibilityViolation>, MarkovError> {
    let n_players = game.n_players();
    for (i, mix) in mixtures.iter().enumerate() {
        if mix.len() != game.actions[i].len() || !sum(mix).is_one() {
            return Err(MarkovError::BadProfile);
        }
    }
    for s in 0..game.n_states() {
        let weights = game.mixture_weights(mixtures);
        let on_path_col = kernel.mixed_column(s, &weights);
        for i in 0..n_players {
            let n_acts = game.actions[i].len();
            // Expected payoff and kernel column when player i plays a_i pure
            // against the others' mixtures.
            let mut others = mixtures.to_vec();
            let mut u_pure = Vec::with_capacity(n_acts);
            let mut col_pure = Vec::with_capacity(n_acts);
            for ai in 0..n_acts {
                let mut pure = vec![Rational::zero(); n_acts];
                pure[ai] = Rational::one();
                others[i] = pure;
                let w = game.mixture_weights(&others);
                let u: Rational = w
                    .iter()
                    .map(|(a, wt)| wt * game.payoff(i, s, *a))
                    .fold(Rational::zero(), |acc, v| acc + v);
                u_pure.push(u);
                col_pure.push(kernel.mixed_column(s, &w));
            }
            others[i] = mixtures[i].clone();
            let on_path_u: Rational = mixtures[i]
                .iter()
                .zip(&u_pure)
                .map(|(w, u)| w * u)
                .fold(Rational::zero(), |acc, v| acc + v);

            let mut lp = LpProblem::new();
            let vars: Vec<_> = (0..n_acts)
                .map(|ai| lp.add_var(format!("alt_{ai}"), VarBounds::nonneg()))
                .collect();
            lp.add_constraint(
                &vars.iter().map(|&v| (v, Rational::one())).collect::<Vec<_>>(),
                Relation::Eq,
                Rational::one(),
            );
            for o in 0..kernel.outcome_count() {
                let coeffs: Vec<_> = vars
                    .iter()
                    .enumerate()
                    .map(|(ai, &v)| (v, col_pure[ai][o].clone()))
                    .collect();
                lp.add_constraint(&coeffs, Relation::Eq, on_path_col[o].clone());
            }
            let obj: Vec<_> = vars
                .iter()
                .enumerate()
                .map(|(ai, &v)| (v, u_pure[ai].clone()))
                .collect();
            lp.set_objective(Sense::Maximize, &obj);
            match solve(&lp)? {
                LpOutcome::Optimal {
                    primal, objective, ..
                } => {
                    if objective > on_path_u {
                        return Ok(Err(AdmissibilityViolation {
                            state: s,
                            player: i,
                            deviation: vars.iter().map(|&v| primal[v].clone()).collect(),
                            gain: objective - on_path_u,
                        }));
                    }
                }
                LpOutcome::Infeasible { .. } => {
                    unreachable!("the on-path mixture is always feasible")
                }
                LpOutcome::Unbounded { .. } => unreachable!("simplex over a bounded polytope"),
            }
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{joint_kernel, MonitoringStructure, StochasticGame};
    use crate::rat::{rat, rint};

    fn simple_game(q_rows: Vec<Vec<Vec<Rational>>>) -> StochasticGame {
        let n_states = q_rows.len();
        let states = (0..n_states).map(|i| format!("s{i}")).collect();
        StochasticGame::new(
            states,
            vec!["P1".into()],
            vec![vec!["a".into()]],
            vec![vec![vec![rint(0)]; n_states]],
            q_rows,
        )
        .unwrap()
    }

    #[test]
    fn uniform_two_state_chain_has_half_half_invariant() {
        let g = simple_game(vec![
            vec![vec![rat(1, 2), rat(1, 2)]],
            vec![vec![rat(1, 2), rat(1, 2)]],
        ]);
        let pi = invariant_distribution(&g, &vec![0, 0]).unwrap();
        assert_eq!(pi, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn two_absorbing_states_are_not_unique() {
        let g = simple_game(vec![
            vec![vec![rint(1), rint(0)]],
            vec![vec![rint(0), rint(1)]],
        ]);
        assert!(invariant_distribution(&g, &vec![0, 0]).is_none());
    }

    #[test]
    fn three_state_invariant_satisfies_fixed_point() {
        let g = simple_game(vec![
            vec![vec![rat(1, 2), rat(1, 4), rat(1, 4)]],
            vec![vec![rat(1, 3), rat(1, 3), rat(1, 3)]],
            vec![vec![rat(1, 6), rat(1, 2), rat(1, 3)]],
        ]);
        let profile = vec![0, 0, 0];
        let pi = invariant_distribution(&g, &profile).unwrap();
        assert_eq!(sum(&pi), rint(1));
        for t in 0..3 {
            let lhs: Rational = (0..3)
                .map(|s| &pi[s] * g.transition(s, 0, t))
                .fold(rint(0), |a, b| a + b);
            assert_eq!(lhs, pi[t]);
        }
        // Irreducible, so the invariant is strictly positive.
        assert!(pi.iter().all(|p| p > &rint(0)));
    }

    #[test]
    fn absorbing_profile_is_flagged_reducible() {
        let states = vec!["s0".into(), "s1".into()];
        let players = vec!["P1".into()];
        let actions = vec![vec!["stay".into(), "move".into()]];
        let payoff = vec![vec![vec![rint(0); 2]; 2]];
        // action 0 at state 0 is absorbing; action 1 moves on.
        let transition = vec![
            vec![vec![rint(1), rint(0)], vec![rint(0), rint(1)]],
            vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]],
        ];
        let g = StochasticGame::new(states, players, actions, payoff, transition).unwrap();
        let err = check_irreducible_all_pure_profiles(&g).unwrap_err();
        assert_eq!(err[0], 0);
    }

    #[test]
    fn lazy_chain_preserves_invariants() {
        let g = simple_game(vec![
            vec![vec![rat(1, 4), rat(3, 4)]],
            vec![vec![rat(2, 3), rat(1, 3)]],
        ]);
        let lazy_rows: Vec<Vec<Vec<Rational>>> = (0..2)
            .map(|s| {
                vec![(0..2)
                    .map(|t| {
                        let mut v = g.transition(s, 0, t) / rint(2);
                        if s == t {
                            v += rat(1, 2);
                        }
                        v
                    })
                    .collect()]
            })
            .collect();
        let lazy = simple_game(lazy_rows);
        check_same_invariants(&g, &lazy).unwrap();
    }

    #[test]
    fn admissibility_under_perfect_and_uninformative_monitoring() {
        // One state, two players, 2x2 game with a dominant deviation.
        let states = vec!["s".into()];
        let players = vec!["P1".into(), "P2".into()];
        let actions = vec![vec!["C".into(), "D".into()]; 2];
        // prisoners-dilemma-like payoffs for player 0; symmetric for 1
        let u = |g: i64, l: i64| -> Vec<Vec<Vec<Rational>>> {
            let p0 = vec![vec![rint(1), rint(-l), rint(1) + rat(g, 1), rint(0)]];
            let p1 = vec![vec![rint(1), rint(1) + rat(g, 1), rint(-l), rint(0)]];
            vec![p0, p1]
        };
        let transition = vec![vec![vec![rint(1)]; 4]];
        let game = StochasticGame::new(states, players, actions, u(1, 1), transition).unwrap();

        // Perfect monitoring: one signal per profile.
        let eye = |k: usize| -> Vec<Rational> {
            (0..4).map(|y| if y == k { rint(1) } else { rint(0) }).collect()
        };
        let perfect_law = vec![(0..4).map(|a| vec![eye(a)]).collect::<Vec<_>>()];
        let perfect = MonitoringStructure::new(
            vec!["y0".into(), "y1".into(), "y2".into(), "y3".into()],
            perfect_law,
        )
        .unwrap();
        let kern = joint_kernel(&game, &perfect).unwrap();
        let cc = vec![vec![rint(1), rint(0)], vec![rint(1), rint(0)]];
        assert!(check_admissible(&game, &kern, &cc).unwrap().is_ok());

        // Uninformative monitoring: the kernel constraint is vacuous, so
        // only stage best responses are admissible.
        let flat_law = vec![vec![vec![vec![rint(1)]]; 4]];
        let flat = MonitoringStructure::new(vec!["y".into()], flat_law).unwrap();
        let kern = joint_kernel(&game, &flat).unwrap();
        let v = check_admissible(&game, &kern, &cc).unwrap().unwrap_err();
        assert_eq!(v.gain, rint(1)); // deviating to D gains g = 1
        let dd = vec![vec![rint(0), rint(1)], vec![rint(0), rint(1)]];
        assert!(check_admissible(&game, &kern, &dd).unwrap().is_ok());
    }

    #[test]
    fn invariance_transfer_on_lazy_chain() {
        // Two states, two actions for one player; full-support q.
        let states = vec!["s0".into(), "s1".into()];
        let players = vec!["P1".into()];
        let actions = vec![vec!["a".into(), "b".into()]];
        let payoff = vec![vec![vec![rint(0); 2]; 2]];
        let transition = vec![
            vec![vec![rat(1, 3), rat(2, 3)], vec![rat(3, 4), rat(1, 4)]],
            vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 5), rat(4, 5)]],
        ];
        let g = StochasticGame::new(states, players, actions, payoff, transition).unwrap();
        let lazy_rows: Vec<Vec<Vec<Rational>>> = (0..2)
            .map(|s| {
                (0..2)
                    .map(|a| {
                        (0..2)
                            .map(|t| {
                                let mut v = g.transition(s, a, t) / rint(2);
                                if s == t {
                                    v += rat(1, 2);
                                }
                                v
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let lazy = StochasticGame::new(
            g.states.clone(),
            g.players.clone(),
            g.actions.clone(),
            vec![vec![vec![rint(0); 2]; 2]],
            lazy_rows,
        )
        .unwrap();

        // Signed extended strategy with rows summing to one.
        let alpha = ExtendedMarkovStrategy {
            weights: vec![vec![rat(3, 2), rat(-1, 2)], vec![rat(1, 4), rat(3, 4)]],
        };
        let beta = solve_signed_invariant(&g, &alpha).unwrap();
        let result = verify_invariance_transfer(&g, &lazy, &alpha, &beta).unwrap();
        assert!(result.is_ok());
    }
}
