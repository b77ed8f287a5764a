//! Data model for finite stochastic games with imperfect public monitoring:
//! games, monitoring structures, induced joint kernels, and symmetric views.

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::{sum, Rational};

/// Dense indexing of action profiles: mixed-radix over per-player actions,
/// last player fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpace {
    sizes: Vec<usize>,
    total: usize,
}

impl ProfileSpace {
    pub fn new(sizes: Vec<usize>) -> Self {
        let total = sizes.iter().product();
        ProfileSpace { sizes, total }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn index(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.sizes.len());
        let mut idx = 0;
        for (a, n) in actions.iter().zip(&self.sizes) {
            debug_assert!(a < n);
            idx = idx * n + a;
        }
        idx
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, n) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = idx % n;
            idx /= n;
        }
        out
    }

    /// Profile with player `i`'s action replaced.
    pub fn deviate(&self, profile: usize, player: usize, action: usize) -> usize {
        let mut acts = self.decode(profile);
        acts[player] = action;
        self.index(&acts)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        0..self.total
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("payoff table for player {player} has wrong shape")]
    PayoffShape { player: usize },
    #[error("transition table has wrong shape")]
    TransitionShape,
    #[error("monitoring law has wrong shape")]
    MonitoringShape,
    #[error("signal set is empty")]
    NoSignals,
    #[error("game needs at least one state, player, and action per player")]
    EmptySets,
    #[error("game and monitoring structure dimensions do not match")]
    DimensionMismatch,
    #[error("players have different action sets; no symmetric view")]
    AsymmetricActionSets,
}

/// A finite stochastic game: states, players, per-player actions, stage
/// payoffs u_i(a, s), and a transition law q(t | s, a).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticGame {
    pub states: Vec<String>,
    pub players: Vec<String>,
    pub actions: Vec<Vec<String>>,
    payoff: Vec<Vec<Vec<Rational>>>,
    transition: Vec<Vec<Vec<Rational>>>,
    profiles: ProfileSpace,
}

impl StochasticGame {
    /// `payoff[i][s][a]`, `transition[s][a][t]` with `a` a profile index.
    pub fn new(
        states: Vec<String>,
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        payoff: Vec<Vec<Vec<Rational>>>,
        transition: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self, GameError> {
        if states.is_empty() || players.is_empty() || actions.iter().any(|a| a.is_empty()) {
            return Err(GameError::EmptySets);
        }
        if actions.len() != players.len() {
            return Err(GameError::EmptySets);
        }
        let profiles = ProfileSpace::new(actions.iter().map(|a| a.len()).collect());
        if payoff.len() != players.len() {
            return Err(GameError::PayoffShape { player: 0 });
        }
        for (i, per_state) in payoff.iter().enumerate() {
            if per_state.len() != states.len()
                || per_state.iter().any(|row| row.len() != profiles.total())
            {
                return Err(GameError::PayoffShape { player: i });
            }
        }
        if transition.len() != states.len()
            || transition
                .iter()
                .any(|per_a| per_a.len() != profiles.total())
            || transition
                .iter()
                .any(|per_a| per_a.iter().any(|row| row.len() != states.len()))
        {
            return Err(GameError::TransitionShape);
        }
        Ok(StochasticGame {
            states,
            players,
            actions,
            payoff,
            transition,
            profiles,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn profiles(&self) -> &ProfileSpace {
        &self.profiles
    }

    pub fn payoff(&self, player: usize, state: usize, profile: usize) -> &Rational {
        &self.payoff[player][state][profile]
    }

    pub fn transition(&self, state: usize, profile: usize, next: usize) -> &Rational {
        &self.transition[state][profile][next]
    }

    pub fn transition_row(&self, state: usize, profile: usize) -> &[Rational] {
        &self.transition[state][profile]
    }

    /// Whether q(.|s,a) is the same for every profile a at every state.
    pub fn has_action_independent_transition(&self) -> bool {
        self.transition.iter().all(|per_a| {
            per_a
                .iter()
                .all(|row| row == &per_a[0])
        })
    }

    /// Expected payoff of player `i` when players randomize independently
    /// with the given per-player mixtures.
    pub fn mixture_weights(&self, mixtures: &[Vec<Rational>]) -> Vec<(usize, Rational)> {
        debug_assert_eq!(mixtures.len(), self.n_players());
        let mut out = Vec::new();
        for a in self.profiles.iter() {
            let acts = self.profiles.decode(a);
            let mut w = Rational::one();
            for (i, &ai) in acts.iter().enumerate() {
                w *= &mixtures[i][ai];
                if w.is_zero() {
                    break;
                }
            }
            if !w.is_zero() {
                out.push((a, w));
            }
        }
        out
    }

    /// Whether `profile` is a stage-game Nash equilibrium at `state`.
    pub fn is_stage_nash(&self, state: usize, profile: usize) -> bool {
        let acts = self.profiles.decode(profile);
        for (i, &ai) in acts.iter().enumerate() {
            let here = self.payoff(i, state, profile);
            for alt in 0..self.actions[i].len() {
                if alt == ai {
                    continue;
                }
                let dev = self.profiles.deviate(profile, i, alt);
                if self.payoff(i, state, dev) > here {
                    return false;
                }
            }
        }
        true
    }
}

/// A public monitoring structure: signal alphabet Y and law f(y | t, s, a).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitoringStructure {
    pub signals: Vec<String>,
    law: Vec<Vec<Vec<Vec<Rational>>>>,
}

impl MonitoringStructure {
    /// `law[s][a][t][y]`.
    pub fn new(
        signals: Vec<String>,
        law: Vec<Vec<Vec<Vec<Rational>>>>,
    ) -> Result<Self, GameError> {
        if signals.is_empty() {
            return Err(GameError::NoSignals);
        }
        let ny = signals.len();
        if law.is_empty()
            || law.iter().any(|per_a| {
                per_a.is_empty()
                    || per_a
                        .iter()
                        .any(|per_t| per_t.iter().any(|row| row.len() != ny))
            })
        {
            return Err(GameError::MonitoringShape);
        }
        Ok(MonitoringStructure { signals, law })
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn f(&self, state: usize, profile: usize, next: usize, signal: usize) -> &Rational {
        &self.law[state][profile][next][signal]
    }

    pub fn signal_row(&self, state: usize, profile: usize, next: usize) -> &[Rational] {
        &self.law[state][profile][next]
    }

    fn matches(&self, game: &StochasticGame) -> bool {
        self.law.len() == game.n_states()
            && self.law.iter().all(|per_a| {
                per_a.len() == game.profiles().total()
                    && per_a.iter().all(|per_t| per_t.len() == game.n_states())
            })
    }
}

/// Joint law of (next state, public signal) given (state, action profile).
/// Outcomes are flattened as `t * n_signals + y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointKernel {
    pub signals: Vec<String>,
    n_states: usize,
    n_profiles: usize,
    probs: Vec<Vec<Vec<Rational>>>,
}

impl JointKernel {
    pub fn from_table(
        signals: Vec<String>,
        n_states: usize,
        probs: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self, GameError> {
        let ny = signals.len();
        if probs.len() != n_states {
            return Err(GameError::DimensionMismatch);
        }
        let n_profiles = probs.first().map(|p| p.len()).unwrap_or(0);
        for per_a in &probs {
            if per_a.len() != n_profiles
                || per_a.iter().any(|col| col.len() != n_states * ny)
            {
                return Err(GameError::DimensionMismatch);
            }
        }
        Ok(JointKernel {
            signals,
            n_states,
            n_profiles,
            probs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_profiles(&self) -> usize {
        self.n_profiles
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn outcome_count(&self) -> usize {
        self.n_states * self.signals.len()
    }

    pub fn outcome(&self, next: usize, signal: usize) -> usize {
        next * self.signals.len() + signal
    }

    pub fn outcome_parts(&self, outcome: usize) -> (usize, usize) {
        (outcome / self.signals.len(), outcome % self.signals.len())
    }

    pub fn prob(&self, state: usize, profile: usize, next: usize, signal: usize) -> &Rational {
        &self.probs[state][profile][self.outcome(next, signal)]
    }

    pub fn column(&self, state: usize, profile: usize) -> &[Rational] {
        &self.probs[state][profile]
    }

    /// Kernel column under a profile mixture, as (profile, weight) pairs.
    pub fn mixed_column(&self, state: usize, weights: &[(usize, Rational)]) -> Vec<Rational> {
        let mut col = vec![Rational::zero(); self.outcome_count()];
        for (a, w) in weights {
            for (c, p) in col.iter_mut().zip(self.column(state, *a)) {
                if !p.is_zero() {
                    *c += w * p;
                }
            }
        }
        col
    }

    /// Marginal over signals: recovers the transition law.
    pub fn next_state_marginal(&self, state: usize, profile: usize) -> Vec<Rational> {
        let ny = self.signals.len();
        (0..self.n_states)
            .map(|t| sum(&self.probs[state][profile][t * ny..(t + 1) * ny]))
            .collect()
    }
}

/// A violated probabilistic invariant, reported as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TransitionRowSum {
        state: usize,
        profile: usize,
        total: Rational,
    },
    TransitionNegative {
        state: usize,
        profile: usize,
        next: usize,
    },
    MonitoringRowSum {
        state: usize,
        profile: usize,
        next: usize,
        total: Rational,
    },
    MonitoringNegative {
        state: usize,
        profile: usize,
        next: usize,
        signal: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TransitionRowSum {
                state,
                profile,
                total,
            } => write!(f, "q(.|s{state},a{profile}) sums to {total}, not 1"),
            Violation::TransitionNegative {
                state,
                profile,
                next,
            } => write!(f, "q(t{next}|s{state},a{profile}) is negative"),
            Violation::MonitoringRowSum {
                state,
                profile,
                next,
                total,
            } => write!(f, "f(.|t{next},s{state},a{profile}) sums to {total}, not 1"),
            Violation::MonitoringNegative {
                state,
                profile,
                next,
                signal,
            } => write!(f, "f(y{signal}|t{next},s{state},a{profile}) is negative"),
        }
    }
}

/// Checks exact row normalization and nonnegativity of the transition law.
/// Violations are data, not errors: every offending index is reported.
pub fn validate_game(game: &StochasticGame) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in 0..game.n_states() {
        for a in game.profiles().iter() {
            let row = game.transition_row(s, a);
            for (t, q) in row.iter().enumerate() {
                if q.is_negative() {
                    out.push(Violation::TransitionNegative {
                        state: s,
                        profile: a,
                        next: t,
                    });
                }
            }
            let total = sum(row);
            if !total.is_one() {
                out.push(Violation::TransitionRowSum {
                    state: s,
                    profile: a,
                    total,
                });
            }
        }
    }
    out
}

/// Checks exact row normalization and nonnegativity of a monitoring law
/// against the game's dimensions.
pub fn validate_monitoring(game: &StochasticGame, mon: &MonitoringStructure) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in 0..game.n_states() {
        for a in game.profiles().iter() {
            for t in 0..game.n_states() {
                let row = mon.signal_row(s, a, t);
                for (y, v) in row.iter().enumerate() {
                    if v.is_negative() {
                        out.push(Violation::MonitoringNegative {
                            state: s,
                            profile: a,
                            next: t,
                            signal: y,
                        });
                    }
                }
                let total = sum(row);
                if !total.is_one() {
                    out.push(Violation::MonitoringRowSum {
                        state: s,
                        profile: a,
                        next: t,
                        total,
                    });
                }
            }
        }
    }
    out
}

/// Induced joint kernel p(t,y|s,a) = q(t|s,a) f(y|t,s,a), exactly.
pub fn joint_kernel(
    game: &StochasticGame,
    mon: &MonitoringStructure,
) -> Result<JointKernel, GameError> {
    if !mon.matches(game) {
        return Err(GameError::DimensionMismatch);
    }
    let ny = mon.n_signals();
    let probs = (0..game.n_states())
        .map(|s| {
            game.profiles()
                .iter()
                .map(|a| {
                    let mut col = Vec::with_capacity(game.n_states() * ny);
                    for t in 0..game.n_states() {
                        let q = game.transition(s, a, t);
                        for y in 0..ny {
                            col.push(q * mon.f(s, a, t, y));
                        }
                    }
                    col
                })
                .collect()
        })
        .collect();
    JointKernel::from_table(mon.signals.clone(), game.n_states(), probs)
}

/// Symmetric view of a game whose players share a common action set.
#[derive(Debug, Clone)]
pub struct SymmetricGame {
    game: StochasticGame,
    pub common_actions: Vec<String>,
}

/// First symmetry violation found, with the offending permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryViolation {
    pub permutation: Vec<usize>,
    pub condition: &'static str,
    pub state: usize,
    pub profile: usize,
}

impl SymmetricGame {
    pub fn new(game: StochasticGame) -> Result<Self, GameError> {
        let first = game.actions[0].clone();
        if game.actions.iter().any(|a| a != &first) {
            return Err(GameError::AsymmetricActionSets);
        }
        Ok(SymmetricGame {
            game,
            common_actions: first,
        })
    }

    pub fn game(&self) -> &StochasticGame {
        &self.game
    }

    pub fn n_actions(&self) -> usize {
        self.common_actions.len()
    }

    pub fn n_players(&self) -> usize {
        self.game.n_players()
    }

    /// Profile where every player plays `b`.
    pub fn sym_profile(&self, b: usize) -> usize {
        let acts = vec![b; self.game.n_players()];
        self.game.profiles().index(&acts)
    }

    /// Profile where player 0 deviates to `b_dev` against `b`.
    pub fn dev_profile(&self, b_dev: usize, b: usize) -> usize {
        let mut acts = vec![b; self.game.n_players()];
        acts[0] = b_dev;
        self.game.profiles().index(&acts)
    }

    /// Common payoff u(b, s) when everyone plays `b`.
    pub fn u_sym(&self, b: usize, state: usize) -> &Rational {
        self.game.payoff(0, state, self.sym_profile(b))
    }

    /// Deviator's payoff u(b_dev / b, s).
    pub fn u_dev(&self, b_dev: usize, b: usize, state: usize) -> &Rational {
        self.game.payoff(0, state, self.dev_profile(b_dev, b))
    }

    /// Profile weights when every player mixes `alpha` over the common set.
    pub fn sym_mixture_weights(&self, alpha: &[Rational]) -> Vec<(usize, Rational)> {
        let mixtures = vec![alpha.to_vec(); self.game.n_players()];
        self.game.mixture_weights(&mixtures)
    }

    /// Profile weights when player 0 plays `b_dev` and the rest mix `alpha`.
    pub fn dev_mixture_weights(&self, b_dev: usize, alpha: &[Rational]) -> Vec<(usize, Rational)> {
        let mut mixtures = vec![alpha.to_vec(); self.game.n_players()];
        let mut pure = vec![Rational::zero(); self.n_actions()];
        pure[b_dev] = Rational::one();
        mixtures[0] = pure;
        self.game.mixture_weights(&mixtures)
    }

    /// Expected common payoff under a symmetric mixture.
    pub fn u_sym_mixed(&self, alpha: &[Rational], state: usize) -> Rational {
        self.sym_mixture_weights(alpha)
            .iter()
            .map(|(a, w)| w * self.game.payoff(0, state, *a))
            .fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Deviator's expected payoff against a symmetric mixture.
    pub fn u_dev_mixed(&self, b_dev: usize, alpha: &[Rational], state: usize) -> Rational {
        self.dev_mixture_weights(b_dev, alpha)
            .iter()
            .map(|(a, w)| w * self.game.payoff(0, state, *a))
            .fold(Rational::zero(), |acc, v| acc + v)
    }
}

/// Exhaustively verifies the symmetry conditions: common action sets,
/// permutation-invariant payoffs, transition law, and monitoring laws.
pub fn symmetrize_check(
    sym: &SymmetricGame,
    monitors: &[&MonitoringStructure],
) -> Result<(), SymmetryViolation> {
    let game = sym.game();
    let n = game.n_players();
    let space = game.profiles();
    for perm in (0..n).permutations(n) {
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            continue;
        }
        for s in 0..game.n_states() {
            for a in space.iter() {
                let acts = space.decode(a);
                // permuted profile: player j plays what player perm[j] played
                let permuted: Vec<usize> = (0..n).map(|j| acts[perm[j]]).collect();
                let pa = space.index(&permuted);
                for i in 0..n {
                    if game.payoff(perm[i], s, pa) != game.payoff(i, s, a) {
                        return Err(SymmetryViolation {
                            permutation: perm.clone(),
                            condition: "payoff",
                            state: s,
                            profile: a,
                        });
                    }
                }
                if game.transition_row(s, pa) != game.transition_row(s, a) {
                    return Err(SymmetryViolation {
                        permutation: perm.clone(),
                        condition: "transition",
                        state: s,
                        profile: a,
                    });
                }
                for (m, mon) in monitors.iter().enumerate() {
                    for t in 0..game.n_states() {
                        if mon.signal_row(s, pa, t) != mon.signal_row(s, a, t) {
                            let _ = m;
                            return Err(SymmetryViolation {
                                permutation: perm.clone(),
                                condition: "monitoring",
                                state: s,
                                profile: a,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
