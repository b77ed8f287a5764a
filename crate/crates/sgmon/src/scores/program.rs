//! Per-profile score LPs and the enumeration over Markov action domains.
//!
//! The across-state feasibility family — one inequality per state subset,
//! permutation, and signal assignment — is linearized with auxiliary edge
//! variables m_s(t) >= lambda . x_s(t,y) and one inequality per simple cycle
//! of the complete directed state graph. Permutations decompose into
//! disjoint cycles and the signal supremum is attained coordinatewise, so
//! the reduction is exact; the acceptance suite cross-checks it against a
//! direct enumeration oracle.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use exactlp::{solve, LpOutcome, LpProblem, Relation, Sense, VarBounds};

use crate::game::{
    joint_kernel, symmetrize_check, JointKernel, MonitoringStructure, StochasticGame,
    SymmetricGame, SymmetryViolation,
};
use crate::rat::{sum, Rational};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("direction lambda must be nonzero")]
    ZeroDirection,
    #[error("direction has wrong dimension for the mode")]
    BadDirection,
    #[error("game is not symmetric: {0:?}")]
    NotSymmetric(SymmetryViolation),
    #[error("mixture grid entry is not a distribution")]
    BadGrid,
    #[error("empty action domain")]
    EmptyActionDomain,
    #[error("score LP is unbounded for profile {profile:?}; the program promises finite scores")]
    UnboundedProgram { profile: Vec<usize> },
    #[error("game and kernel dimensions do not match")]
    DimensionMismatch,
    #[error("internal LP error: {0}")]
    Lp(#[from] exactlp::LpError),
}

/// Action domain of the score program.
#[derive(Debug, Clone)]
pub enum ScoreMode {
    /// All pure Markov profiles of the full game; vector payoffs.
    General,
    /// Strongly symmetric: per-state symmetric mixtures from a grid
    /// (scalar payoffs). The grid must contain rational distributions
    /// over the common action set.
    StronglySymmetric { grid: Vec<Vec<Rational>> },
    /// Pure strongly symmetric: per-state common pure actions.
    PureStronglySymmetric,
}

#[derive(Debug, Clone)]
pub struct ScoreProgramSpec {
    /// Direction weights: length N in general mode, a nonzero scalar in the
    /// strongly symmetric modes.
    pub lambda: Vec<Rational>,
    pub mode: ScoreMode,
}

impl ScoreProgramSpec {
    pub fn general(lambda: Vec<Rational>) -> Self {
        ScoreProgramSpec {
            lambda,
            mode: ScoreMode::General,
        }
    }

    pub fn pure_symmetric(lambda: Rational) -> Self {
        ScoreProgramSpec {
            lambda: vec![lambda],
            mode: ScoreMode::PureStronglySymmetric,
        }
    }

    pub fn symmetric_grid(lambda: Rational, grid: Vec<Vec<Rational>>) -> Self {
        ScoreProgramSpec {
            lambda: vec![lambda],
            mode: ScoreMode::StronglySymmetric { grid },
        }
    }
}

/// The supporting Markov action profile of a score solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkovProfile {
    /// One full action profile per state.
    Pure(Vec<usize>),
    /// One common action per state.
    SymPure(Vec<usize>),
    /// One symmetric mixture per state.
    SymMixed(Vec<Vec<Rational>>),
}

impl MarkovProfile {
    pub fn label(&self, game: &StochasticGame) -> String {
        match self {
            MarkovProfile::Pure(p) => p
                .iter()
                .map(|&a| {
                    let acts = game.profiles().decode(a);
                    acts.iter()
                        .enumerate()
                        .map(|(i, &ai)| game.actions[i][ai].clone())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join(" / "),
            MarkovProfile::SymPure(p) => p
                .iter()
                .map(|&b| game.actions[0][b].clone())
                .collect::<Vec<_>>()
                .join(" / "),
            MarkovProfile::SymMixed(p) => p
                .iter()
                .map(|mix| {
                    mix.iter()
                        .enumerate()
                        .map(|(b, w)| format!("{}:{}", game.actions[0][b], w))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join(" / "),
        }
    }
}

/// Optimal score with its certifying solution.
#[derive(Debug, Clone)]
pub struct ScoreSolution {
    pub lambda: Vec<Rational>,
    pub k: Rational,
    pub profile: MarkovProfile,
    /// Payoff vector (length N, or 1 in symmetric modes).
    pub v: Vec<Rational>,
    /// Increments x_s(t,y), indexed [state][outcome][payoff dim].
    pub x: Vec<Vec<Vec<Rational>>>,
    /// Auxiliary edge scores m_s(t) from the cycle linearization.
    pub m: Vec<Vec<Rational>>,
    /// Simple cycles whose edge-score sum is exactly zero.
    pub binding_cycles: Vec<Vec<usize>>,
    /// Which action domain the supremum was taken over.
    pub restriction: &'static str,
}

/// Result of the enumeration: a solved score or no feasible profile at all
/// (the minus-infinity marker of the program).
#[derive(Debug, Clone)]
pub enum ScoreOutcome {
    Solved(ScoreSolution),
    /// Every profile's LP is infeasible.
    NoFeasibleProfile,
}

impl ScoreOutcome {
    pub fn solution(&self) -> Option<&ScoreSolution> {
        match self {
            ScoreOutcome::Solved(s) => Some(s),
            ScoreOutcome::NoFeasibleProfile => None,
        }
    }

    pub fn k(&self) -> Option<&Rational> {
        self.solution().map(|s| &s.k)
    }
}

/// All simple cycles of the complete directed graph on n nodes, self-loops
/// included, each rotated to start at its smallest node.
pub fn simple_cycles(n: usize) -> Vec<Vec<usize>> {
    fn extend(cycle: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, out: &mut Vec<Vec<usize>>) {
        out.push(cycle.clone());
        let start = cycle[0];
        for next in (start + 1)..n {
            if !used[next] {
                used[next] = true;
                cycle.push(next);
                extend(cycle, used, n, out);
                cycle.pop();
                used[next] = false;
            }
        }
    }
    let mut out = Vec::new();
    for start in 0..n {
        let mut used = vec![false; n];
        used[start] = true;
        let mut cycle = vec![start];
        extend(&mut cycle, &mut used, n, &mut out);
    }
    out
}

/// One state's stage data for a fixed Markov profile: on-path payoff vector
/// and kernel column, plus one entry per deviation.
pub(crate) struct StageData {
    pub u: Vec<Rational>,
    pub dist: Vec<Rational>,
    /// (payoff dimension, deviation payoff, deviation kernel column)
    pub deviations: Vec<(usize, Rational, Vec<Rational>)>,
}

pub(crate) struct ProfileData {
    pub n_obj: usize,
    pub stages: Vec<StageData>,
}

fn pure_profile_data(
    game: &StochasticGame,
    kernel: &JointKernel,
    profile: &[usize],
) -> ProfileData {
    let n = game.n_players();
    let stages = (0..game.n_states())
        .map(|s| {
            let a = profile[s];
            let u: Vec<Rational> = (0..n).map(|i| game.payoff(i, s, a).clone()).collect();
            let dist = kernel.column(s, a).to_vec();
            let acts = game.profiles().decode(a);
            let mut deviations = Vec::new();
            for (i, &ai) in acts.iter().enumerate() {
                for alt in 0..game.actions[i].len() {
                    if alt == ai {
                        continue;
                    }
                    let dev = game.profiles().deviate(a, i, alt);
                    deviations.push((
                        i,
                        game.payoff(i, s, dev).clone(),
                        kernel.column(s, dev).to_vec(),
                    ));
                }
            }
            StageData { u, dist, deviations }
        })
        .collect();
    ProfileData { n_obj: n, stages }
}

fn sym_profile_data(
    sym: &SymmetricGame,
    kernel: &JointKernel,
    mixtures: &[Vec<Rational>],
) -> ProfileData {
    let n_b = sym.n_actions();
    let stages = (0..sym.game().n_states())
        .map(|s| {
            let alpha = &mixtures[s];
            let on_path = sym.sym_mixture_weights(alpha);
            let u = vec![sym.u_sym_mixed(alpha, s)];
            let dist = kernel.mixed_column(s, &on_path);
            let pure = alpha.iter().position(|w| w.is_one());
            let mut deviations = Vec::new();
            for b_dev in 0..n_b {
                // For a pure symmetric action the own-action row equals the
                // on-path equality; skip it.
                if pure == Some(b_dev) {
                    continue;
                }
                let w = sym.dev_mixture_weights(b_dev, alpha);
                deviations.push((
                    0,
                    sym.u_dev_mixed(b_dev, alpha, s),
                    kernel.mixed_column(s, &w),
                ));
            }
            StageData { u, dist, deviations }
        })
        .collect();
    ProfileData { n_obj: 1, stages }
}

pub(crate) struct ProfileLpSolution {
    pub k: Rational,
    pub v: Vec<Rational>,
    pub x: Vec<Vec<Vec<Rational>>>,
    pub m: Vec<Vec<Rational>>,
}

/// Builds and solves the LP for one profile: equalities (adding-up), the
/// incentive rows, the edge-score linearization, and one row per simple
/// cycle. Outcomes never reached under any relevant action carry no
/// variables; they are filled in afterwards so the returned increments
/// satisfy the full constraint family.
pub(crate) fn solve_profile_lp(
    data: &ProfileData,
    lambda: &[Rational],
    kernel: &JointKernel,
    cycles: &[Vec<usize>],
    extra: Option<&mut dyn FnMut(&mut LpProblem, &LpVars)>,
) -> Result<Option<ProfileLpSolution>, ScoreError> {
    let n_states = kernel.n_states();
    let n_out = kernel.outcome_count();
    let ny = kernel.n_signals();
    let n_obj = data.n_obj;

    let mut lp = LpProblem::new();
    let v: Vec<_> = (0..n_obj)
        .map(|i| lp.add_var(format!("v_{i}"), VarBounds::free()))
        .collect();
    // x variables only where some relevant action gives the outcome mass
    let mut x = vec![vec![None; n_out]; n_states];
    for (s, stage) in data.stages.iter().enumerate() {
        for o in 0..n_out {
            let reached = !stage.dist[o].is_zero()
                || stage.deviations.iter().any(|(_, _, d)| !d[o].is_zero());
            if reached {
                x[s][o] = Some(
                    (0..n_obj)
                        .map(|i| lp.add_var(format!("x_{s}_{o}_{i}"), VarBounds::free()))
                        .collect::<Vec<_>>(),
                );
            }
        }
    }
    let m: Vec<Vec<_>> = (0..n_states)
        .map(|s| {
            (0..n_states)
                .map(|t| lp.add_var(format!("m_{s}_{t}"), VarBounds::free()))
                .collect()
        })
        .collect();

    // Adding-up equalities: v_i = u_i + sum_o x_i(o) p(o).
    for (s, stage) in data.stages.iter().enumerate() {
        for i in 0..n_obj {
            let mut coeffs = vec![(v[i], Rational::one())];
            for o in 0..n_out {
                if stage.dist[o].is_zero() {
                    continue;
                }
                if let Some(xv) = &x[s][o] {
                    coeffs.push((xv[i], -stage.dist[o].clone()));
                }
            }
            lp.add_constraint(&coeffs, Relation::Eq, stage.u[i].clone());
        }
    }
    // Incentive rows: v_i >= u_dev + sum_o x_i(o) p_dev(o).
    for (s, stage) in data.stages.iter().enumerate() {
        for (i, u_dev, dist) in &stage.deviations {
            let mut coeffs = vec![(v[*i], Rational::one())];
            for o in 0..n_out {
                if dist[o].is_zero() {
                    continue;
                }
                if let Some(xv) = &x[s][o] {
                    coeffs.push((xv[*i], -dist[o].clone()));
                }
            }
            lp.add_constraint(&coeffs, Relation::Ge, u_dev.clone());
        }
    }
    // Edge scores dominate the direction-weighted increments.
    for s in 0..n_states {
        for o in 0..n_out {
            if let Some(xv) = &x[s][o] {
                let t = o / ny;
                let mut coeffs: Vec<_> = (0..n_obj)
                    .filter(|i| !lambda[*i].is_zero())
                    .map(|i| (xv[i], lambda[i].clone()))
                    .collect();
                coeffs.push((m[s][t], -Rational::one()));
                lp.add_constraint(&coeffs, Relation::Le, Rational::zero());
            }
        }
    }
    // Cycle feasibility.
    for cycle in cycles {
        let len = cycle.len();
        let coeffs: Vec<_> = (0..len)
            .map(|i| (m[cycle[i]][cycle[(i + 1) % len]], Rational::one()))
            .collect();
        lp.add_constraint(&coeffs, Relation::Le, Rational::zero());
    }

    let obj: Vec<_> = (0..n_obj)
        .filter(|i| !lambda[*i].is_zero())
        .map(|i| (v[i], lambda[i].clone()))
        .collect();
    lp.set_objective(Sense::Maximize, &obj);

    let vars = LpVars { v: &v, x: &x, m: &m };
    if let Some(f) = extra {
        f(&mut lp, &vars);
    }

    match solve(&lp)? {
        LpOutcome::Optimal {
            primal, objective, ..
        } => {
            let lambda_norm: Rational = lambda
                .iter()
                .map(|l| l * l)
                .fold(Rational::zero(), |a, b| a + b);
            let m_vals: Vec<Vec<Rational>> = m
                .iter()
                .map(|row| row.iter().map(|&mv| primal[mv].clone()).collect())
                .collect();
            let mut x_vals = vec![vec![vec![Rational::zero(); n_obj]; n_out]; n_states];
            for s in 0..n_states {
                // Fill solved outcomes first.
                for o in 0..n_out {
                    if let Some(xv) = &x[s][o] {
                        for i in 0..n_obj {
                            x_vals[s][o][i] = primal[xv[i]].clone();
                        }
                    }
                }
                // Unreached outcomes copy the best reached increment for
                // their next state, or take the m-aligned direction vector
                // when the whole edge is unreached.
                for t in 0..n_states {
                    let reached: Vec<usize> = (0..ny)
                        .map(|y| t * ny + y)
                        .filter(|&o| x[s][o].is_some())
                        .collect();
                    let fill: Vec<Rational> = if let Some(&best) = reached.iter().max_by(|&&a, &&b| {
                        lam_dot(lambda, &x_vals[s][a]).cmp(&lam_dot(lambda, &x_vals[s][b]))
                    }) {
                        x_vals[s][best].clone()
                    } else {
                        lambda
                            .iter()
                            .map(|l| l * &m_vals[s][t] / &lambda_norm)
                            .collect()
                    };
                    for y in 0..ny {
                        let o = t * ny + y;
                        if x[s][o].is_none() {
                            x_vals[s][o] = fill.clone();
                        }
                    }
                }
            }
            Ok(Some(ProfileLpSolution {
                k: objective,
                v: v.iter().map(|&vv| primal[vv].clone()).collect(),
                x: x_vals,
                m: m_vals,
            }))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => Err(ScoreError::UnboundedProgram { profile: vec![] }),
    }
}

/// Handles into the per-profile LP, for secondary objectives.
pub(crate) struct LpVars<'a> {
    pub v: &'a [usize],
    pub x: &'a [Vec<Option<Vec<usize>>>],
    pub m: &'a [Vec<usize>],
}

pub(crate) fn lam_dot(lambda: &[Rational], x: &[Rational]) -> Rational {
    lambda
        .iter()
        .zip(x)
        .map(|(l, v)| l * v)
        .fold(Rational::zero(), |a, b| a + b)
}

/// Edge scores of a solution: l_s(t) = max_y lambda . x_s(t,y).
pub(crate) fn edge_scores(
    lambda: &[Rational],
    x: &[Vec<Vec<Rational>>],
    n_states: usize,
    ny: usize,
) -> Vec<Vec<Rational>> {
    (0..n_states)
        .map(|s| {
            (0..n_states)
                .map(|t| {
                    (0..ny)
                        .map(|y| lam_dot(lambda, &x[s][t * ny + y]))
                        .max()
                        .expect("at least one signal")
                })
                .collect()
        })
        .collect()
}

/// Binding simple cycles: edge-score sum exactly zero.
pub(crate) fn binding_cycles(
    scores: &[Vec<Rational>],
    cycles: &[Vec<usize>],
) -> Vec<Vec<usize>> {
    cycles
        .iter()
        .filter(|cycle| {
            let len = cycle.len();
            let total: Rational = (0..len)
                .map(|i| scores[cycle[i]][cycle[(i + 1) % len]].clone())
                .fold(Rational::zero(), |a, b| a + b);
            total.is_zero()
        })
        .cloned()
        .collect()
}

/// Enumerates the action domain of a spec.
pub(crate) fn action_domain(
    game: &StochasticGame,
    spec: &ScoreProgramSpec,
) -> Result<Vec<MarkovProfile>, ScoreError> {
    let n_states = game.n_states();
    let enumerate = |choices: usize| -> Vec<Vec<usize>> {
        let total = choices.pow(n_states as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0; n_states];
                for slot in p.iter_mut().rev() {
                    *slot = idx % choices;
                    idx /= choices;
                }
                p
            })
            .collect()
    };
    Ok(match &spec.mode {
        ScoreMode::General => enumerate(game.profiles().total())
            .into_iter()
            .map(MarkovProfile::Pure)
            .collect(),
        ScoreMode::PureStronglySymmetric => enumerate(game.actions[0].len())
            .into_iter()
            .map(MarkovProfile::SymPure)
            .collect(),
        ScoreMode::StronglySymmetric { grid } => {
            if grid.is_empty() {
                return Err(ScoreError::EmptyActionDomain);
            }
            for mix in grid {
                if mix.len() != game.actions[0].len()
                    || mix.iter().any(Rational::is_negative)
                    || !sum(mix).is_one()
                {
                    return Err(ScoreError::BadGrid);
                }
            }
            enumerate(grid.len())
                .into_iter()
                .map(|choice| {
                    MarkovProfile::SymMixed(
                        choice.into_iter().map(|g| grid[g].clone()).collect(),
                    )
                })
                .collect()
        }
    })
}

fn validate_spec(game: &StochasticGame, spec: &ScoreProgramSpec) -> Result<(), ScoreError> {
    if spec.lambda.iter().all(Rational::is_zero) {
        return Err(ScoreError::ZeroDirection);
    }
    let want = match spec.mode {
        ScoreMode::General => game.n_players(),
        _ => 1,
    };
    if spec.lambda.len() != want {
        return Err(ScoreError::BadDirection);
    }
    Ok(())
}

pub(crate) fn profile_data_for(
    game: &StochasticGame,
    sym: Option<&SymmetricGame>,
    kernel: &JointKernel,
    profile: &MarkovProfile,
) -> ProfileData {
    match profile {
        MarkovProfile::Pure(p) => pure_profile_data(game, kernel, p),
        MarkovProfile::SymPure(p) => {
            let sym = sym.expect("symmetric view required");
            let mixtures: Vec<Vec<Rational>> = p
                .iter()
                .map(|&b| {
                    let mut mix = vec![Rational::zero(); sym.n_actions()];
                    mix[b] = Rational::one();
                    mix
                })
                .collect();
            sym_profile_data(sym, kernel, &mixtures)
        }
        MarkovProfile::SymMixed(mix) => {
            let sym = sym.expect("symmetric view required");
            sym_profile_data(sym, kernel, mix)
        }
    }
}

/// Computes the score program on an explicit kernel. The kernel must share
/// the game's state and profile dimensions but may have any signal set.
pub fn solve_score(
    game: &StochasticGame,
    kernel: &JointKernel,
    spec: &ScoreProgramSpec,
) -> Result<ScoreOutcome, ScoreError> {
    validate_spec(game, spec)?;
    if kernel.n_states() != game.n_states() || kernel.n_profiles() != game.profiles().total() {
        return Err(ScoreError::DimensionMismatch);
    }
    let sym = match spec.mode {
        ScoreMode::General => None,
        _ => {
            let s = SymmetricGame::new(game.clone())
                .map_err(|_| ScoreError::EmptyActionDomain)?;
            symmetrize_check(&s, &[]).map_err(ScoreError::NotSymmetric)?;
            Some(s)
        }
    };
    let restriction = match spec.mode {
        ScoreMode::General => "pure Markov profiles",
        ScoreMode::PureStronglySymmetric => "pure symmetric Markov profiles",
        ScoreMode::StronglySymmetric { .. } => "symmetric mixture grid",
    };
    let domain = action_domain(game, spec)?;
    if domain.is_empty() {
        return Err(ScoreError::EmptyActionDomain);
    }
    let cycles = simple_cycles(game.n_states());

    let results: Vec<Result<Option<ProfileLpSolution>, ScoreError>> = domain
        .par_iter()
        .map(|profile| {
            let data = profile_data_for(game, sym.as_ref(), kernel, profile);
            solve_profile_lp(&data, &spec.lambda, kernel, &cycles, None)
        })
        .collect();

    let mut best: Option<(usize, ProfileLpSolution)> = None;
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(Some(sol)) => {
                let better = match &best {
                    None => true,
                    Some((_, b)) => sol.k > b.k,
                };
                if better {
                    best = Some((idx, sol));
                }
            }
            Ok(None) => {}
            Err(ScoreError::UnboundedProgram { .. }) => {
                let profile = match &domain[idx] {
                    MarkovProfile::Pure(p) | MarkovProfile::SymPure(p) => p.clone(),
                    MarkovProfile::SymMixed(_) => vec![],
                };
                return Err(ScoreError::UnboundedProgram { profile });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(match best {
        None => ScoreOutcome::NoFeasibleProfile,
        Some((idx, sol)) => {
            let scores = edge_scores(&spec.lambda, &sol.x, game.n_states(), kernel.n_signals());
            let binding = binding_cycles(&scores, &cycles);
            ScoreOutcome::Solved(ScoreSolution {
                lambda: spec.lambda.clone(),
                k: sol.k,
                profile: domain[idx].clone(),
                v: sol.v,
                x: sol.x,
                m: sol.m,
                binding_cycles: binding,
                restriction,
            })
        }
    })
}

/// Convenience wrapper building the kernel from a monitoring structure.
pub fn solve_score_mon(
    game: &StochasticGame,
    mon: &MonitoringStructure,
    spec: &ScoreProgramSpec,
) -> Result<ScoreOutcome, ScoreError> {
    let kernel = joint_kernel(game, mon).map_err(|_| ScoreError::DimensionMismatch)?;
    solve_score(game, &kernel, spec)
}

/// The strongly symmetric payoff interval [-k(-1), k(+1)].
#[derive(Debug, Clone)]
pub struct SseInterval {
    pub lower: Rational,
    pub upper: Rational,
    /// Set when some direction admits no feasible profile at all.
    pub degenerate: bool,
    /// lower > upper: the intersection of the payoff sets is empty.
    pub empty: bool,
}

/// Computes the interval together with its two certifying solutions
/// (for lambda = -1 and +1).
pub fn sse_interval_solutions(
    game: &StochasticGame,
    kernel: &JointKernel,
    mode: ScoreMode,
) -> Result<(SseInterval, Option<ScoreOutcome>, Option<ScoreOutcome>), ScoreError> {
    let minus = solve_score(
        game,
        kernel,
        &ScoreProgramSpec {
            lambda: vec![-Rational::one()],
            mode: mode.clone(),
        },
    )?;
    let plus = solve_score(
        game,
        kernel,
        &ScoreProgramSpec {
            lambda: vec![Rational::one()],
            mode,
        },
    )?;
    let (lower, upper, degenerate) = match (minus.k(), plus.k()) {
        (Some(km), Some(kp)) => (-km.clone(), kp.clone(), false),
        _ => (Rational::zero(), Rational::zero(), true),
    };
    let empty = degenerate || lower > upper;
    Ok((
        SseInterval {
            lower,
            upper,
            degenerate,
            empty,
        },
        Some(minus),
        Some(plus),
    ))
}

/// The interval alone.
pub fn sse_interval(
    game: &StochasticGame,
    kernel: &JointKernel,
    mode: ScoreMode,
) -> Result<SseInterval, ScoreError> {
    let (interval, _, _) = sse_interval_solutions(game, kernel, mode)?;
    Ok(interval)
}
