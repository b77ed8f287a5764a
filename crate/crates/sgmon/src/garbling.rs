//! Deciders for the informativeness orders between monitoring structures:
//! ex-post, joint, weighted, strict weighted, and profile-restricted weighted
//! garbling, together with witness recovery and the constructive builders.
//!
//! Every order reduces to exact-rational LP feasibility in the linearized
//! channel variables psi(t,y; t',y') = gamma^{t',y'} phi(t,y|t',y'): the
//! reproduction equations are linear in psi, and any feasible psi decomposes
//! back into weights and a channel.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use exactlp::{solve, FarkasCertificate, LpOutcome, LpProblem, Relation, Sense, VarBounds};

use crate::game::{JointKernel, MonitoringStructure, ProfileSpace, StochasticGame, SymmetricGame};
use crate::rat::{likelihood_ratio, rat, sum, ExtRational, Rational};

#[derive(Debug, Error)]
pub enum GarblingError {
    #[error("kernels have mismatched state or action dimensions")]
    DimensionMismatch,
    #[error("transition law must be action-independent")]
    ActionDependentTransition,
    #[error("state map sends {from} to {to}, outside the transition support")]
    MapOutsideSupport { from: usize, to: usize },
    #[error("conditional witness at (s{state}, t{next}) fails its equation: {detail}")]
    BadConditionalWitness {
        state: usize,
        next: usize,
        detail: String,
    },
    #[error("source structure is uninformative at state {state}")]
    Uninformative { state: usize },
    #[error("internal LP error: {0}")]
    Lp(#[from] exactlp::LpError),
}

/// Per-state weights and channel certifying one state's reproduction
/// equations. `gamma[src]` are the weights over source outcomes; `phi[src]`
/// is a distribution over target outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateChannel {
    pub gamma: Vec<Rational>,
    pub phi: Vec<Vec<Rational>>,
}

impl StateChannel {
    /// gamma[src] = column mass of psi; phi = psi/gamma, uniform when zero.
    pub fn from_psi(psi: &[Vec<Rational>], n_targets: usize) -> Self {
        let uniform = Rational::new(1.into(), (n_targets as i64).into());
        let mut gamma = Vec::with_capacity(psi.len());
        let mut phi = Vec::with_capacity(psi.len());
        for col in psi {
            let g = sum(col);
            if g.is_zero() {
                phi.push(vec![uniform.clone(); n_targets]);
            } else {
                phi.push(col.iter().map(|v| v / &g).collect());
            }
            gamma.push(g);
        }
        StateChannel { gamma, phi }
    }

    pub fn psi(&self) -> Vec<Vec<Rational>> {
        self.phi
            .iter()
            .zip(&self.gamma)
            .map(|(col, g)| col.iter().map(|v| v * g).collect())
            .collect()
    }

    /// Common support of all channel columns, when they agree; `None` if
    /// two columns have different supports.
    pub fn common_support(&self) -> Option<Vec<usize>> {
        let mut supports = self.phi.iter().map(|col| {
            col.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(o, _)| o)
                .collect::<Vec<_>>()
        });
        let first = supports.next()?;
        if supports.all(|s| s == first) {
            Some(first)
        } else {
            None
        }
    }
}

/// Witness that one kernel is a weighted garbling of another: per state,
/// nonnegative weights and a channel reproducing every action's column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarblingWitness {
    pub per_state: Vec<StateChannel>,
}

impl GarblingWitness {
    /// Identity witness: unit weights, identity channel.
    pub fn identity(kern: &JointKernel) -> Self {
        let n = kern.outcome_count();
        let per_state = (0..kern.n_states())
            .map(|_| StateChannel {
                gamma: vec![Rational::one(); n],
                phi: (0..n)
                    .map(|src| {
                        let mut col = vec![Rational::zero(); n];
                        col[src] = Rational::one();
                        col
                    })
                    .collect(),
            })
            .collect();
        GarblingWitness { per_state }
    }

    /// Checks all witness invariants by exact substitution: nonnegative
    /// weights, stochastic channel columns, weight normalization under every
    /// action, and the reproduction equations.
    pub fn verify(&self, target: &JointKernel, source: &JointKernel) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.per_state.len() != target.n_states() {
            return Err(vec!["witness has wrong state count".into()]);
        }
        let n_tgt = target.outcome_count();
        let n_src = source.outcome_count();
        for (s, ch) in self.per_state.iter().enumerate() {
            if ch.gamma.len() != n_src || ch.phi.len() != n_src {
                errs.push(format!("state {s}: wrong source dimension"));
                continue;
            }
            for (src, g) in ch.gamma.iter().enumerate() {
                if g.is_negative() {
                    errs.push(format!("state {s}: negative weight at source {src}"));
                }
            }
            for (src, col) in ch.phi.iter().enumerate() {
                if col.len() != n_tgt {
                    errs.push(format!("state {s}: channel column {src} has wrong length"));
                    continue;
                }
                if col.iter().any(Rational::is_negative) || !sum(col).is_one() {
                    errs.push(format!(
                        "state {s}: channel column {src} is not a distribution"
                    ));
                }
            }
            for a in 0..target.n_profiles() {
                let src_col = source.column(s, a);
                let norm: Rational = ch
                    .gamma
                    .iter()
                    .zip(src_col)
                    .map(|(g, p)| g * p)
                    .fold(Rational::zero(), |acc, v| acc + v);
                if !norm.is_one() {
                    errs.push(format!(
                        "state {s}, action {a}: weight normalization gives {norm}"
                    ));
                }
                for o in 0..n_tgt {
                    let mut acc = Rational::zero();
                    for (src, p) in src_col.iter().enumerate() {
                        if !p.is_zero() && !ch.gamma[src].is_zero() {
                            acc += &ch.gamma[src] * &ch.phi[src][o] * p;
                        }
                    }
                    if &acc != &target.column(s, a)[o] {
                        errs.push(format!(
                            "state {s}, action {a}, outcome {o}: reproduction gives {acc}, \
                             kernel has {}",
                            target.column(s, a)[o]
                        ));
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Composes witnesses: if `outer` writes p from p' and `inner` writes p'
/// from p'', the composition writes p from p''.
pub fn compose_witnesses(outer: &GarblingWitness, inner: &GarblingWitness) -> GarblingWitness {
    let per_state = outer
        .per_state
        .iter()
        .zip(&inner.per_state)
        .map(|(w1, w2)| {
            let psi1 = w1.psi(); // [mid][tgt]
            let psi2 = w2.psi(); // [src][mid]
            let n_tgt = psi1.first().map(|c| c.len()).unwrap_or(0);
            let psi: Vec<Vec<Rational>> = psi2
                .iter()
                .map(|col2| {
                    let mut col = vec![Rational::zero(); n_tgt];
                    for (mid, w) in col2.iter().enumerate() {
                        if !w.is_zero() {
                            for (c, v) in col.iter_mut().zip(&psi1[mid]) {
                                if !v.is_zero() {
                                    *c += w * v;
                                }
                            }
                        }
                    }
                    col
                })
                .collect();
            StateChannel::from_psi(&psi, n_tgt)
        })
        .collect();
    GarblingWitness { per_state }
}

/// Where and why a garbling relation failed.
#[derive(Debug, Clone)]
pub struct GarblingFailure {
    pub state: usize,
    /// Next state, for the per-transition ex-post decider.
    pub next: Option<usize>,
    /// Target profile, for the profile-restricted decider.
    pub target: Option<usize>,
    pub farkas: Option<FarkasCertificate>,
    pub reason: String,
}

/// Verdict of a garbling decider: a checkable witness or a located failure.
#[derive(Debug, Clone)]
pub enum GarblingVerdict<W> {
    Holds(W),
    Fails(GarblingFailure),
}

impl<W> GarblingVerdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, GarblingVerdict::Holds(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            GarblingVerdict::Holds(w) => Some(w),
            GarblingVerdict::Fails(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&GarblingFailure> {
        match self {
            GarblingVerdict::Fails(f) => Some(f),
            GarblingVerdict::Holds(_) => None,
        }
    }
}

fn check_dims(target: &JointKernel, source: &JointKernel) -> Result<(), GarblingError> {
    if target.n_states() != source.n_states() || target.n_profiles() != source.n_profiles() {
        return Err(GarblingError::DimensionMismatch);
    }
    Ok(())
}

/// Builds and solves the per-state reproduction LP. `actions` quantifies the
/// reproduction equations; `column_stochastic` forces unit column masses
/// (joint garbling); `support` restricts targets to a subset; `positive_on`
/// asks to maximize a uniform floor under the listed source columns.
struct ReproductionLp<'a> {
    target: &'a JointKernel,
    source: &'a JointKernel,
    state: usize,
    actions: &'a [usize],
    column_stochastic: bool,
    support: Option<&'a BTreeSet<usize>>,
    zero_sources: Option<&'a BTreeSet<usize>>,
    positive_on: Option<&'a [usize]>,
}

enum ReproductionResult {
    Feasible {
        psi: Vec<Vec<Rational>>,
        floor: Option<Rational>,
    },
    Infeasible(FarkasCertificate),
}

fn solve_reproduction(spec: &ReproductionLp) -> Result<ReproductionResult, GarblingError> {
    let n_tgt = spec.target.outcome_count();
    let n_src = spec.source.outcome_count();
    let in_support =
        |o: usize| -> bool { spec.support.map(|s| s.contains(&o)).unwrap_or(true) };
    let source_zeroed = |src: usize| -> bool {
        spec.zero_sources
            .map(|z| z.contains(&src))
            .unwrap_or(false)
    };

    let mut lp = LpProblem::new();
    let mut var = vec![vec![None; n_tgt]; n_src];
    for (src, row) in var.iter_mut().enumerate() {
        if source_zeroed(src) {
            continue;
        }
        for (o, slot) in row.iter_mut().enumerate() {
            if in_support(o) {
                *slot = Some(lp.add_var(format!("psi_{src}_{o}"), VarBounds::nonneg()));
            }
        }
    }
    let floor_var = spec.positive_on.map(|_| {
        lp.add_var(
            "floor",
            VarBounds::interval(Rational::zero(), Rational::one()),
        )
    });

    // Reproduction: sum_src psi[src][o] p'(src|s,a) = p(o|s,a).
    for &a in spec.actions {
        let src_col = spec.source.column(spec.state, a);
        let tgt_col = spec.target.column(spec.state, a);
        for o in 0..n_tgt {
            let mut coeffs = Vec::new();
            for (src, p) in src_col.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                if let Some(v) = var[src][o] {
                    coeffs.push((v, p.clone()));
                }
            }
            let rhs = tgt_col[o].clone();
            if coeffs.is_empty() {
                if !rhs.is_zero() {
                    // No source mass can reach this outcome: certainly
                    // infeasible; emit the trivial 0 = rhs row for the LP to
                    // certify.
                    lp.add_constraint(&[], Relation::Eq, rhs);
                }
                continue;
            }
            lp.add_constraint(&coeffs, Relation::Eq, rhs);
        }
    }

    if spec.column_stochastic {
        for (src, row) in var.iter().enumerate() {
            if source_zeroed(src) {
                continue;
            }
            let coeffs: Vec<_> = row
                .iter()
                .flatten()
                .map(|&v| (v, Rational::one()))
                .collect();
            lp.add_constraint(&coeffs, Relation::Eq, Rational::one());
            let _ = src;
        }
    }

    if let (Some(cols), Some(fv)) = (spec.positive_on, floor_var) {
        for &src in cols {
            for (o, slot) in var[src].iter().enumerate() {
                if !in_support(o) {
                    continue;
                }
                let v = slot.expect("positive_on source must not be zeroed");
                lp.add_constraint(
                    &[(v, Rational::one()), (fv, -Rational::one())],
                    Relation::Ge,
                    Rational::zero(),
                );
                let _ = o;
            }
        }
        lp.set_objective(Sense::Maximize, &[(fv, Rational::one())]);
    } else {
        lp.set_objective(Sense::Feasibility, &[]);
    }

    match solve(&lp)? {
        LpOutcome::Optimal { primal, .. } => {
            let mut psi = vec![vec![Rational::zero(); n_tgt]; n_src];
            for (src, row) in var.iter().enumerate() {
                for (o, slot) in row.iter().enumerate() {
                    if let Some(v) = *slot {
                        psi[src][o] = primal[v].clone();
                    }
                }
            }
            let floor = floor_var.map(|fv| primal[fv].clone());
            Ok(ReproductionResult::Feasible { psi, floor })
        }
        LpOutcome::Infeasible { farkas } => Ok(ReproductionResult::Infeasible(farkas)),
        LpOutcome::Unbounded { .. } => unreachable!("reproduction LP objective is capped"),
    }
}

/// Decides whether `target` is a weighted garbling of `source`: per state,
/// feasibility of the reproduction equations in nonnegative psi.
pub fn check_weighted_garbling(
    target: &JointKernel,
    source: &JointKernel,
) -> Result<GarblingVerdict<GarblingWitness>, GarblingError> {
    check_dims(target, source)?;
    let actions: Vec<usize> = (0..target.n_profiles()).collect();
    let mut per_state = Vec::new();
    for s in 0..target.n_states() {
        let spec = ReproductionLp {
            target,
            source,
            state: s,
            actions: &actions,
            column_stochastic: false,
            support: None,
            zero_sources: None,
            positive_on: None,
        };
        match solve_reproduction(&spec)? {
            ReproductionResult::Feasible { psi, .. } => {
                per_state.push(StateChannel::from_psi(&psi, target.outcome_count()));
            }
            ReproductionResult::Infeasible(farkas) => {
                return Ok(GarblingVerdict::Fails(GarblingFailure {
                    state: s,
                    next: None,
                    target: None,
                    farkas: Some(farkas),
                    reason: format!("reproduction equations infeasible at state {s}"),
                }));
            }
        }
    }
    Ok(GarblingVerdict::Holds(GarblingWitness { per_state }))
}

/// Decides joint garbling: the weighted LP plus unit column masses, i.e.
/// a standard garbling of the (next state, signal) pair.
pub fn check_joint_garbling(
    target: &JointKernel,
    source: &JointKernel,
) -> Result<GarblingVerdict<GarblingWitness>, GarblingError> {
    check_dims(target, source)?;
    let actions: Vec<usize> = (0..target.n_profiles()).collect();
    let mut per_state = Vec::new();
    for s in 0..target.n_states() {
        let spec = ReproductionLp {
            target,
            source,
            state: s,
            actions: &actions,
            column_stochastic: true,
            support: None,
            zero_sources: None,
            positive_on: None,
        };
        match solve_reproduction(&spec)? {
            ReproductionResult::Feasible { psi, .. } => {
                per_state.push(StateChannel::from_psi(&psi, target.outcome_count()));
            }
            ReproductionResult::Infeasible(farkas) => {
                return Ok(GarblingVerdict::Fails(GarblingFailure {
                    state: s,
                    next: None,
                    target: None,
                    farkas: Some(farkas),
                    reason: format!("no column-stochastic channel at state {s}"),
                }));
            }
        }
    }
    Ok(GarblingVerdict::Holds(GarblingWitness { per_state }))
}

/// Per-transition channel family certifying ex-post garbling.
#[derive(Debug, Clone)]
pub struct ExpostWitness {
    /// `channels[s][t][y_src]` is a distribution over target signals.
    pub channels: Vec<Vec<Vec<Vec<Rational>>>>,
}

/// Decides ex-post garbling: a signal channel per state transition (s, t)
/// reproducing f from f' across every action profile.
pub fn check_expost_garbling(
    target: &MonitoringStructure,
    source: &MonitoringStructure,
    n_states: usize,
    n_profiles: usize,
) -> Result<GarblingVerdict<ExpostWitness>, GarblingError> {
    let ny_t = target.n_signals();
    let ny_s = source.n_signals();
    let mut channels = vec![vec![Vec::new(); n_states]; n_states];
    for s in 0..n_states {
        for t in 0..n_states {
            let mut lp = LpProblem::new();
            let mut var = vec![vec![0; ny_t]; ny_s];
            for (ys, row) in var.iter_mut().enumerate() {
                for (y, slot) in row.iter_mut().enumerate() {
                    *slot = lp.add_var(format!("phi_{ys}_{y}"), VarBounds::nonneg());
                }
            }
            for (ys, row) in var.iter().enumerate() {
                let coeffs: Vec<_> = row.iter().map(|&v| (v, Rational::one())).collect();
                lp.add_constraint(&coeffs, Relation::Eq, Rational::one());
                let _ = ys;
            }
            for a in 0..n_profiles {
                for y in 0..ny_t {
                    let coeffs: Vec<_> = (0..ny_s)
                        .map(|ys| (var[ys][y], source.f(s, a, t, ys).clone()))
                        .filter(|(_, c)| !c.is_zero())
                        .collect();
                    lp.add_constraint(&coeffs, Relation::Eq, target.f(s, a, t, y).clone());
                }
            }
            lp.set_objective(Sense::Feasibility, &[]);
            match solve(&lp)? {
                LpOutcome::Optimal { primal, .. } => {
                    channels[s][t] = var
                        .iter()
                        .map(|row| row.iter().map(|&v| primal[v].clone()).collect())
                        .collect();
                }
                LpOutcome::Infeasible { farkas } => {
                    return Ok(GarblingVerdict::Fails(GarblingFailure {
                        state: s,
                        next: Some(t),
                        target: None,
                        farkas: Some(farkas),
                        reason: format!("no signal channel conditional on (s{s}, t{t})"),
                    }));
                }
                LpOutcome::Unbounded { .. } => unreachable!("feasibility problem"),
            }
        }
    }
    Ok(GarblingVerdict::Holds(ExpostWitness { channels }))
}

/// Weighted-garbling witness whose channels share a common support per state.
#[derive(Debug, Clone)]
pub struct StrictWitness {
    pub witness: GarblingWitness,
    pub supports: Vec<Vec<usize>>,
}

/// Union of target supports over the listed actions; any common channel
/// support must contain it.
fn forced_support(target: &JointKernel, state: usize, actions: &[usize]) -> BTreeSet<usize> {
    let mut u = BTreeSet::new();
    for &a in actions {
        for (o, p) in target.column(state, a).iter().enumerate() {
            if !p.is_zero() {
                u.insert(o);
            }
        }
    }
    u
}

/// Candidate supports: supersets of the forced union, largest first.
fn candidate_supports(
    forced: &BTreeSet<usize>,
    n_outcomes: usize,
) -> Vec<BTreeSet<usize>> {
    let extras: Vec<usize> = (0..n_outcomes).filter(|o| !forced.contains(o)).collect();
    let mut out = Vec::new();
    if extras.len() <= 12 {
        let m = extras.len();
        let mut masks: Vec<u32> = (0..(1u32 << m)).collect();
        masks.sort_by_key(|b| std::cmp::Reverse(b.count_ones()));
        for mask in masks {
            let mut d = forced.clone();
            for (i, &e) in extras.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    d.insert(e);
                }
            }
            out.push(d);
        }
    } else {
        let mut full: BTreeSet<usize> = (0..n_outcomes).collect();
        out.push(std::mem::take(&mut full));
        out.push(forced.clone());
    }
    out
}

/// Searches for a channel with support exactly `support` on every used
/// column. Sources that can never be fully positive are zeroed and the
/// search repeats; averaging the per-source solutions yields a witness
/// positive on every remaining column.
fn strict_channel_for_support(
    target: &JointKernel,
    source: &JointKernel,
    state: usize,
    actions: &[usize],
    support: &BTreeSet<usize>,
) -> Result<Option<StateChannel>, GarblingError> {
    let n_tgt = target.outcome_count();
    let n_src = source.outcome_count();

    // A source outcome with mass under an action whose target column is not
    // fully supported on `support` can never carry weight.
    let mut zero: BTreeSet<usize> = BTreeSet::new();
    for &a in actions {
        let col = target.column(state, a);
        let partial = support.iter().any(|&o| col[o].is_zero());
        if partial {
            for (src, p) in source.column(state, a).iter().enumerate() {
                if !p.is_zero() {
                    zero.insert(src);
                }
            }
        }
    }

    let mut active: Vec<usize> = (0..n_src).filter(|s| !zero.contains(s)).collect();
    loop {
        if active.is_empty() {
            return Ok(None);
        }
        let mut good = Vec::new();
        let mut solutions = Vec::new();
        for &src in &active {
            let spec = ReproductionLp {
                target,
                source,
                state,
                actions,
                column_stochastic: false,
                support: Some(support),
                zero_sources: Some(&zero),
                positive_on: Some(&[src]),
            };
            match solve_reproduction(&spec)? {
                ReproductionResult::Feasible { psi, floor } => {
                    if floor.map(|f| f.is_positive()).unwrap_or(false) {
                        good.push(src);
                        solutions.push(psi);
                    }
                }
                ReproductionResult::Infeasible(_) => {}
            }
        }
        if good.len() == active.len() {
            // Average the per-source solutions: every active column becomes
            // fully positive on the support.
            let k = Rational::new(1.into(), (solutions.len() as i64).into());
            let mut psi = vec![vec![Rational::zero(); n_tgt]; n_src];
            for sol in &solutions {
                for (acc, col) in psi.iter_mut().zip(sol) {
                    for (a, v) in acc.iter_mut().zip(col) {
                        if !v.is_zero() {
                            *a += v * &k;
                        }
                    }
                }
            }
            let mut ch = StateChannel::from_psi(&psi, n_tgt);
            // Zero-weight columns still need support exactly `support`.
            let card = Rational::new(1.into(), (support.len() as i64).into());
            for (src, g) in ch.gamma.iter().enumerate() {
                if g.is_zero() {
                    let mut col = vec![Rational::zero(); n_tgt];
                    for &o in support {
                        col[o] = card.clone();
                    }
                    ch.phi[src] = col;
                }
            }
            return Ok(Some(ch));
        }
        for &src in &active {
            if !good.contains(&src) {
                zero.insert(src);
            }
        }
        active = good;
    }
}

/// Decides strict weighted garbling: a weighted witness whose channels share
/// a common support per state. Candidate supports are supersets of the union
/// of target supports, tried largest first.
pub fn check_strict_weighted_garbling(
    target: &JointKernel,
    source: &JointKernel,
) -> Result<GarblingVerdict<StrictWitness>, GarblingError> {
    check_dims(target, source)?;
    let actions: Vec<usize> = (0..target.n_profiles()).collect();
    let mut per_state = Vec::new();
    let mut supports = Vec::new();
    for s in 0..target.n_states() {
        let forced = forced_support(target, s, &actions);
        let mut found = None;
        for d in candidate_supports(&forced, target.outcome_count()) {
            if let Some(ch) = strict_channel_for_support(target, source, s, &actions, &d)? {
                found = Some((ch, d));
                break;
            }
        }
        match found {
            Some((ch, d)) => {
                per_state.push(ch);
                supports.push(d.into_iter().collect());
            }
            None => {
                return Ok(GarblingVerdict::Fails(GarblingFailure {
                    state: s,
                    next: None,
                    target: None,
                    farkas: None,
                    reason: format!("no common-support channel exists at state {s}"),
                }));
            }
        }
    }
    Ok(GarblingVerdict::Holds(StrictWitness {
        witness: GarblingWitness { per_state },
        supports,
    }))
}

/// Target profile with all its unilateral deviations, deduplicated.
pub fn unilateral_closure(space: &ProfileSpace, profile: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    set.insert(profile);
    let acts = space.decode(profile);
    for (i, n) in space.sizes().iter().enumerate() {
        for alt in 0..*n {
            if alt != acts[i] {
                set.insert(space.deviate(profile, i, alt));
            }
        }
    }
    set.into_iter().collect()
}

/// Witness for profile-restricted weighted garbling: one channel per
/// (state, target profile) pair.
#[derive(Debug, Clone)]
pub struct PWeightedWitness {
    pub channels: BTreeMap<(usize, usize), StateChannel>,
    /// Common channel supports per (state, target), for the strict variant.
    pub supports: Option<BTreeMap<(usize, usize), Vec<usize>>>,
}

impl PWeightedWitness {
    /// Reproduction, normalization, and support checks over the deviation
    /// sets, by direct substitution.
    pub fn verify(
        &self,
        target: &JointKernel,
        source: &JointKernel,
        deviations: &BTreeMap<usize, Vec<usize>>,
    ) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let n_tgt = target.outcome_count();
        for ((s, a_tgt), ch) in &self.channels {
            let actions = match deviations.get(a_tgt) {
                Some(d) => d,
                None => {
                    errs.push(format!("no deviation set for target profile {a_tgt}"));
                    continue;
                }
            };
            if ch.gamma.iter().any(Rational::is_negative) {
                errs.push(format!("state {s}, target {a_tgt}: negative weight"));
            }
            for (src, col) in ch.phi.iter().enumerate() {
                if col.iter().any(Rational::is_negative) || !sum(col).is_one() {
                    errs.push(format!(
                        "state {s}, target {a_tgt}: channel column {src} not a distribution"
                    ));
                }
            }
            for &a in actions {
                let src_col = source.column(*s, a);
                let norm: Rational = ch
                    .gamma
                    .iter()
                    .zip(src_col)
                    .map(|(g, p)| g * p)
                    .fold(Rational::zero(), |acc, v| acc + v);
                if !norm.is_one() {
                    errs.push(format!(
                        "state {s}, target {a_tgt}, action {a}: normalization gives {norm}"
                    ));
                }
                for o in 0..n_tgt {
                    let mut acc = Rational::zero();
                    for (src, p) in src_col.iter().enumerate() {
                        if !p.is_zero() && !ch.gamma[src].is_zero() {
                            acc += &ch.gamma[src] * &ch.phi[src][o] * p;
                        }
                    }
                    if acc != target.column(*s, a)[o] {
                        errs.push(format!(
                            "state {s}, target {a_tgt}, action {a}, outcome {o}: \
                             reproduction mismatch"
                        ));
                    }
                }
            }
            if let Some(supports) = &self.supports {
                let want = supports.get(&(*s, *a_tgt));
                match (ch.common_support(), want) {
                    (Some(sup), Some(w)) if &sup == w => {}
                    (got, want) => errs.push(format!(
                        "state {s}, target {a_tgt}: support mismatch ({got:?} vs {want:?})"
                    )),
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Decides P-weighted garbling with respect to `targets`: reproduction is
/// quantified only over each target profile's deviation set. The strict
/// variant additionally requires a common channel support per (state,
/// target).
pub fn check_p_weighted_garbling(
    target: &JointKernel,
    source: &JointKernel,
    targets: &[usize],
    deviations: &BTreeMap<usize, Vec<usize>>,
    strict: bool,
) -> Result<GarblingVerdict<PWeightedWitness>, GarblingError> {
    check_dims(target, source)?;
    let mut channels = BTreeMap::new();
    let mut supports = if strict { Some(BTreeMap::new()) } else { None };
    for &a_tgt in targets {
        let actions = deviations
            .get(&a_tgt)
            .ok_or(GarblingError::DimensionMismatch)?;
        for s in 0..target.n_states() {
            if strict {
                let forced = forced_support(target, s, actions);
                let mut found = None;
                for d in candidate_supports(&forced, target.outcome_count()) {
                    if let Some(ch) =
                        strict_channel_for_support(target, source, s, actions, &d)?
                    {
                        found = Some((ch, d));
                        break;
                    }
                }
                match found {
                    Some((ch, d)) => {
                        channels.insert((s, a_tgt), ch);
                        supports
                            .as_mut()
                            .unwrap()
                            .insert((s, a_tgt), d.into_iter().collect::<Vec<_>>());
                    }
                    None => {
                        return Ok(GarblingVerdict::Fails(GarblingFailure {
                            state: s,
                            next: None,
                            target: Some(a_tgt),
                            farkas: None,
                            reason: format!(
                                "no common-support channel at state {s} for target {a_tgt}"
                            ),
                        }));
                    }
                }
            } else {
                let spec = ReproductionLp {
                    target,
                    source,
                    state: s,
                    actions,
                    column_stochastic: false,
                    support: None,
                    zero_sources: None,
                    positive_on: None,
                };
                match solve_reproduction(&spec)? {
                    ReproductionResult::Feasible { psi, .. } => {
                        channels
                            .insert((s, a_tgt), StateChannel::from_psi(&psi, target.outcome_count()));
                    }
                    ReproductionResult::Infeasible(farkas) => {
                        return Ok(GarblingVerdict::Fails(GarblingFailure {
                            state: s,
                            next: None,
                            target: Some(a_tgt),
                            farkas: Some(farkas),
                            reason: format!(
                                "reproduction infeasible at state {s} for target {a_tgt}"
                            ),
                        }));
                    }
                }
            }
        }
    }
    Ok(GarblingVerdict::Holds(PWeightedWitness {
        channels,
        supports,
    }))
}

/// Witness that one conditional signal law is a weighted garbling of
/// another: per-signal weights and a signal channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalWitness {
    pub gamma: Vec<Rational>,
    /// `phi[y_src]` is a distribution over target signals.
    pub phi: Vec<Vec<Rational>>,
}

impl ConditionalWitness {
    /// Exact check of f(y|t,s,a) = sum_y' gamma^{y'} phi(y|y') f'(y'|t',s',a).
    pub fn verify(
        &self,
        target: &MonitoringStructure,
        at: (usize, usize),
        source: &MonitoringStructure,
        at_src: (usize, usize),
        n_profiles: usize,
    ) -> Result<(), String> {
        let (s, t) = at;
        let (ss, ts) = at_src;
        for a in 0..n_profiles {
            for y in 0..target.n_signals() {
                let mut acc = Rational::zero();
                for ys in 0..source.n_signals() {
                    acc += &self.gamma[ys] * &self.phi[ys][y] * source.f(ss, a, ts, ys);
                }
                if &acc != target.f(s, a, t, y) {
                    return Err(format!(
                        "action {a}, signal {y}: reproduction gives {acc}, law has {}",
                        target.f(s, a, t, y)
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Decides whether the target's signal law conditional on (s, t) is a
/// weighted garbling of the source's conditional on (s', t').
pub fn check_conditional_wg(
    target: &MonitoringStructure,
    at: (usize, usize),
    source: &MonitoringStructure,
    at_src: (usize, usize),
    n_profiles: usize,
) -> Result<GarblingVerdict<ConditionalWitness>, GarblingError> {
    let (s, t) = at;
    let (ss, ts) = at_src;
    let ny_t = target.n_signals();
    let ny_s = source.n_signals();
    let mut lp = LpProblem::new();
    let mut var = vec![vec![0; ny_t]; ny_s];
    for (ys, row) in var.iter_mut().enumerate() {
        for (y, slot) in row.iter_mut().enumerate() {
            *slot = lp.add_var(format!("psi_{ys}_{y}"), VarBounds::nonneg());
        }
    }
    for a in 0..n_profiles {
        for y in 0..ny_t {
            let coeffs: Vec<_> = (0..ny_s)
                .map(|ys| (var[ys][y], source.f(ss, a, ts, ys).clone()))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            lp.add_constraint(&coeffs, Relation::Eq, target.f(s, a, t, y).clone());
        }
    }
    lp.set_objective(Sense::Feasibility, &[]);
    match solve(&lp)? {
        LpOutcome::Optimal { primal, .. } => {
            let uniform = rat(1, ny_t as i64);
            let mut gamma = Vec::new();
            let mut phi = Vec::new();
            for row in &var {
                let col: Vec<Rational> = row.iter().map(|&v| primal[v].clone()).collect();
                let g = sum(&col);
                if g.is_zero() {
                    phi.push(vec![uniform.clone(); ny_t]);
                } else {
                    phi.push(col.iter().map(|v| v / &g).collect());
                }
                gamma.push(g);
            }
            Ok(GarblingVerdict::Holds(ConditionalWitness { gamma, phi }))
        }
        LpOutcome::Infeasible { farkas } => Ok(GarblingVerdict::Fails(GarblingFailure {
            state: s,
            next: Some(t),
            target: None,
            farkas: Some(farkas),
            reason: "conditional reproduction infeasible".into(),
        })),
        LpOutcome::Unbounded { .. } => unreachable!("feasibility problem"),
    }
}

/// Builds a full weighted-garbling witness from per-transition conditional
/// witnesses, for an action-independent transition law. The witness is
/// assembled by the explicit aggregation formulas and then re-verified
/// against the induced kernels.
pub fn witness_from_conditionals(
    game: &StochasticGame,
    target_mon: &MonitoringStructure,
    source_mon: &MonitoringStructure,
    state_maps: &[BTreeMap<usize, usize>],
    conditionals: Option<&BTreeMap<(usize, usize), ConditionalWitness>>,
) -> Result<GarblingWitness, GarblingError> {
    if !game.has_action_independent_transition() {
        return Err(GarblingError::ActionDependentTransition);
    }
    let n_states = game.n_states();
    let n_profiles = game.profiles().total();
    let ny_t = target_mon.n_signals();
    let ny_s = source_mon.n_signals();

    let mut per_state = Vec::new();
    for s in 0..n_states {
        let q = game.transition_row(s, 0);
        let support: BTreeSet<usize> = (0..n_states).filter(|&t| !q[t].is_zero()).collect();
        let map = &state_maps[s];
        for (&t, &t_dst) in map {
            if !support.contains(&t) || !support.contains(&t_dst) {
                return Err(GarblingError::MapOutsideSupport { from: t, to: t_dst });
            }
        }

        // Per-transition conditional witnesses, supplied or found by LP.
        let mut cond: BTreeMap<usize, ConditionalWitness> = BTreeMap::new();
        for &t in &support {
            let t_dst = *map.get(&t).ok_or(GarblingError::MapOutsideSupport {
                from: t,
                to: t,
            })?;
            let w = match conditionals.and_then(|c| c.get(&(s, t))) {
                Some(w) => w.clone(),
                None => match check_conditional_wg(
                    target_mon,
                    (s, t),
                    source_mon,
                    (s, t_dst),
                    n_profiles,
                )? {
                    GarblingVerdict::Holds(w) => w,
                    GarblingVerdict::Fails(f) => {
                        return Err(GarblingError::BadConditionalWitness {
                            state: s,
                            next: t,
                            detail: f.reason,
                        })
                    }
                },
            };
            w.verify(target_mon, (s, t), source_mon, (s, t_dst), n_profiles)
                .map_err(|detail| GarblingError::BadConditionalWitness {
                    state: s,
                    next: t,
                    detail,
                })?;
            cond.insert(t, w);
        }

        // Aggregate: gamma_s^{t',y'} = sum over the preimage of t' of the
        // conditional weights, transition-weighted and normalized by q(t'|s).
        let n_src = n_states * ny_s;
        let n_tgt = n_states * ny_t;
        let uniform = rat(1, n_tgt as i64);
        let mut gamma = vec![Rational::zero(); n_src];
        let mut phi = vec![vec![uniform.clone(); n_tgt]; n_src];
        for t_dst in 0..n_states {
            for y_src in 0..ny_s {
                let src = t_dst * ny_s + y_src;
                if !support.contains(&t_dst) {
                    continue; // weight stays zero, channel arbitrary
                }
                let preimage: Vec<usize> = support
                    .iter()
                    .copied()
                    .filter(|t| map.get(t) == Some(&t_dst))
                    .collect();
                if preimage.is_empty() {
                    continue;
                }
                let mass: Rational = preimage
                    .iter()
                    .map(|&t| &cond[&t].gamma[y_src] * &q[t])
                    .fold(Rational::zero(), |a, v| a + v);
                gamma[src] = &mass / &q[t_dst];
                if mass.is_zero() {
                    continue; // zero weight, channel arbitrary
                }
                let mut col = vec![Rational::zero(); n_tgt];
                for &t in &preimage {
                    let w = &cond[&t];
                    for y in 0..ny_t {
                        let num = &w.gamma[y_src] * &w.phi[y_src][y] * &q[t];
                        col[t * ny_t + y] = num / &mass;
                    }
                }
                phi[src] = col;
            }
        }
        per_state.push(StateChannel { gamma, phi });
    }

    let witness = GarblingWitness { per_state };
    let p_target = crate::game::joint_kernel(game, target_mon)
        .map_err(|_| GarblingError::DimensionMismatch)?;
    let p_source = crate::game::joint_kernel(game, source_mon)
        .map_err(|_| GarblingError::DimensionMismatch)?;
    witness
        .verify(&p_target, &p_source)
        .map_err(|errs| GarblingError::BadConditionalWitness {
            state: usize::MAX,
            next: usize::MAX,
            detail: errs.join("; "),
        })?;
    Ok(witness)
}

/// Likelihood-ratio interval per state and deviation margin, for partnership
/// style monitoring comparisons. Index 0 holds the one-effort-versus-none
/// margin, index 1 the full-effort margin.
#[derive(Debug, Clone)]
pub struct RatioInterval {
    pub lo: ExtRational,
    pub hi: ExtRational,
    pub arg_lo: usize,
    pub arg_hi: usize,
}

#[derive(Debug, Clone)]
pub struct LikelihoodRatioProfile {
    pub per_state: Vec<[RatioInterval; 2]>,
    pub n_players: usize,
}

/// Symmetric profile with `k` players choosing `effort_action` and the rest
/// the other action (binary common action set).
pub fn effort_profile(sym: &SymmetricGame, effort_action: usize, k: usize) -> usize {
    let n = sym.n_players();
    let other = 1 - effort_action;
    let acts: Vec<usize> = (0..n)
        .map(|i| if i < k { effort_action } else { other })
        .collect();
    sym.game().profiles().index(&acts)
}

/// Exact likelihood-ratio intervals L_{s,k}(t,y) = p(t,y|s,k)/p(t,y|s,k-1)
/// for k = 1 and k = N, with 0/0 read as 1 and x/0 as +inf. Ties among
/// extreme outcomes resolve to the smallest index.
pub fn likelihood_profile(
    kern: &JointKernel,
    sym: &SymmetricGame,
    effort_action: usize,
) -> LikelihoodRatioProfile {
    let n = sym.n_players();
    let per_state = (0..kern.n_states())
        .map(|s| {
            let make = |k: usize| {
                let hi_p = effort_profile(sym, effort_action, k);
                let lo_p = effort_profile(sym, effort_action, k - 1);
                let hi_col = kern.column(s, hi_p);
                let lo_col = kern.column(s, lo_p);
                let ratios: Vec<ExtRational> = hi_col
                    .iter()
                    .zip(lo_col)
                    .map(|(a, b)| likelihood_ratio(a, b))
                    .collect();
                let mut arg_lo = 0;
                let mut arg_hi = 0;
                for (o, r) in ratios.iter().enumerate() {
                    if r < &ratios[arg_lo] {
                        arg_lo = o;
                    }
                    if r > &ratios[arg_hi] {
                        arg_hi = o;
                    }
                }
                RatioInterval {
                    lo: ratios[arg_lo].clone(),
                    hi: ratios[arg_hi].clone(),
                    arg_lo,
                    arg_hi,
                }
            };
            [make(1), make(n)]
        })
        .collect();
    LikelihoodRatioProfile {
        per_state,
        n_players: n,
    }
}

/// Per-(state, margin) strict containment report.
#[derive(Debug, Clone)]
pub struct RatioComparison {
    pub per_state: Vec<[bool; 2]>,
    pub contained: bool,
    /// Constructive strict P-weighted witness when containment holds.
    pub witness: Option<PWeightedWitness>,
}

/// Decides strict P-weighted garbling with respect to the no-effort and
/// full-effort profiles by strict likelihood-ratio interval containment,
/// and builds the two-point witness when it holds.
pub fn strict_garbling_by_likelihood_ratios(
    target_profile: &LikelihoodRatioProfile,
    source_profile: &LikelihoodRatioProfile,
    target: &JointKernel,
    source: &JointKernel,
    sym: &SymmetricGame,
    effort_action: usize,
) -> Result<RatioComparison, GarblingError> {
    let n_states = target_profile.per_state.len();
    if source_profile.per_state.len() != n_states {
        return Err(GarblingError::DimensionMismatch);
    }
    let mut per_state = Vec::new();
    let mut contained = true;
    for s in 0..n_states {
        let mut row = [false; 2];
        for slot in 0..2 {
            let t = &target_profile.per_state[s][slot];
            let p = &source_profile.per_state[s][slot];
            row[slot] = p.lo < t.lo && t.hi < p.hi;
            contained &= row[slot];
        }
        per_state.push(row);
    }
    if !contained {
        return Ok(RatioComparison {
            per_state,
            contained,
            witness: None,
        });
    }

    // Constructive witness: for each state and target profile, put weight on
    // the source's two extreme outcomes and solve the channel outcome-wise.
    let n = sym.n_players();
    let mut channels = BTreeMap::new();
    let mut supports = BTreeMap::new();
    for s in 0..n_states {
        for (slot, k_hi) in [(0usize, 1usize), (1, n)] {
            let a_tgt = effort_profile(sym, effort_action, if slot == 0 { 0 } else { n });
            let hi_p = effort_profile(sym, effort_action, k_hi);
            let lo_p = effort_profile(sym, effort_action, k_hi - 1);
            let interval = &source_profile.per_state[s][slot];
            if interval.arg_lo == interval.arg_hi {
                return Err(GarblingError::Uninformative { state: s });
            }
            let o_hi = interval.arg_hi;
            let o_lo = interval.arg_lo;
            // gamma_hi p'(o_hi|s,k) + gamma_lo p'(o_lo|s,k) = 1 for both k.
            let a11 = source.column(s, hi_p)[o_hi].clone();
            let a12 = source.column(s, hi_p)[o_lo].clone();
            let a21 = source.column(s, lo_p)[o_hi].clone();
            let a22 = source.column(s, lo_p)[o_lo].clone();
            let det = &a11 * &a22 - &a12 * &a21;
            if det.is_zero() {
                return Err(GarblingError::Uninformative { state: s });
            }
            let g_hi = (&a22 - &a12) / &det;
            let g_lo = (&a11 - &a21) / &det;
            if !g_hi.is_positive() || !g_lo.is_positive() {
                return Err(GarblingError::Uninformative { state: s });
            }
            // Channel: per covered outcome, invert the fixed 2x2 system.
            let m11 = &g_hi * &a11;
            let m12 = &g_lo * &a12;
            let m21 = &g_hi * &a21;
            let m22 = &g_lo * &a22;
            let mdet = &m11 * &m22 - &m12 * &m21;
            debug_assert!(!mdet.is_zero());
            let n_tgt = target.outcome_count();
            let mut support = Vec::new();
            let mut phi_hi = vec![Rational::zero(); n_tgt];
            let mut phi_lo = vec![Rational::zero(); n_tgt];
            for o in 0..n_tgt {
                let p_hi = &target.column(s, hi_p)[o];
                let p_lo = &target.column(s, lo_p)[o];
                if p_hi.is_zero() && p_lo.is_zero() {
                    continue;
                }
                support.push(o);
                let f1 = (&(p_hi * &m22) - &(p_lo * &m12)) / &mdet;
                let f2 = (&(p_lo * &m11) - &(p_hi * &m21)) / &mdet;
                if !f1.is_positive() || !f2.is_positive() {
                    return Err(GarblingError::Uninformative { state: s });
                }
                phi_hi[o] = f1;
                phi_lo[o] = f2;
            }
            let n_src = source.outcome_count();
            let card = rat(1, support.len() as i64);
            let mut filler = vec![Rational::zero(); n_tgt];
            for &o in &support {
                filler[o] = card.clone();
            }
            let mut gamma = vec![Rational::zero(); n_src];
            let mut phi = vec![filler; n_src];
            gamma[o_hi] = g_hi;
            gamma[o_lo] = g_lo;
            phi[o_hi] = phi_hi;
            phi[o_lo] = phi_lo;
            channels.insert((s, a_tgt), StateChannel { gamma, phi });
            supports.insert((s, a_tgt), support);
        }
    }
    Ok(RatioComparison {
        per_state,
        contained,
        witness: Some(PWeightedWitness {
            channels,
            supports: Some(supports),
        }),
    })
}

/// Maximum weight of a witness.
pub fn weight_size(witness: &GarblingWitness) -> Rational {
    let mut best = Rational::zero();
    for ch in &witness.per_state {
        for g in &ch.gamma {
            if g > &best {
                best = g.clone();
            }
        }
    }
    best
}

/// Extends a kernel with a fresh null signal carrying mass 1 - mix at a
/// fixed (first) next state: the mixture (mix) p + (1 - mix) delta_n.
pub fn null_extended_mixture(kern: &JointKernel, mix: &Rational) -> JointKernel {
    let ny = kern.n_signals() + 1;
    let mut signals = kern.signals.clone();
    signals.push("null".into());
    let n_states = kern.n_states();
    let probs = (0..n_states)
        .map(|s| {
            (0..kern.n_profiles())
                .map(|a| {
                    let mut col = vec![Rational::zero(); n_states * ny];
                    for t in 0..n_states {
                        for y in 0..kern.n_signals() {
                            col[t * ny + y] = mix * kern.prob(s, a, t, y);
                        }
                    }
                    col[ny - 1] = Rational::one() - mix; // at t = 0
                    col
                })
                .collect()
        })
        .collect();
    JointKernel::from_table(signals, n_states, probs).expect("shape preserved")
}
