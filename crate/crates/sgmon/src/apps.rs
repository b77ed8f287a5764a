//! Instance generators: the repeated prisoners' dilemma with its pair of
//! monitoring structures, the two-state monitoring comparison example, the
//! partnership application, and seeded random instances for the property
//! suites. Identical parameters always produce identical structures.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::game::{
    joint_kernel, symmetrize_check, MonitoringStructure, StochasticGame, SymmetricGame,
};
use crate::rat::{rat, rint, Rational};

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("prisoners' dilemma needs g, l > 0 and 1 > g - l")]
    BadPdParams,
    #[error("monitoring noise must satisfy 0 < eta' < eta < 1/2")]
    BadNoiseOrder,
    #[error("signal arrival probability must lie in (0, 1]")]
    BadArrival,
    #[error("epsilon must lie in [0, 1/6]")]
    BadEpsilonRange,
    #[error("noise must lie in (0, 1/2)")]
    BadNoise,
    #[error("partnership spec is inconsistent: {0}")]
    BadPartnership(String),
}

/// Stage payoffs of the prisoners' dilemma with reward 1, temptation 1+g,
/// sucker -l, punishment 0, as a one-state stochastic game.
pub fn make_pd(g: Rational, l: Rational) -> Result<StochasticGame, ParamError> {
    if !g.is_positive() || !l.is_positive() || Rational::one() <= &g - &l {
        return Err(ParamError::BadPdParams);
    }
    let states = vec!["s".to_string()];
    let players = vec!["P1".to_string(), "P2".to_string()];
    let actions = vec![vec!["C".to_string(), "D".to_string()]; 2];
    // profile order: CC, CD, DC, DD
    let one = Rational::one();
    let zero = Rational::zero();
    let p0 = vec![vec![
        one.clone(),
        -l.clone(),
        &one + &g,
        zero.clone(),
    ]];
    let p1 = vec![vec![one.clone(), &one + &g, -l.clone(), zero.clone()]];
    let transition = vec![vec![vec![one.clone()]; 4]];
    StochasticGame::new(states, players, actions, vec![p0, p1], transition)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))
}

/// Binary-signal monitoring for the repeated PD: signal c with probability
/// 1 - eta after mutual cooperation, eta otherwise.
pub fn example1_monitor(eta: Rational) -> Result<MonitoringStructure, ParamError> {
    if !eta.is_positive() || eta >= rat(1, 2) {
        return Err(ParamError::BadNoise);
    }
    let f_c = |a: usize| if a == 0 { Rational::one() - &eta } else { eta.clone() };
    let law = vec![(0..4)
        .map(|a| {
            let c = f_c(a);
            let d = Rational::one() - &c;
            vec![vec![c, d]]
        })
        .collect()];
    MonitoringStructure::new(vec!["c".into(), "d".into()], law)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))
}

/// Three-signal monitoring for the repeated PD: with probability epsilon a
/// sharper binary signal (noise eta'), otherwise a null signal.
pub fn example1_monitor_prime(
    eta_prime: Rational,
    epsilon: Rational,
) -> Result<MonitoringStructure, ParamError> {
    if !eta_prime.is_positive() || eta_prime >= rat(1, 2) {
        return Err(ParamError::BadNoise);
    }
    if !epsilon.is_positive() || epsilon > Rational::one() {
        return Err(ParamError::BadArrival);
    }
    let law = vec![(0..4)
        .map(|a| {
            let c = if a == 0 {
                &epsilon * (Rational::one() - &eta_prime)
            } else {
                &epsilon * &eta_prime
            };
            let d = &epsilon - &c;
            let n = Rational::one() - &epsilon;
            vec![vec![c, d, n]]
        })
        .collect()];
    MonitoringStructure::new(vec!["c".into(), "d".into(), "n".into()], law)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))
}

/// The repeated-PD comparison instance: a noisy binary structure against a
/// conditionally sharper three-signal structure. Stage payoffs default to
/// (g, l) = (1/2, 1/4).
pub fn make_example1(
    eta: Rational,
    eta_prime: Rational,
    epsilon: Rational,
) -> Result<(StochasticGame, MonitoringStructure, MonitoringStructure), ParamError> {
    if eta_prime >= eta {
        return Err(ParamError::BadNoiseOrder);
    }
    let game = make_pd(rat(1, 2), rat(1, 4))?;
    let mon = example1_monitor(eta)?;
    let mon_prime = example1_monitor_prime(eta_prime, epsilon)?;
    Ok((game, mon, mon_prime))
}

/// The two-state comparison instance: uniform action-independent transition,
/// a state-independent binary signal against one that is sharper when the
/// next state is s1 and blunter (by epsilon) when it is s2. The paper pins
/// only the monitoring data; PD stage payoffs with (g, l) = (1/2, 1/4) are
/// attached at both states as an artifact choice.
pub fn make_example2(
    epsilon: Rational,
) -> Result<(SymmetricGame, MonitoringStructure, MonitoringStructure), ParamError> {
    if epsilon.is_negative() || epsilon > rat(1, 6) {
        return Err(ParamError::BadEpsilonRange);
    }
    let states = vec!["s1".to_string(), "s2".to_string()];
    let players = vec!["P1".to_string(), "P2".to_string()];
    let actions = vec![vec!["C".to_string(), "D".to_string()]; 2];
    let (g, l) = (rat(1, 2), rat(1, 4));
    let one = Rational::one();
    let p0 = vec![one.clone(), -l.clone(), &one + &g, Rational::zero()];
    let p1 = vec![one.clone(), &one + &g, -l.clone(), Rational::zero()];
    let payoff = vec![vec![p0.clone(), p0], vec![p1.clone(), p1]];
    let transition = vec![vec![vec![rat(1, 2), rat(1, 2)]; 4]; 2];
    let game = StochasticGame::new(states, players, actions, payoff, transition)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))?;

    // f(c | t, s, a) = 2/3 after CC, 1/3 otherwise, independent of (t, s).
    let base = |a: usize| if a == 0 { rat(2, 3) } else { rat(1, 3) };
    let law = (0..2)
        .map(|_s| {
            (0..4)
                .map(|a| {
                    let c = base(a);
                    let d = Rational::one() - &c;
                    vec![vec![c.clone(), d.clone()], vec![c, d]]
                })
                .collect()
        })
        .collect();
    let mon = MonitoringStructure::new(vec!["c".into(), "d".into()], law)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))?;

    // f'(c | s1, ., CC) = 3/4; f'(c | s2, ., CC) = 2/3 - epsilon.
    let sharp = |a: usize| if a == 0 { rat(3, 4) } else { rat(1, 4) };
    let blunt = |a: usize| {
        if a == 0 {
            rat(2, 3) - &epsilon
        } else {
            rat(1, 3) + &epsilon
        }
    };
    let law_prime = (0..2)
        .map(|_s| {
            (0..4)
                .map(|a| {
                    let c1 = sharp(a);
                    let c2 = blunt(a);
                    vec![
                        vec![c1.clone(), Rational::one() - &c1],
                        vec![c2.clone(), Rational::one() - &c2],
                    ]
                })
                .collect()
        })
        .collect();
    let mon_prime = MonitoringStructure::new(vec!["c".into(), "d".into()], law_prime)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))?;

    let sym = SymmetricGame::new(game).map_err(|e| ParamError::BadPartnership(e.to_string()))?;
    Ok((sym, mon, mon_prime))
}

/// Team-production specification: N agents choose effort or shirking,
/// revenue depends on the effort count and the state, the signal on the
/// effort count and the transition.
#[derive(Debug, Clone)]
pub struct PartnershipSpec {
    pub n_players: usize,
    pub cost: Rational,
    /// `revenue[k][s]`: expected revenue with k efforts at state s.
    pub revenue: Vec<Vec<Rational>>,
    /// Action-independent transition `q[s][t]`.
    pub transition: Vec<Vec<Rational>>,
    pub signals: Vec<String>,
    /// `law[s][k][t][y]`: signal law given effort count k.
    pub law: Vec<Vec<Vec<Vec<Rational>>>>,
}

/// Assembled partnership instance with its stage-equilibrium flags.
#[derive(Debug, Clone)]
pub struct PartnershipBuild {
    pub sym: SymmetricGame,
    pub monitor: MonitoringStructure,
    /// Per state: whether everyone-works is a stage Nash equilibrium.
    pub full_effort_stage_nash: Vec<bool>,
    /// Per state: whether everyone-shirks is a stage Nash equilibrium.
    pub no_effort_stage_nash: Vec<bool>,
}

/// Effort is action 0, shirking action 1; player payoffs are the equal
/// revenue share minus the effort cost.
pub fn make_partnership(spec: &PartnershipSpec) -> Result<PartnershipBuild, ParamError> {
    let n = spec.n_players;
    if n == 0 || n > 4 {
        return Err(ParamError::BadPartnership(
            "player count must be between 1 and 4".into(),
        ));
    }
    let n_states = spec.transition.len();
    if spec.revenue.len() != n + 1 || spec.revenue.iter().any(|r| r.len() != n_states) {
        return Err(ParamError::BadPartnership(
            "revenue table must cover efforts 0..=N at every state".into(),
        ));
    }
    if spec.law.len() != n_states
        || spec
            .law
            .iter()
            .any(|per_k| per_k.len() != n + 1 || per_k.iter().any(|pt| pt.len() != n_states))
    {
        return Err(ParamError::BadPartnership(
            "signal law must cover every (state, effort count, next state)".into(),
        ));
    }

    let states: Vec<String> = (0..n_states).map(|s| format!("s{}", s + 1)).collect();
    let players: Vec<String> = (0..n).map(|i| format!("A{}", i + 1)).collect();
    let actions = vec![vec!["e".to_string(), "ne".to_string()]; n];
    let share = rat(1, n as i64);

    let space = crate::game::ProfileSpace::new(vec![2; n]);
    let effort_count =
        |a: usize| -> usize { space.decode(a).iter().filter(|&&ai| ai == 0).count() };

    let payoff: Vec<Vec<Vec<Rational>>> = (0..n)
        .map(|i| {
            (0..n_states)
                .map(|s| {
                    space
                        .iter()
                        .map(|a| {
                            let k = effort_count(a);
                            let mut u = &share * &spec.revenue[k][s];
                            if space.decode(a)[i] == 0 {
                                u -= &spec.cost;
                            }
                            u
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let transition: Vec<Vec<Vec<Rational>>> = (0..n_states)
        .map(|s| {
            space
                .iter()
                .map(|_| spec.transition[s].clone())
                .collect()
        })
        .collect();
    let game = StochasticGame::new(states, players, actions, payoff, transition)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))?;
    let law: Vec<Vec<Vec<Vec<Rational>>>> = (0..n_states)
        .map(|s| {
            space
                .iter()
                .map(|a| spec.law[s][effort_count(a)].clone())
                .collect()
        })
        .collect();
    let monitor = MonitoringStructure::new(spec.signals.clone(), law)
        .map_err(|e| ParamError::BadPartnership(e.to_string()))?;

    let sym =
        SymmetricGame::new(game).map_err(|e| ParamError::BadPartnership(e.to_string()))?;
    symmetrize_check(&sym, &[&monitor])
        .map_err(|v| ParamError::BadPartnership(format!("symmetry violated: {v:?}")))?;

    let full = sym.sym_profile(0);
    let none = sym.sym_profile(1);
    let full_effort_stage_nash = (0..n_states)
        .map(|s| sym.game().is_stage_nash(s, full))
        .collect();
    let no_effort_stage_nash = (0..n_states)
        .map(|s| sym.game().is_stage_nash(s, none))
        .collect();
    Ok(PartnershipBuild {
        sym,
        monitor,
        full_effort_stage_nash,
        no_effort_stage_nash,
    })
}

/// Seeded random instances for the property suites.
pub mod random {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    pub fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Full-support rational distribution with denominator at most
    /// `n * max_num`.
    pub fn distribution(rng: &mut ChaCha8Rng, n: usize, max_num: i64) -> Vec<Rational> {
        let nums: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max_num)).collect();
        let total: i64 = nums.iter().sum();
        nums.into_iter().map(|v| rat(v, total)).collect()
    }

    /// Distribution that may put zero mass on some points (never all).
    pub fn sparse_distribution(rng: &mut ChaCha8Rng, n: usize, max_num: i64) -> Vec<Rational> {
        let mut nums: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_num)).collect();
        if nums.iter().all(|&v| v == 0) {
            nums[rng.gen_range(0..n)] = 1;
        }
        let total: i64 = nums.iter().sum();
        nums.into_iter().map(|v| rat(v, total)).collect()
    }

    pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
        rat(rng.gen_range(-8..=8), rng.gen_range(1..=4))
    }

    /// Random game with full-support transitions.
    pub fn game(
        rng: &mut ChaCha8Rng,
        n_states: usize,
        action_sizes: &[usize],
        action_independent: bool,
    ) -> StochasticGame {
        let states = (0..n_states).map(|s| format!("s{}", s + 1)).collect();
        let players = (0..action_sizes.len())
            .map(|i| format!("P{}", i + 1))
            .collect();
        let actions: Vec<Vec<String>> = action_sizes
            .iter()
            .map(|&n| (0..n).map(|a| format!("a{}", a + 1)).collect())
            .collect();
        let n_profiles: usize = action_sizes.iter().product();
        let payoff = (0..action_sizes.len())
            .map(|_| {
                (0..n_states)
                    .map(|_| (0..n_profiles).map(|_| small_rational(rng)).collect())
                    .collect()
            })
            .collect();
        let transition = (0..n_states)
            .map(|_| {
                if action_independent {
                    let row = distribution(rng, n_states, 6);
                    (0..n_profiles).map(|_| row.clone()).collect()
                } else {
                    (0..n_profiles)
                        .map(|_| distribution(rng, n_states, 6))
                        .collect()
                }
            })
            .collect();
        StochasticGame::new(states, players, actions, payoff, transition)
            .expect("random game is well-formed")
    }

    /// Random monitoring structure for a game.
    pub fn monitoring(
        rng: &mut ChaCha8Rng,
        game: &StochasticGame,
        n_signals: usize,
        allow_zeros: bool,
    ) -> MonitoringStructure {
        let signals = (0..n_signals).map(|y| format!("y{}", y + 1)).collect();
        let law = (0..game.n_states())
            .map(|_| {
                game.profiles()
                    .iter()
                    .map(|_| {
                        (0..game.n_states())
                            .map(|_| {
                                if allow_zeros {
                                    sparse_distribution(rng, n_signals, 5)
                                } else {
                                    distribution(rng, n_signals, 5)
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MonitoringStructure::new(signals, law).expect("random law is well-formed")
    }

    /// How a garbled structure is produced from a source structure while
    /// staying on the same game.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum GarblingFlavor {
        /// Per-transition signal channel: preserves any transition law.
        SignalChannel,
        /// Next state redrawn from the (action-independent) transition and
        /// the signal drawn from a channel on the full source outcome.
        Rerandomizing,
        /// Convex combination of the two.
        Blend,
    }

    /// Builds a garbled monitoring structure from a source structure via a
    /// random column-stochastic channel on (next state, signal) pairs that
    /// preserves the game's transition law, and returns the channel as a
    /// witness. `Rerandomizing` and `Blend` need an action-independent
    /// transition.
    pub fn garbled_monitoring(
        rng: &mut ChaCha8Rng,
        game: &StochasticGame,
        source: &MonitoringStructure,
        n_signals: usize,
        flavor: GarblingFlavor,
    ) -> (MonitoringStructure, GarblingWitnessData) {
        let n_states = game.n_states();
        let ny_src = source.n_signals();
        let n_src = n_states * ny_src;
        let signals: Vec<String> = (0..n_signals).map(|y| format!("g{}", y + 1)).collect();

        // Per-state channels used by the two flavors.
        // per_transition[s][t][y_src] -> distribution over target signals
        let per_transition: Vec<Vec<Vec<Vec<Rational>>>> = (0..n_states)
            .map(|_| {
                (0..n_states)
                    .map(|_| {
                        (0..ny_src)
                            .map(|_| distribution(rng, n_signals, 5))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        // rerandom[s][src] -> distribution over target signals
        let rerandom: Vec<Vec<Vec<Rational>>> = (0..n_states)
            .map(|_| (0..n_src).map(|_| distribution(rng, n_signals, 5)).collect())
            .collect();
        let beta = match flavor {
            GarblingFlavor::SignalChannel => Rational::one(),
            GarblingFlavor::Rerandomizing => Rational::zero(),
            GarblingFlavor::Blend => rat(rng.gen_range(1..=3), 4),
        };

        // psi_s(t,y ; t',y') = beta 1{t=t'} chan[s][t'][y'][y]
        //                    + (1-beta) q(t|s) rerandom[s][(t',y')][y]
        let q0: Vec<Vec<Rational>> = (0..n_states)
            .map(|s| game.transition_row(s, 0).to_vec())
            .collect();
        let psi = |s: usize, t: usize, y: usize, t_src: usize, y_src: usize| -> Rational {
            let mut v = Rational::zero();
            if !beta.is_zero() && t == t_src {
                v += &beta * &per_transition[s][t_src][y_src][y];
            }
            if beta != Rational::one() {
                v += (Rational::one() - &beta)
                    * &q0[s][t]
                    * &rerandom[s][t_src * ny_src + y_src][y];
            }
            v
        };

        // Induced law: f(y|t,s,a) = [sum_{t',y'} psi p'(t',y'|s,a)] / q(t|s,a).
        let kern_src = joint_kernel(game, source).expect("dimensions match");
        let mut law = Vec::with_capacity(n_states);
        for s in 0..n_states {
            let mut per_a = Vec::new();
            for a in game.profiles().iter() {
                let src_col = kern_src.column(s, a);
                let mut per_t = Vec::new();
                for t in 0..n_states {
                    let q = game.transition(s, a, t);
                    let row: Vec<Rational> = (0..n_signals)
                        .map(|y| {
                            let mut p = Rational::zero();
                            for t_src in 0..n_states {
                                for y_src in 0..ny_src {
                                    let w = &src_col[t_src * ny_src + y_src];
                                    if !w.is_zero() {
                                        p += psi(s, t, y, t_src, y_src) * w;
                                    }
                                }
                            }
                            if q.is_zero() {
                                // Unreachable next state: any distribution.
                                if y == 0 {
                                    Rational::one()
                                } else {
                                    Rational::zero()
                                }
                            } else {
                                p / q
                            }
                        })
                        .collect();
                    per_t.push(row);
                }
                per_a.push(per_t);
            }
            law.push(per_a);
        }
        let mon = MonitoringStructure::new(signals, law).expect("constructed law well-formed");

        // The channel itself, as dense per-state columns psi[src][tgt].
        let n_tgt = n_states * n_signals;
        let channel: Vec<Vec<Vec<Rational>>> = (0..n_states)
            .map(|s| {
                (0..n_src)
                    .map(|src| {
                        let (t_src, y_src) = (src / ny_src, src % ny_src);
                        (0..n_tgt)
                            .map(|tgt| psi(s, tgt / n_signals, tgt % n_signals, t_src, y_src))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        (mon, GarblingWitnessData { channel })
    }

    /// Column-stochastic channel per state: psi[state][src][tgt].
    #[derive(Debug, Clone)]
    pub struct GarblingWitnessData {
        pub channel: Vec<Vec<Vec<Rational>>>,
    }

    impl GarblingWitnessData {
        pub fn to_witness(&self, n_targets: usize) -> crate::garbling::GarblingWitness {
            crate::garbling::GarblingWitness {
                per_state: self
                    .channel
                    .iter()
                    .map(|psi| crate::garbling::StateChannel::from_psi(psi, n_targets))
                    .collect(),
            }
        }
    }

    /// Random two-state, two-player partnership spec with the given signal
    /// count. Revenue is zero without effort, so shirking forever is a
    /// stage equilibrium with payoff zero.
    pub fn partnership(rng: &mut ChaCha8Rng, n_signals: usize) -> PartnershipSpec {
        let n_states = 2;
        let cost = rat(rng.gen_range(1..=3), 4);
        let revenue = vec![
            vec![rint(0); n_states],
            (0..n_states)
                .map(|_| rat(rng.gen_range(1..=6), 2))
                .collect(),
            (0..n_states)
                .map(|_| rat(rng.gen_range(4..=12), 2))
                .collect(),
        ];
        let transition = (0..n_states)
            .map(|_| distribution(rng, n_states, 4))
            .collect();
        let signals = (0..n_signals).map(|y| format!("y{}", y + 1)).collect();
        let law = (0..n_states)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        (0..n_states)
                            .map(|_| distribution(rng, n_signals, 6))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        PartnershipSpec {
            n_players: 2,
            cost,
            revenue,
            transition,
            signals,
            law,
        }
    }
}
