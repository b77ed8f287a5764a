//! The garbling deciders against the published worked examples: boundary
//! values, hand-written witnesses, order structure, and the constructive
//! builders.

use std::collections::BTreeMap;

use num_traits::One;

use sgmon::apps::{make_example1, make_example2, random};
use sgmon::game::{joint_kernel, JointKernel, MonitoringStructure, StochasticGame};
use sgmon::garbling::*;
use sgmon::rat::{rat, rint, ExtRational, Rational};

fn example2_kernels(eps: (i64, i64)) -> (JointKernel, JointKernel, sgmon::game::SymmetricGame) {
    let (sym, mon, mon_prime) = make_example2(rat(eps.0, eps.1)).unwrap();
    let p = joint_kernel(sym.game(), &mon).unwrap();
    let pp = joint_kernel(sym.game(), &mon_prime).unwrap();
    (p, pp, sym)
}

#[test]
fn example2_expost_holds_iff_eps_zero() {
    let (sym, mon, mon_prime) = make_example2(rint(0)).unwrap();
    let n_prof = sym.game().profiles().total();
    let v = check_expost_garbling(&mon, &mon_prime, 2, n_prof).unwrap();
    assert!(v.holds());

    let (sym, mon, mon_prime) = make_example2(rat(1, 100)).unwrap();
    let v = check_expost_garbling(&mon, &mon_prime, 2, sym.game().profiles().total()).unwrap();
    assert!(!v.holds());
    // Conditional on t = s2 the garbled signal is strictly sharper.
    assert_eq!(v.failure().unwrap().next, Some(1));
}

#[test]
fn example2_joint_boundary_at_one_twelfth() {
    let (p, pp, _) = example2_kernels((1, 12));
    let v = check_joint_garbling(&p, &pp).unwrap();
    assert!(v.holds());
    // The witness is a genuine standard garbling: unit column masses.
    let w = v.witness().unwrap();
    for ch in &w.per_state {
        for g in &ch.gamma {
            assert_eq!(g, &Rational::one());
        }
    }

    let (sym, mon, mon_prime) = make_example2(rat(1, 12) + rat(1, 1000)).unwrap();
    let p = joint_kernel(sym.game(), &mon).unwrap();
    let pp = joint_kernel(sym.game(), &mon_prime).unwrap();
    let v = check_joint_garbling(&p, &pp).unwrap();
    assert!(!v.holds());
    assert!(v.failure().unwrap().farkas.is_some());
}

#[test]
fn example2_weighted_holds_for_all_eps_with_published_witness() {
    for eps in [(0, 1), (1, 24), (1, 12), (1, 6)] {
        let (p, pp, _) = example2_kernels(eps);
        let v = check_weighted_garbling(&p, &pp).unwrap();
        assert!(v.holds(), "weighted garbling must hold at eps {eps:?}");
        v.witness().unwrap().verify(&p, &pp).unwrap();

        // The published weights: 2 on both (s1, y') sources, 0 on s2;
        // channel entries 5/12 on matching signals and 1/12 on crossed
        // ones, replicated over both next states.
        let ny = 2;
        let witness = GarblingWitness {
            per_state: (0..2)
                .map(|_| {
                    let mut gamma = vec![rint(0); 4];
                    gamma[0] = rint(2); // (s1, c)
                    gamma[1] = rint(2); // (s1, d)
                    let mut phi = vec![vec![rint(0); 4]; 4];
                    for (src, same, cross) in [(0, 0, 1), (1, 1, 0)] {
                        for t in 0..2 {
                            phi[src][t * ny + same] = rat(5, 12);
                            phi[src][t * ny + cross] = rat(1, 12);
                        }
                    }
                    // Unweighted sources carry an arbitrary distribution.
                    phi[2][0] = rint(1);
                    phi[3][0] = rint(1);
                    StateChannel { gamma, phi }
                })
                .collect(),
        };
        witness.verify(&p, &pp).unwrap();
    }
}

#[test]
fn example2_implication_chain_is_monotone() {
    for eps in [(0, 1), (1, 24), (1, 12), (1, 6)] {
        let (sym, mon, mon_prime) = make_example2(rat(eps.0, eps.1)).unwrap();
        let p = joint_kernel(sym.game(), &mon).unwrap();
        let pp = joint_kernel(sym.game(), &mon_prime).unwrap();
        let n_prof = sym.game().profiles().total();
        let expost = check_expost_garbling(&mon, &mon_prime, 2, n_prof)
            .unwrap()
            .holds();
        let joint = check_joint_garbling(&p, &pp).unwrap().holds();
        let weighted = check_weighted_garbling(&p, &pp).unwrap().holds();
        assert!(!expost || joint, "ex-post implies joint at {eps:?}");
        assert!(!joint || weighted, "joint implies weighted at {eps:?}");
        assert!(weighted);
    }
}

#[test]
fn example1_incomparable_but_weighted() {
    let (game, mon, mon_prime) = make_example1(rat(1, 4), rat(1, 8), rat(1, 2)).unwrap();
    let p = joint_kernel(&game, &mon).unwrap();
    let pp = joint_kernel(&game, &mon_prime).unwrap();

    // Joint garbling fails in both directions: the structures are
    // Blackwell-incomparable at these parameters.
    assert!(!check_joint_garbling(&p, &pp).unwrap().holds());
    assert!(!check_joint_garbling(&pp, &p).unwrap().holds());

    let v = check_weighted_garbling(&p, &pp).unwrap();
    assert!(v.holds());

    // Published witness: gamma^c = gamma^d = 1/eps = 2, gamma^n = 0,
    // phi(c|c) = phi(d|d) = (1 - eta' - eta)/(1 - 2 eta') = 5/6.
    let witness = GarblingWitness {
        per_state: vec![StateChannel {
            gamma: vec![rint(2), rint(2), rint(0)],
            phi: vec![
                vec![rat(5, 6), rat(1, 6)],
                vec![rat(1, 6), rat(5, 6)],
                vec![rat(1, 2), rat(1, 2)],
            ],
        }],
    };
    witness.verify(&p, &pp).unwrap();
}

#[test]
fn reflexivity_of_all_three_orders() {
    let mut rng = random::seeded(11);
    for trial in 0..20 {
        let n_states = 1 + (trial % 3);
        let game = random::game(&mut rng, n_states, &[2, 2], false);
        let mon = random::monitoring(&mut rng, &game, 2 + trial % 2, true);
        let p = joint_kernel(&game, &mon).unwrap();
        assert!(check_weighted_garbling(&p, &p).unwrap().holds());
        assert!(check_joint_garbling(&p, &p).unwrap().holds());
        let v = check_expost_garbling(&mon, &mon, n_states, game.profiles().total()).unwrap();
        assert!(v.holds());
    }
}

#[test]
fn identity_witness_certifies_reflexivity() {
    let (p, _, _) = example2_kernels((1, 12));
    GarblingWitness::identity(&p).verify(&p, &p).unwrap();
}

#[test]
fn transitivity_by_witness_composition() {
    let mut rng = random::seeded(23);
    for trial in 0..10 {
        let n_states = 1 + (trial % 2);
        let game = random::game(&mut rng, n_states, &[2, 2], true);
        let source = random::monitoring(&mut rng, &game, 3, false);
        let (mid_mon, _) = random::garbled_monitoring(
            &mut rng,
            &game,
            &source,
            3,
            random::GarblingFlavor::Blend,
        );
        let (tgt_mon, _) = random::garbled_monitoring(
            &mut rng,
            &game,
            &mid_mon,
            2,
            random::GarblingFlavor::SignalChannel,
        );
        let p2 = joint_kernel(&game, &source).unwrap();
        let p1 = joint_kernel(&game, &mid_mon).unwrap();
        let p0 = joint_kernel(&game, &tgt_mon).unwrap();

        let w1 = match check_weighted_garbling(&p0, &p1).unwrap() {
            GarblingVerdict::Holds(w) => w,
            GarblingVerdict::Fails(f) => panic!("step 1 must hold: {f:?}"),
        };
        let w2 = match check_weighted_garbling(&p1, &p2).unwrap() {
            GarblingVerdict::Holds(w) => w,
            GarblingVerdict::Fails(f) => panic!("step 2 must hold: {f:?}"),
        };
        let composed = compose_witnesses(&w1, &w2);
        composed.verify(&p0, &p2).unwrap();
    }
}

#[test]
fn null_signal_mixture_is_a_joint_garbling() {
    // With weight size 2, the half-and-half mixture with a null signal is a
    // standard garbling of the richer structure.
    let (game, mon, mon_prime) = make_example1(rat(1, 4), rat(1, 8), rat(1, 2)).unwrap();
    let p = joint_kernel(&game, &mon).unwrap();
    let pp = joint_kernel(&game, &mon_prime).unwrap();
    let w = match check_weighted_garbling(&p, &pp).unwrap() {
        GarblingVerdict::Holds(w) => w,
        _ => panic!("weighted garbling holds"),
    };
    let size = weight_size(&w);
    assert_eq!(size, rint(2));
    let mixture = null_extended_mixture(&p, &(Rational::one() / &size));
    assert!(check_joint_garbling(&mixture, &pp).unwrap().holds());
}

#[test]
fn conditionally_perfect_structure_dominates_everything() {
    let mut rng = random::seeded(31);
    for _ in 0..5 {
        let game = random::game(&mut rng, 2, &[2, 2], false);
        // Half the mass reveals the profile, half is a shared noise signal.
        let n_prof = game.profiles().total();
        let signals: Vec<String> = (0..n_prof)
            .map(|a| format!("tell{a}"))
            .chain(std::iter::once("noise".into()))
            .collect();
        let law = (0..game.n_states())
            .map(|_| {
                (0..n_prof)
                    .map(|a| {
                        (0..game.n_states())
                            .map(|_| {
                                let mut row = vec![rint(0); n_prof + 1];
                                row[a] = rat(1, 2);
                                row[n_prof] = rat(1, 2);
                                row
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let perfect = MonitoringStructure::new(signals, law).unwrap();
        let mon = random::monitoring(&mut rng, &game, 2, true);
        let p = joint_kernel(&game, &mon).unwrap();
        let pp = joint_kernel(&game, &perfect).unwrap();
        let v = check_weighted_garbling(&p, &pp).unwrap();
        assert!(v.holds());
        v.witness().unwrap().verify(&p, &pp).unwrap();
    }
}

#[test]
fn example1_strict_weighted_garbling_has_common_support() {
    let (game, mon, mon_prime) = make_example1(rat(1, 4), rat(1, 8), rat(1, 2)).unwrap();
    let p = joint_kernel(&game, &mon).unwrap();
    let pp = joint_kernel(&game, &mon_prime).unwrap();
    let v = check_strict_weighted_garbling(&p, &pp).unwrap();
    let w = match v {
        GarblingVerdict::Holds(w) => w,
        GarblingVerdict::Fails(f) => panic!("strict weighted garbling must hold: {f:?}"),
    };
    // Full support on both (single-state) outcomes.
    assert_eq!(w.supports, vec![vec![0, 1]]);
    w.witness.verify(&p, &pp).unwrap();
    for ch in &w.witness.per_state {
        assert_eq!(ch.common_support().unwrap(), vec![0, 1]);
    }
}

#[test]
fn knife_edge_equal_noise_is_not_strict() {
    // With eta' = eta the unique reproduction channel is the identity on
    // the arriving signals, whose columns have singleton supports: plain
    // weighted garbling holds but the strict variant fails.
    let game = sgmon::apps::make_pd(rat(1, 2), rat(1, 4)).unwrap();
    let mon = sgmon::apps::example1_monitor(rat(1, 4)).unwrap();
    let mon_prime = sgmon::apps::example1_monitor_prime(rat(1, 4), rat(1, 2)).unwrap();
    let p = joint_kernel(&game, &mon).unwrap();
    let pp = joint_kernel(&game, &mon_prime).unwrap();
    assert!(check_weighted_garbling(&p, &pp).unwrap().holds());
    assert!(!check_strict_weighted_garbling(&p, &pp).unwrap().holds());
}

#[test]
fn self_strictness_depends_on_channel_slack() {
    // Action-independent full-support kernel: the rank-one channel that
    // redraws the outcome from its own law is fully positive, so the kernel
    // is a strict weighted garbling of itself.
    let mut rng = random::seeded(47);
    let game = random::game(&mut rng, 1, &[2, 2], true);
    let flat_law = vec![(0..4).map(|_| vec![vec![rat(1, 3), rat(2, 3)]]).collect()];
    let flat = MonitoringStructure::new(vec!["g".into(), "b".into()], flat_law).unwrap();
    let p = joint_kernel(&game, &flat).unwrap();
    assert!(check_strict_weighted_garbling(&p, &p).unwrap().holds());

    // Informative binary signal: the self-reproduction channel is the
    // identity, uniquely, so the strict variant fails against itself.
    let pd = sgmon::apps::make_pd(rat(1, 2), rat(1, 4)).unwrap();
    let mon = sgmon::apps::example1_monitor(rat(1, 4)).unwrap();
    let q = joint_kernel(&pd, &mon).unwrap();
    assert!(check_weighted_garbling(&q, &q).unwrap().holds());
    assert!(!check_strict_weighted_garbling(&q, &q).unwrap().holds());
}

#[test]
fn p_weighted_with_full_targets_collapses_to_weighted() {
    let (game, mon, mon_prime) = make_example1(rat(1, 4), rat(1, 8), rat(1, 2)).unwrap();
    let p = joint_kernel(&game, &mon).unwrap();
    let pp = joint_kernel(&game, &mon_prime).unwrap();
    let all: Vec<usize> = game.profiles().iter().collect();
    let deviations: BTreeMap<usize, Vec<usize>> =
        all.iter().map(|&a| (a, all.clone())).collect();
    let collapsed = check_p_weighted_garbling(&p, &pp, &all, &deviations, false).unwrap();
    let weighted = check_weighted_garbling(&p, &pp).unwrap();
    assert_eq!(collapsed.holds(), weighted.holds());

    // And unilateral closures reproduce the definition's deviation sets.
    let sets: BTreeMap<usize, Vec<usize>> = all
        .iter()
        .map(|&a| (a, unilateral_closure(game.profiles(), a)))
        .collect();
    assert_eq!(sets[&0], vec![0, 1, 2]); // CC, CD, DC
    let v = check_p_weighted_garbling(&p, &pp, &[0], &sets, false).unwrap();
    assert!(v.holds());
    v.witness()
        .unwrap()
        .verify(&p, &pp, &sets)
        .unwrap();
}

#[test]
fn conditional_wg_on_example2_and_noise_counterexample() {
    let (sym, mon, mon_prime) = make_example2(rat(1, 6)).unwrap();
    let n_prof = sym.game().profiles().total();
    // The source's law conditional on (s, s1) refines the target's law
    // conditional on any (s, t).
    for s in 0..2 {
        for t in 0..2 {
            let v = check_conditional_wg(&mon, (s, t), &mon_prime, (s, 0), n_prof).unwrap();
            let w = match v {
                GarblingVerdict::Holds(w) => w,
                GarblingVerdict::Fails(f) => panic!("conditional garbling holds: {f:?}"),
            };
            w.verify(&mon, (s, t), &mon_prime, (s, 0), n_prof).unwrap();
        }
    }
    // Itself: trivially.
    assert!(check_conditional_wg(&mon, (0, 0), &mon, (0, 0), n_prof)
        .unwrap()
        .holds());
    // Pure noise cannot reproduce an informative law.
    let noise_law = (0..2)
        .map(|_| {
            (0..n_prof)
                .map(|_| vec![vec![rat(1, 2), rat(1, 2)]; 2])
                .collect()
        })
        .collect();
    let noise = MonitoringStructure::new(vec!["c".into(), "d".into()], noise_law).unwrap();
    assert!(!check_conditional_wg(&mon, (0, 0), &noise, (0, 0), n_prof)
        .unwrap()
        .holds());
}

#[test]
fn witness_from_conditionals_reproduces_example2() {
    let (sym, mon, mon_prime) = make_example2(rat(1, 6)).unwrap();
    // The source signal is sharpest when the next state is s1; map every
    // transition there.
    let maps: Vec<BTreeMap<usize, usize>> = (0..2)
        .map(|_| [(0usize, 0usize), (1, 0)].into_iter().collect())
        .collect();
    let w = witness_from_conditionals(sym.game(), &mon, &mon_prime, &maps, None).unwrap();
    let p = joint_kernel(sym.game(), &mon).unwrap();
    let pp = joint_kernel(sym.game(), &mon_prime).unwrap();
    w.verify(&p, &pp).unwrap();
}

#[test]
fn witness_from_conditionals_single_state_collapse() {
    let (game, mon, mon_prime) = make_example1(rat(1, 4), rat(1, 8), rat(1, 2)).unwrap();
    let maps = vec![[(0usize, 0usize)].into_iter().collect()];
    let w = witness_from_conditionals(&game, &mon, &mon_prime, &maps, None).unwrap();
    let p = joint_kernel(&game, &mon).unwrap();
    let pp = joint_kernel(&game, &mon_prime).unwrap();
    w.verify(&p, &pp).unwrap();
}

#[test]
fn witness_from_conditionals_random_instances() {
    let mut rng = random::seeded(53);
    for _ in 0..5 {
        let game = random::game(&mut rng, 2, &[2, 2], true);
        let source = random::monitoring(&mut rng, &game, 3, false);
        let (mon, _) = random::garbled_monitoring(
            &mut rng,
            &game,
            &source,
            2,
            random::GarblingFlavor::SignalChannel,
        );
        let maps: Vec<BTreeMap<usize, usize>> = (0..2)
            .map(|_| [(0usize, 0usize), (1, 1)].into_iter().collect())
            .collect();
        let w = witness_from_conditionals(&game, &mon, &source, &maps, None).unwrap();
        let p = joint_kernel(&game, &mon).unwrap();
        let pp = joint_kernel(&game, &source).unwrap();
        w.verify(&p, &pp).unwrap();
    }
}

#[test]
fn map_outside_support_is_rejected() {
    let (sym, mon, mon_prime) = make_example2(rat(1, 12)).unwrap();
    // Shrink the support artificially by mapping to a state with q = 0:
    // with the uniform transition every state is in the support, so an
    // out-of-range key is the error path here.
    let maps: Vec<BTreeMap<usize, usize>> = (0..2)
        .map(|_| [(0usize, 5usize)].into_iter().collect())
        .collect();
    assert!(matches!(
        witness_from_conditionals(sym.game(), &mon, &mon_prime, &maps, None),
        Err(GarblingError::MapOutsideSupport { .. })
    ));
}

fn binary_count_monitor(
    probs_good: [Rational; 3],
) -> impl Fn(&StochasticGame) -> MonitoringStructure {
    move |game: &StochasticGame| {
        let space = game.profiles();
        let law = (0..game.n_states())
            .map(|_| {
                space
                    .iter()
                    .map(|a| {
                        let k = space.decode(a).iter().filter(|&&ai| ai == 0).count();
                        let g = probs_good[k].clone();
                        (0..game.n_states())
                            .map(|_| vec![g.clone(), Rational::one() - &g])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MonitoringStructure::new(vec!["g".into(), "b".into()], law).unwrap()
    }
}

#[test]
fn likelihood_profile_matches_direct_ratios() {
    // Binary signal, two states, action-independent q: the ratio bounds are
    // f(g|k)/f(g|k-1) and its complement.
    let mut rng = random::seeded(3);
    let game = random::game(&mut rng, 2, &[2, 2], true);
    let sym = sgmon::game::SymmetricGame::new(game.clone()).unwrap();
    let mon = binary_count_monitor([rat(1, 3), rat(1, 2), rat(2, 3)])(sym.game());
    let kern = joint_kernel(sym.game(), &mon).unwrap();
    let profile = likelihood_profile(&kern, &sym, 0);
    for s in 0..2 {
        let full = &profile.per_state[s][1];
        assert_eq!(full.hi, ExtRational::Finite(rat(4, 3)));
        assert_eq!(full.lo, ExtRational::Finite(rat(2, 3)));
    }

    // Equal columns give the degenerate interval [1, 1].
    let flat = binary_count_monitor([rat(1, 2), rat(1, 2), rat(1, 2)])(sym.game());
    let kern = joint_kernel(sym.game(), &flat).unwrap();
    let profile = likelihood_profile(&kern, &sym, 0);
    assert_eq!(profile.per_state[0][1].lo, ExtRational::Finite(rint(1)));
    assert_eq!(profile.per_state[0][1].hi, ExtRational::Finite(rint(1)));

    // A signal that never occurs without full effort gives +infinity.
    let extreme = binary_count_monitor([rint(0), rint(0), rint(1)])(sym.game());
    let kern = joint_kernel(sym.game(), &extreme).unwrap();
    let profile = likelihood_profile(&kern, &sym, 0);
    assert_eq!(profile.per_state[0][1].hi, ExtRational::PosInfinity);
}

#[test]
fn ratio_containment_builds_a_verified_witness() {
    // Target ratios within [2/3, 3/2]; source strictly wider.
    let mut rng = random::seeded(5);
    let game = random::game(&mut rng, 2, &[2, 2], true);
    let sym = sgmon::game::SymmetricGame::new(game.clone()).unwrap();
    let mon = binary_count_monitor([rat(1, 3), rat(1, 2), rat(2, 3)])(sym.game());
    let mon_prime = binary_count_monitor([rat(1, 4), rat(1, 2), rat(3, 4)])(sym.game());
    let p = joint_kernel(sym.game(), &mon).unwrap();
    let pp = joint_kernel(sym.game(), &mon_prime).unwrap();
    let prof = likelihood_profile(&p, &sym, 0);
    let prof_prime = likelihood_profile(&pp, &sym, 0);
    let cmp = strict_garbling_by_likelihood_ratios(&prof, &prof_prime, &p, &pp, &sym, 0).unwrap();
    assert!(cmp.contained);
    let witness = cmp.witness.unwrap();
    let full = effort_profile(&sym, 0, 2);
    let none = effort_profile(&sym, 0, 0);
    let deviations: BTreeMap<usize, Vec<usize>> = [
        (full, unilateral_closure(sym.game().profiles(), full)),
        (none, unilateral_closure(sym.game().profiles(), none)),
    ]
    .into_iter()
    .collect();
    witness.verify(&p, &pp, &deviations).unwrap();

    // Equal profiles: no strict containment.
    let cmp = strict_garbling_by_likelihood_ratios(&prof, &prof, &p, &p, &sym, 0).unwrap();
    assert!(!cmp.contained);
}

#[test]
fn uninformative_target_contained_in_any_informative_source() {
    let mut rng = random::seeded(9);
    let game = random::game(&mut rng, 2, &[2, 2], true);
    let sym = sgmon::game::SymmetricGame::new(game.clone()).unwrap();
    let flat = binary_count_monitor([rat(1, 2), rat(1, 2), rat(1, 2)])(sym.game());
    let sharp = binary_count_monitor([rat(1, 4), rat(1, 2), rat(3, 4)])(sym.game());
    let p = joint_kernel(sym.game(), &flat).unwrap();
    let pp = joint_kernel(sym.game(), &sharp).unwrap();
    let prof = likelihood_profile(&p, &sym, 0);
    let prof_prime = likelihood_profile(&pp, &sym, 0);
    let cmp = strict_garbling_by_likelihood_ratios(&prof, &prof_prime, &p, &pp, &sym, 0).unwrap();
    assert!(cmp.contained);
    cmp.witness.unwrap();
}

#[test]
fn weight_normalization_is_automatic_for_feasible_channels() {
    let mut rng = random::seeded(17);
    for _ in 0..5 {
        let game = random::game(&mut rng, 2, &[2, 2], true);
        let source = random::monitoring(&mut rng, &game, 3, false);
        let (mon, _) = random::garbled_monitoring(
            &mut rng,
            &game,
            &source,
            2,
            random::GarblingFlavor::Blend,
        );
        let p = joint_kernel(&game, &mon).unwrap();
        let pp = joint_kernel(&game, &source).unwrap();
        let w = match check_weighted_garbling(&p, &pp).unwrap() {
            GarblingVerdict::Holds(w) => w,
            _ => panic!("holds by construction"),
        };
        // verify() checks the normalization identity explicitly.
        w.verify(&p, &pp).unwrap();
    }
}
