//! Chain utilities under randomized instances: invariance transfer for
//! signed strategies, and monotonicity of admissibility under garbling.

use rand::Rng;

use sgmon::apps::random;
use sgmon::game::{joint_kernel, StochasticGame};
use sgmon::markov::*;
use sgmon::rat::{rat, rint, sum, Rational};

fn lazy_version(game: &StochasticGame) -> StochasticGame {
    let rows = (0..game.n_states())
        .map(|s| {
            game.profiles()
                .iter()
                .map(|a| {
                    (0..game.n_states())
                        .map(|t| {
                            let mut v = game.transition(s, a, t) / rint(2);
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
    StochasticGame::new(
        game.states.clone(),
        game.players.clone(),
        game.actions.clone(),
        (0..game.n_players())
            .map(|i| {
                (0..game.n_states())
                    .map(|s| {
                        game.profiles()
                            .iter()
                            .map(|a| game.payoff(i, s, a).clone())
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        rows,
    )
    .unwrap()
}

fn random_signed_strategy(
    rng: &mut rand_chacha::ChaCha8Rng,
    game: &StochasticGame,
) -> ExtendedMarkovStrategy {
    let n_prof = game.profiles().total();
    let weights = (0..game.n_states())
        .map(|_| {
            let mut row: Vec<Rational> = (0..n_prof - 1)
                .map(|_| rat(rng.gen_range(-4i64..=4), rng.gen_range(1..=3)))
                .collect();
            let tail = rint(1) - sum(&row);
            row.push(tail);
            row
        })
        .collect();
    ExtendedMarkovStrategy { weights }
}

#[test]
fn invariance_transfers_to_lazy_chains() {
    let mut rng = random::seeded(101);
    let mut checked = 0;
    for trial in 0..12 {
        let n_states = 2 + trial % 2;
        let game = random::game(&mut rng, n_states, &[2, 2], false);
        let lazy = lazy_version(&game);
        let alpha = random_signed_strategy(&mut rng, &game);
        let Some(beta) = solve_signed_invariant(&game, &alpha) else {
            continue;
        };
        let result = verify_invariance_transfer(&game, &lazy, &alpha, &beta).unwrap();
        assert!(result.is_ok(), "counterexample at trial {trial}");
        checked += 1;
    }
    assert!(checked >= 10, "too few instances had a signed invariant");
}

#[test]
fn transfer_requires_same_invariants() {
    let mut rng = random::seeded(103);
    let game = random::game(&mut rng, 2, &[2, 1], false);
    let other = random::game(&mut rng, 2, &[2, 1], false);
    let alpha = random_signed_strategy(&mut rng, &game);
    let Some(beta) = solve_signed_invariant(&game, &alpha) else {
        panic!("signed invariant exists for a full-support chain");
    };
    assert!(matches!(
        verify_invariance_transfer(&game, &other, &alpha, &beta),
        Err(MarkovError::DifferentInvariants { .. })
    ));
}

#[test]
fn genuine_mixed_strategy_invariant_transfers() {
    let mut rng = random::seeded(107);
    let game = random::game(&mut rng, 3, &[2, 2], false);
    let lazy = lazy_version(&game);
    // A proper mixture is a special signed strategy.
    let n_prof = game.profiles().total();
    let weights = (0..3).map(|_| random::distribution(&mut rng, n_prof, 5)).collect();
    let alpha = ExtendedMarkovStrategy { weights };
    let beta = solve_signed_invariant(&game, &alpha).unwrap();
    let result = verify_invariance_transfer(&game, &lazy, &alpha, &beta).unwrap();
    assert!(result.is_ok());
}

#[test]
fn pd_cooperation_is_admissible_under_informative_monitoring() {
    let (game, mon, _) =
        sgmon::apps::make_example1(rat(1, 4), rat(1, 8), rat(1, 2)).unwrap();
    let kern = joint_kernel(&game, &mon).unwrap();
    // Mutual cooperation: the kernel separates C from D, so the only
    // kernel-equivalent deviation is cooperation itself.
    let cc = vec![vec![rint(1), rint(0)], vec![rint(1), rint(0)]];
    assert!(check_admissible(&game, &kern, &cc).unwrap().is_ok());
}

#[test]
fn admissibility_is_monotone_under_weighted_garbling() {
    let mut rng = random::seeded(109);
    let mut violations_seen = 0;
    for trial in 0..10 {
        let n_states = 1 + trial % 2;
        let game = random::game(&mut rng, n_states, &[2, 2], true);
        let source = random::monitoring(&mut rng, &game, 3, false);
        // Odd trials garble all the way down to a single signal, which
        // erases action information and makes non-equilibrium profiles
        // inadmissible.
        let n_sig = if trial % 2 == 0 { 2 } else { 1 };
        let (mon, _) = random::garbled_monitoring(
            &mut rng,
            &game,
            &source,
            n_sig,
            random::GarblingFlavor::Rerandomizing,
        );
        let coarse = joint_kernel(&game, &mon).unwrap();
        let fine = joint_kernel(&game, &source).unwrap();
        // Random mixed profile with rational weights.
        let mixtures: Vec<Vec<Rational>> = (0..2)
            .map(|_| random::distribution(&mut rng, 2, 4))
            .collect();
        let coarse_ok = check_admissible(&game, &coarse, &mixtures).unwrap().is_ok();
        let fine_ok = check_admissible(&game, &fine, &mixtures).unwrap().is_ok();
        if coarse_ok {
            assert!(
                fine_ok,
                "admissible under the garbled kernel must stay admissible under the finer one"
            );
        } else {
            violations_seen += 1;
        }
    }
    // The suite should exercise both branches.
    assert!(violations_seen > 0);
}
