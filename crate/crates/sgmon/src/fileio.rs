//! Game-file schema: a single structured text document holding the game
//! tables and any number of named monitoring structures, with every
//! rational encoded as an integer or a "num/den" string. Emission is
//! canonical, so emit -> parse -> emit is byte-identical.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameError, MonitoringStructure, StochasticGame};
use crate::rat::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("document is not valid JSON: {0}")]
    Json(String),
    #[error("bad rational at {context}: {detail}")]
    BadRational { context: String, detail: String },
    #[error("missing entry for {0}")]
    Missing(String),
    #[error("unknown name {name} in {context}")]
    UnknownName { name: String, context: String },
    #[error("structural error: {0}")]
    Structure(#[from] GameError),
}

/// A parsed game file: the game plus its named monitoring structures.
#[derive(Debug, Clone)]
pub struct GameDocument {
    pub game: StochasticGame,
    pub monitors: BTreeMap<String, MonitoringStructure>,
}

/// Rational in the wire format: a JSON integer or a "num/den" string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RatValue {
    Int(i64),
    Text(String),
}

impl RatValue {
    fn encode(r: &Rational) -> RatValue {
        if r.is_integer() {
            let n = r.numer();
            if let Ok(small) = i64::try_from(n.clone()) {
                return RatValue::Int(small);
            }
        }
        RatValue::Text(format_rational(r))
    }

    fn decode(&self, context: &str) -> Result<Rational, FileError> {
        match self {
            RatValue::Int(v) => Ok(Rational::from_integer(BigInt::from(*v))),
            RatValue::Text(t) => parse_rational(t).map_err(|e| FileError::BadRational {
                context: context.to_string(),
                detail: e.to_string(),
            }),
        }
    }
}

type Table3 = BTreeMap<String, BTreeMap<String, BTreeMap<String, RatValue>>>;
type Table4 = BTreeMap<String, BTreeMap<String, BTreeMap<String, BTreeMap<String, RatValue>>>>;

#[derive(Debug, Serialize, Deserialize)]
struct MonitorFile {
    signals: Vec<String>,
    /// law[state][profile][next][signal]
    law: Table4,
}

#[derive(Debug, Serialize, Deserialize)]
struct GameFile {
    states: Vec<String>,
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    /// payoffs[player][state][profile]
    payoffs: Table3,
    /// transition[state][profile][next]
    transition: Table3,
    monitors: BTreeMap<String, MonitorFile>,
}

fn profile_key(game: &StochasticGame, profile: usize) -> String {
    game.profiles()
        .decode(profile)
        .iter()
        .enumerate()
        .map(|(i, &a)| game.actions[i][a].clone())
        .collect::<Vec<_>>()
        .join(",")
}

/// Canonical emission of a document.
pub fn to_text(doc: &GameDocument) -> String {
    let game = &doc.game;
    let mut payoffs: Table3 = BTreeMap::new();
    for (i, player) in game.players.iter().enumerate() {
        let mut per_state = BTreeMap::new();
        for (s, state) in game.states.iter().enumerate() {
            let mut per_profile = BTreeMap::new();
            for a in game.profiles().iter() {
                per_profile.insert(profile_key(game, a), RatValue::encode(game.payoff(i, s, a)));
            }
            per_state.insert(state.clone(), per_profile);
        }
        payoffs.insert(player.clone(), per_state);
    }
    let mut transition: Table3 = BTreeMap::new();
    for (s, state) in game.states.iter().enumerate() {
        let mut per_profile = BTreeMap::new();
        for a in game.profiles().iter() {
            let mut per_next = BTreeMap::new();
            for (t, next) in game.states.iter().enumerate() {
                per_next.insert(next.clone(), RatValue::encode(game.transition(s, a, t)));
            }
            per_profile.insert(profile_key(game, a), per_next);
        }
        transition.insert(state.clone(), per_profile);
    }
    let mut monitors = BTreeMap::new();
    for (name, mon) in &doc.monitors {
        let mut law: Table4 = BTreeMap::new();
        for (s, state) in game.states.iter().enumerate() {
            let mut per_profile = BTreeMap::new();
            for a in game.profiles().iter() {
                let mut per_next = BTreeMap::new();
                for (t, next) in game.states.iter().enumerate() {
                    let mut per_signal = BTreeMap::new();
                    for (y, sig) in mon.signals.iter().enumerate() {
                        per_signal.insert(sig.clone(), RatValue::encode(mon.f(s, a, t, y)));
                    }
                    per_next.insert(next.clone(), per_signal);
                }
                per_profile.insert(profile_key(game, a), per_next);
            }
            law.insert(state.clone(), per_profile);
        }
        monitors.insert(
            name.clone(),
            MonitorFile {
                signals: mon.signals.clone(),
                law,
            },
        );
    }
    let file = GameFile {
        states: game.states.clone(),
        players: game.players.clone(),
        actions: game.actions.clone(),
        payoffs,
        transition,
        monitors,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    text
}

fn lookup<'a, T>(
    map: &'a BTreeMap<String, T>,
    key: &str,
    context: &str,
) -> Result<&'a T, FileError> {
    map.get(key).ok_or_else(|| FileError::Missing(format!("{context} -> {key}")))
}

/// Parses and validates a document; every index must be fully populated and
/// every name declared.
pub fn from_text(text: &str) -> Result<GameDocument, FileError> {
    let file: GameFile =
        serde_json::from_str(text).map_err(|e| FileError::Json(e.to_string()))?;

    // name tables
    for (i, acts) in file.actions.iter().enumerate() {
        if acts.is_empty() {
            return Err(FileError::Missing(format!("actions of player {i}")));
        }
    }
    if file.actions.len() != file.players.len() {
        return Err(FileError::Missing("one action set per player".into()));
    }
    let n_profiles: usize = file.actions.iter().map(|a| a.len()).product();
    let keys: Vec<String> = {
        // canonical key order: mixed radix over action names
        let mut out = Vec::with_capacity(n_profiles);
        let sizes: Vec<usize> = file.actions.iter().map(|a| a.len()).collect();
        for mut idx in 0..n_profiles {
            let mut parts = vec![0usize; sizes.len()];
            for (slot, n) in parts.iter_mut().zip(&sizes).rev() {
                *slot = idx % n;
                idx /= n;
            }
            out.push(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| file.actions[i][a].clone())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        out
    };

    let payoff: Vec<Vec<Vec<Rational>>> = file
        .players
        .iter()
        .map(|player| {
            let per_state = lookup(&file.payoffs, player, "payoffs")?;
            file.states
                .iter()
                .map(|state| {
                    let per_profile = lookup(per_state, state, &format!("payoffs.{player}"))?;
                    keys.iter()
                        .map(|key| {
                            lookup(per_profile, key, &format!("payoffs.{player}.{state}"))?
                                .decode(&format!("payoffs.{player}.{state}.{key}"))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let transition: Vec<Vec<Vec<Rational>>> = file
        .states
        .iter()
        .map(|state| {
            let per_profile = lookup(&file.transition, state, "transition")?;
            keys.iter()
                .map(|key| {
                    let per_next =
                        lookup(per_profile, key, &format!("transition.{state}"))?;
                    file.states
                        .iter()
                        .map(|next| {
                            lookup(per_next, next, &format!("transition.{state}.{key}"))?
                                .decode(&format!("transition.{state}.{key}.{next}"))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let game = StochasticGame::new(
        file.states.clone(),
        file.players.clone(),
        file.actions.clone(),
        payoff,
        transition,
    )?;

    let mut monitors = BTreeMap::new();
    for (name, mf) in &file.monitors {
        let law: Vec<Vec<Vec<Vec<Rational>>>> = file
            .states
            .iter()
            .map(|state| {
                let per_profile = lookup(&mf.law, state, &format!("monitors.{name}.law"))?;
                keys.iter()
                    .map(|key| {
                        let per_next = lookup(
                            per_profile,
                            key,
                            &format!("monitors.{name}.law.{state}"),
                        )?;
                        file.states
                            .iter()
                            .map(|next| {
                                let per_signal = lookup(
                                    per_next,
                                    next,
                                    &format!("monitors.{name}.law.{state}.{key}"),
                                )?;
                                mf.signals
                                    .iter()
                                    .map(|sig| {
                                        lookup(
                                            per_signal,
                                            sig,
                                            &format!(
                                                "monitors.{name}.law.{state}.{key}.{next}"
                                            ),
                                        )?
                                        .decode(&format!(
                                            "monitors.{name}.law.{state}.{key}.{next}.{sig}"
                                        ))
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        monitors.insert(
            name.clone(),
            MonitoringStructure::new(mf.signals.clone(), law)?,
        );
    }
    Ok(GameDocument { game, monitors })
}

/// Canonical JSON value for a rational, shared by the structured reports.
pub fn rational_json(r: &Rational) -> serde_json::Value {
    if r.is_integer() {
        if let Ok(small) = i64::try_from(r.numer().clone()) {
            return serde_json::Value::from(small);
        }
    }
    let _ = BigInt::one();
    serde_json::Value::from(format_rational(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::make_example2;
    use crate::rat::rat;

    #[test]
    fn round_trip_is_byte_identical() {
        let (sym, mon, mon_prime) = make_example2(rat(1, 12)).unwrap();
        let mut monitors = BTreeMap::new();
        monitors.insert("Pi".to_string(), mon);
        monitors.insert("PiPrime".to_string(), mon_prime);
        let doc = GameDocument {
            game: sym.game().clone(),
            monitors,
        };
        let text = to_text(&doc);
        let parsed = from_text(&text).unwrap();
        let text2 = to_text(&parsed);
        assert_eq!(text, text2);
        assert_eq!(parsed.game, *sym.game());
    }

    #[test]
    fn missing_entries_are_diagnosed_with_a_path() {
        let (sym, mon, _) = make_example2(rat(0, 1)).unwrap();
        let mut monitors = BTreeMap::new();
        monitors.insert("Pi".to_string(), mon);
        let doc = GameDocument {
            game: sym.game().clone(),
            monitors,
        };
        let text = to_text(&doc);
        let broken = text.replace("\"C,C\"", "\"C,X\"");
        let err = from_text(&broken).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("C,C"), "unexpected message: {msg}");
    }

    #[test]
    fn bad_rational_is_reported() {
        let (sym, mon, _) = make_example2(rat(0, 1)).unwrap();
        let mut monitors = BTreeMap::new();
        monitors.insert("Pi".to_string(), mon);
        let doc = GameDocument {
            game: sym.game().clone(),
            monitors,
        };
        let text = to_text(&doc);
        let broken = text.replacen("\"2/3\"", "\"2//3\"", 1);
        assert!(matches!(
            from_text(&broken),
            Err(FileError::BadRational { .. })
        ));
    }

    #[test]
    fn integers_round_trip_as_numbers() {
        let (sym, mon, _) = make_example2(rat(0, 1)).unwrap();
        let mut monitors = BTreeMap::new();
        monitors.insert("Pi".to_string(), mon);
        let doc = GameDocument {
            game: sym.game().clone(),
            monitors,
        };
        let text = to_text(&doc);
        // transition mass 1/2 stays a string; payoff 0 becomes a number
        assert!(text.contains("\"1/2\""));
        assert!(text.contains(": 0"));
    }
}
