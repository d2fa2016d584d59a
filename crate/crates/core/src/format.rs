//! JSON document formats for games and outcomes.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::extended::{ExtendedGame, SupportEntry};
use crate::game::{Game, Model, Outcome};
use crate::scalar::{parse_rational, Scalar};

/// The four-sender, two-state reference game.
pub const G1_JSON: &str = r#"{
  "model": "base",
  "states": ["w1","w2"],
  "prior": ["1/2","1/2"],
  "senders": 4,
  "receiver_utility": {"w1": ["1","0"], "w2": ["0","1"]},
  "sender_utility": [
    {"w1": ["1","0"], "w2": ["1","0"]},
    {"w1": ["0","1"], "w2": ["1","0"]},
    {"w1": ["0","1"], "w2": ["1","0"]},
    {"w1": ["0","1"], "w2": ["0","1"]}
  ]
}
"#;

/// A numeric literal: either a JSON string (`"1/3"`, `"0.5"`) or a JSON number.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Literal {
    Text(String),
    Number(serde_json::Number),
}

impl Literal {
    fn value<T: Scalar>(&self) -> Result<T> {
        match self {
            Literal::Text(s) => T::parse_literal(s),
            Literal::Number(n) => T::parse_literal(&n.to_string()),
        }
    }

    fn exact(&self) -> Result<num_rational::BigRational> {
        match self {
            Literal::Text(s) => parse_rational(s),
            Literal::Number(n) => parse_rational(&n.to_string()),
        }
    }
}

fn pair<T: Scalar>(p: &[Literal; 2]) -> Result<[T; 2]> {
    Ok([p[0].value()?, p[1].value()?])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseDoc {
    #[allow(dead_code)]
    model: String,
    states: Vec<String>,
    prior: Vec<Literal>,
    senders: usize,
    receiver_utility: BTreeMap<String, [Literal; 2]>,
    sender_utility: Vec<BTreeMap<String, [Literal; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportDoc {
    profile: Vec<String>,
    prob: Literal,
    receiver_utility: [Literal; 2],
    sender_utility: Vec<[Literal; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtendedDoc {
    #[allow(dead_code)]
    model: String,
    signals: Vec<Vec<String>>,
    support: Vec<SupportDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeDoc {
    o_star: BTreeMap<String, Literal>,
}

#[derive(Debug, Deserialize)]
struct ModelTag {
    model: String,
}

/// Either kind of game document.
#[derive(Debug, Clone)]
pub enum AnyGame<T> {
    Base(Game<T>),
    Extended(ExtendedGame<T>),
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn state_table<T: Scalar>(
    states: &[String],
    table: &BTreeMap<String, [Literal; 2]>,
    owner: &str,
) -> Result<Vec<[T; 2]>> {
    if let Some(extra) = table.keys().find(|k| !states.contains(k)) {
        return Err(Error::InvalidGame(format!("{owner} mentions unknown state {extra:?}")));
    }
    states
        .iter()
        .map(|s| {
            let p = table
                .get(s)
                .ok_or_else(|| Error::InvalidGame(format!("{owner} has no entry for state {s:?}")))?;
            pair(p)
        })
        .collect()
}

/// Parses a base game document.
pub fn parse_game<T: Scalar>(text: &str) -> Result<Game<T>> {
    let tag: ModelTag = serde_json::from_str(text).map_err(json_err)?;
    if tag.model != "base" {
        return Err(Error::Parse(format!("expected model \"base\", found {:?}", tag.model)));
    }
    let doc: BaseDoc = serde_json::from_str(text).map_err(json_err)?;
    if doc.senders == 0 {
        return Err(Error::InvalidGame("at least one sender is required".into()));
    }
    if doc.sender_utility.len() != doc.senders {
        return Err(Error::InvalidGame(format!(
            "\"senders\" is {} but sender_utility has {} entries",
            doc.senders,
            doc.sender_utility.len()
        )));
    }
    // The sum check runs on exact values even for float scalars.
    let exact_prior = doc.prior.iter().map(Literal::exact).collect::<Result<Vec<_>>>()?;
    if doc.prior.len() == doc.states.len() {
        let total = exact_prior
            .iter()
            .fold(num_rational::BigRational::from_integer(0.into()), |a, p| a + p);
        if total != num_rational::BigRational::from_integer(1.into()) {
            return Err(Error::PriorSum(crate::scalar::render_rational(&total)));
        }
    }
    let prior = exact_prior.iter().map(T::from_rational).collect();
    let receiver = state_table(&doc.states, &doc.receiver_utility, "receiver_utility")?;
    let senders = doc
        .sender_utility
        .iter()
        .enumerate()
        .map(|(i, t)| state_table(&doc.states, t, &format!("sender_utility[{}]", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    Game::new(doc.states, prior, receiver, senders)
}

/// Parses an extended game document.
pub fn parse_extended_game<T: Scalar>(text: &str) -> Result<ExtendedGame<T>> {
    let tag: ModelTag = serde_json::from_str(text).map_err(json_err)?;
    if tag.model != "extended" {
        return Err(Error::Parse(format!("expected model \"extended\", found {:?}", tag.model)));
    }
    let doc: ExtendedDoc = serde_json::from_str(text).map_err(json_err)?;
    let n = doc.signals.len();
    let mut total = num_rational::BigRational::from_integer(0.into());
    let mut entries = Vec::with_capacity(doc.support.len());
    for (row, s) in doc.support.iter().enumerate() {
        if s.profile.len() != n {
            return Err(Error::InvalidGame(format!(
                "support entry {row} has {} signals for {n} senders",
                s.profile.len()
            )));
        }
        let profile = s
            .profile
            .iter()
            .enumerate()
            .map(|(i, sig)| {
                doc.signals[i].iter().position(|x| x == sig).ok_or_else(|| {
                    Error::InvalidGame(format!(
                        "support entry {row}: signal {sig:?} is not in sender {}'s alphabet",
                        i + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if s.sender_utility.len() != n {
            return Err(Error::InvalidGame(format!(
                "support entry {row} has {} sender utility pairs for {n} senders",
                s.sender_utility.len()
            )));
        }
        let prob = s.prob.exact()?;
        total += &prob;
        entries.push(SupportEntry {
            profile,
            prob: T::from_rational(&prob),
            receiver_u: pair(&s.receiver_utility)?,
            sender_u: s.sender_utility.iter().map(pair).collect::<Result<Vec<_>>>()?,
        });
    }
    if !doc.support.is_empty() && total != num_rational::BigRational::from_integer(1.into()) {
        return Err(Error::PriorSum(crate::scalar::render_rational(&total)));
    }
    ExtendedGame::new(doc.signals, entries)
}

/// Parses either model, dispatching on the `"model"` field.
pub fn parse_any_game<T: Scalar>(text: &str) -> Result<AnyGame<T>> {
    let tag: ModelTag = serde_json::from_str(text).map_err(json_err)?;
    match tag.model.as_str() {
        "base" => parse_game(text).map(AnyGame::Base),
        "extended" => parse_extended_game(text).map(AnyGame::Extended),
        other => Err(Error::Parse(format!("unknown model {other:?}"))),
    }
}

/// Parses an outcome document against the node names of `model`.
pub fn parse_outcome<T: Scalar, M: Model<T> + ?Sized>(text: &str, model: &M) -> Result<Outcome<T>> {
    let doc: OutcomeDoc = serde_json::from_str(text).map_err(json_err)?;
    let names: Vec<String> = (0..model.node_count()).map(|w| model.node_name(w)).collect();
    if let Some(extra) = doc.o_star.keys().find(|k| !names.contains(k)) {
        return Err(Error::OutcomeMismatch(format!("unknown node {extra:?}")));
    }
    let values = names
        .iter()
        .map(|name| {
            doc.o_star
                .get(name)
                .ok_or_else(|| Error::OutcomeMismatch(format!("no value for node {name:?}")))?
                .value()
        })
        .collect::<Result<Vec<T>>>()?;
    Outcome::new(values)
}

/// Serializes an outcome into the document format.
pub fn outcome_to_json<T: Scalar, M: Model<T> + ?Sized>(outcome: &Outcome<T>, model: &M) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = (0..model.node_count())
        .map(|w| (model.node_name(w), serde_json::Value::String(outcome.get(w).render())))
        .collect();
    serde_json::json!({ "o_star": map })
}

/// The five-sender majority game with uniform independent binary signals.
///
/// Every player gets 1 when the action equals the majority signal. The
/// support lists `(0,0,0,1,1)` first, then the remaining profiles in binary
/// order.
pub fn majority_game_json() -> String {
    let n = 5;
    let mut profiles: Vec<Vec<u8>> = (0..32u8)
        .map(|bits| (0..n).map(|i| (bits >> (n - 1 - i)) & 1).collect())
        .collect();
    let lead = vec![0, 0, 0, 1, 1];
    profiles.retain(|p| *p != lead);
    profiles.insert(0, lead);

    let support: Vec<serde_json::Value> = profiles
        .iter()
        .map(|p| {
            let ones = p.iter().filter(|&&b| b == 1).count();
            let u = if 2 * ones > n { ["0", "1"] } else { ["1", "0"] };
            serde_json::json!({
                "profile": p.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                "prob": "1/32",
                "receiver_utility": u,
                "sender_utility": vec![u; n],
            })
        })
        .collect();
    let doc = serde_json::json!({
        "model": "extended",
        "signals": vec![["0", "1"]; n],
        "support": support,
    });
    serde_json::to_string_pretty(&doc).expect("static document serializes")
}
