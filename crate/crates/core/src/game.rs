//! Base information aggregation games: states, prior, utility tables, and the
//! expectation primitives every other module builds on.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Receiver action. `Zero` and `One` index the two utility columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Action {
    Zero,
    One,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Zero, Action::One];

    pub fn index(self) -> usize {
        match self {
            Action::Zero => 0,
            Action::One => 1,
        }
    }
}

impl TryFrom<u8> for Action {
    type Error = Error;

    fn try_from(a: u8) -> Result<Self> {
        match a {
            0 => Ok(Action::Zero),
            1 => Ok(Action::One),
            _ => Err(Error::Parse(format!("action must be 0 or 1, got {a}"))),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Strict preference of a sender between the two actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pref {
    Zero,
    One,
    Indifferent,
}

impl Pref {
    /// Compares a utility pair `[u(.,0), u(.,1)]`.
    pub fn from_pair<T: Scalar>(pair: &[T; 2]) -> Pref {
        Pref::from_difference(&(pair[1].clone() - pair[0].clone()))
    }

    /// Classifies `u(.,1) - u(.,0)`.
    pub fn from_difference<T: Scalar>(diff: &T) -> Pref {
        if diff.is_pos() {
            Pref::One
        } else if diff.is_neg() {
            Pref::Zero
        } else {
            Pref::Indifferent
        }
    }

    pub fn flipped(self) -> Pref {
        match self {
            Pref::Zero => Pref::One,
            Pref::One => Pref::Zero,
            Pref::Indifferent => Pref::Indifferent,
        }
    }
}

impl fmt::Display for Pref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pref::Zero => "ZERO",
            Pref::One => "ONE",
            Pref::Indifferent => "INDIFFERENT",
        };
        f.write_str(s)
    }
}

/// A sender (0-based index) or the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Sender(usize),
    Receiver,
}

/// Anything with weighted nodes and per-node utility pairs.
///
/// Nodes are the states of a base game, or the support profiles of an
/// extended game. Outcomes are indexed by node.
pub trait Model<T: Scalar> {
    fn node_count(&self) -> usize;
    fn sender_count(&self) -> usize;
    fn node_prob(&self, node: usize) -> &T;
    /// `[u(player, node, 0), u(player, node, 1)]`. Panics on a bad index;
    /// callers validate with [`Model::check_player`] first.
    fn utility(&self, player: Player, node: usize) -> &[T; 2];
    fn node_name(&self, node: usize) -> String;

    fn check_player(&self, player: Player) -> Result<()> {
        match player {
            Player::Sender(i) if i >= self.sender_count() => Err(Error::IndexOutOfRange {
                what: "sender",
                index: i,
                bound: self.sender_count(),
            }),
            _ => Ok(()),
        }
    }
}

/// Outcome `o*`: for every node, the probability that action 0 is played.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    o_star: Vec<T>,
}

impl<T: Scalar> Outcome<T> {
    pub fn new(o_star: Vec<T>) -> Result<Self> {
        for (idx, v) in o_star.iter().enumerate() {
            if *v < T::zero() || *v > T::one() {
                return Err(Error::OutcomeMismatch(format!(
                    "o*[{idx}] = {v} is outside [0, 1]"
                )));
            }
        }
        Ok(Outcome { o_star })
    }

    pub fn constant(len: usize, value: T) -> Result<Self> {
        Self::new(vec![value; len])
    }

    /// Outcome that plays `action` deterministically everywhere.
    pub fn playing(len: usize, action: Action) -> Self {
        let v = match action {
            Action::Zero => T::one(),
            Action::One => T::zero(),
        };
        Outcome { o_star: vec![v; len] }
    }

    pub fn values(&self) -> &[T] {
        &self.o_star
    }

    pub fn get(&self, node: usize) -> &T {
        &self.o_star[node]
    }

    pub fn len(&self) -> usize {
        self.o_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.o_star.is_empty()
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.o_star.len() != expected {
            return Err(Error::OutcomeMismatch(format!(
                "outcome has {} entries, game has {} nodes",
                self.o_star.len(),
                expected
            )));
        }
        Ok(())
    }
}

/// A base game: every sender observes the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Game<T> {
    states: Vec<String>,
    prior: Vec<T>,
    n_senders: usize,
    receiver_u: Vec<[T; 2]>,
    /// Indexed `[sender][state]`.
    sender_u: Vec<Vec<[T; 2]>>,
}

impl<T: Scalar> Game<T> {
    pub fn new(
        states: Vec<String>,
        prior: Vec<T>,
        receiver_u: Vec<[T; 2]>,
        sender_u: Vec<Vec<[T; 2]>>,
    ) -> Result<Self> {
        let m = states.len();
        if m == 0 {
            return Err(Error::InvalidGame("at least one state is required".into()));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidGame(format!("duplicate state {s:?}")));
            }
        }
        if prior.len() != m {
            return Err(Error::InvalidGame(format!(
                "prior has {} entries for {m} states",
                prior.len()
            )));
        }
        if let Some((idx, p)) = prior.iter().enumerate().find(|(_, p)| !p.is_pos()) {
            return Err(Error::InvalidGame(format!(
                "prior of state {:?} is {p}, must be strictly positive",
                states[idx]
            )));
        }
        let total = prior.iter().fold(T::zero(), |acc, p| acc + p.clone());
        if !(total.clone() - T::one()).is_negligible() {
            return Err(Error::PriorSum(total.render()));
        }
        if receiver_u.len() != m {
            return Err(Error::InvalidGame(format!(
                "receiver utility has {} entries for {m} states",
                receiver_u.len()
            )));
        }
        if sender_u.is_empty() {
            return Err(Error::InvalidGame("at least one sender is required".into()));
        }
        for (i, row) in sender_u.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidGame(format!(
                    "sender {} utility has {} entries for {m} states",
                    i + 1,
                    row.len()
                )));
            }
        }
        Ok(Game {
            n_senders: sender_u.len(),
            states,
            prior,
            receiver_u,
            sender_u,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn prior(&self) -> &[T] {
        &self.prior
    }

    pub fn n_senders(&self) -> usize {
        self.n_senders
    }

    pub fn receiver_utility(&self, state: usize) -> &[T; 2] {
        &self.receiver_u[state]
    }

    pub fn sender_utility(&self, sender: usize, state: usize) -> &[T; 2] {
        &self.sender_u[sender][state]
    }

    /// Strict preference of `sender` at `state`.
    pub fn preference(&self, sender: usize, state: usize) -> Result<Pref> {
        self.check_sender(sender)?;
        self.check_state(state)?;
        Ok(Pref::from_pair(&self.sender_u[sender][state]))
    }

    /// Preference table indexed `[state][sender]`, for hot loops.
    pub fn preference_table(&self) -> Vec<Vec<Pref>> {
        (0..self.state_count())
            .map(|w| {
                (0..self.n_senders)
                    .map(|i| Pref::from_pair(&self.sender_u[i][w]))
                    .collect()
            })
            .collect()
    }

    pub fn check_sender(&self, sender: usize) -> Result<()> {
        if sender >= self.n_senders {
            return Err(Error::IndexOutOfRange {
                what: "sender",
                index: sender,
                bound: self.n_senders,
            });
        }
        Ok(())
    }

    pub fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.states.len() {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: state,
                bound: self.states.len(),
            });
        }
        Ok(())
    }

    pub fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n_senders {
            return Err(Error::InvalidK {
                k,
                n: self.n_senders,
            });
        }
        Ok(())
    }

    /// Same game with the two utility columns of `sender` swapped.
    pub fn with_swapped_columns(&self, sender: usize) -> Result<Self> {
        self.check_sender(sender)?;
        let mut g = self.clone();
        for pair in &mut g.sender_u[sender] {
            pair.swap(0, 1);
        }
        Ok(g)
    }
}

impl<T: Scalar> Model<T> for Game<T> {
    fn node_count(&self) -> usize {
        self.states.len()
    }

    fn sender_count(&self) -> usize {
        self.n_senders
    }

    fn node_prob(&self, node: usize) -> &T {
        &self.prior[node]
    }

    fn utility(&self, player: Player, node: usize) -> &[T; 2] {
        match player {
            Player::Sender(i) => &self.sender_u[i][node],
            Player::Receiver => &self.receiver_u[node],
        }
    }

    fn node_name(&self, node: usize) -> String {
        self.states[node].clone()
    }
}

/// `U_a`: the receiver's expected utility from always playing `a`.
pub fn receiver_baseline<T: Scalar, M: Model<T> + ?Sized>(model: &M, a: Action) -> T {
    (0..model.node_count()).fold(T::zero(), |acc, w| {
        acc + model.node_prob(w).clone() * model.utility(Player::Receiver, w)[a.index()].clone()
    })
}

/// `E_player(o)`: expected utility of `player` when `o` is played.
pub fn expected_utility<T: Scalar, M: Model<T> + ?Sized>(
    model: &M,
    player: Player,
    outcome: &Outcome<T>,
) -> Result<T> {
    model.check_player(player)?;
    outcome.check_len(model.node_count())?;
    Ok((0..model.node_count()).fold(T::zero(), |acc, w| {
        let [u0, u1] = model.utility(player, w);
        let q = outcome.get(w);
        acc + model.node_prob(w).clone()
            * (q.clone() * u0.clone() + (T::one() - q.clone()) * u1.clone())
    }))
}
