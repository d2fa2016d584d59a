//! The deviation relation between mediator inputs and the induced order on
//! states.
//!
//! `a ≺ b` holds when the senders whose reports differ between `a` and `b`
//! form a set `C` of at most `k` senders and either `a` is pure at some state
//! where `C` wants action 1, or `b` is pure at some state where `C` wants
//! action 0. In resilient mode "`C` wants" means every member strictly
//! prefers; in strong mode it means at least one member does. Full-strong
//! mode also counts senders outside `C` that could join the coalition as
//! silent beneficiaries while reporting truthfully.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, Pref};
use crate::scalar::Scalar;

/// Which coalition notion the order is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    /// No coalition can deviate so that all members strictly gain.
    #[serde(rename = "weak")]
    Resilient,
    /// No coalition can deviate so that any member strictly gains; only
    /// the preferences of senders whose reports change are consulted.
    #[serde(rename = "strong")]
    Strong,
    /// As `Strong`, but a coalition may also contain truthful members that
    /// profit from the others' misreports.
    #[serde(rename = "strong-full")]
    StrongFull,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Resilient, Mode::Strong, Mode::StrongFull];

    /// Whether a deviation changing the reports of `set` is constrained at a
    /// node where the senders have preferences `at_node`: some admissible
    /// coalition containing `set` prefers `target` in the mode's sense.
    pub fn wants(self, k: usize, at_node: &[Pref], set: &[usize], target: Pref) -> bool {
        let mut members = set.iter().map(|&i| at_node[i]);
        match self {
            Mode::Resilient => members.all(|p| p == target),
            Mode::Strong => members.any(|p| p == target),
            Mode::StrongFull => {
                members.any(|p| p == target) || (set.len() < k && at_node.contains(&target))
            }
        }
    }

    /// Deviations are judged by whether any single member gains.
    pub fn is_strong(self) -> bool {
        !matches!(self, Mode::Resilient)
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Mode::Resilient => "weak",
            Mode::Strong => "strong",
            Mode::StrongFull => "strong-full",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.cli_name() == name)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

/// One report per sender; entries index states (base model) or the
/// sender's signal alphabet (extended model).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageProfile(Vec<usize>);

impl MessageProfile {
    pub fn new(messages: Vec<usize>) -> Self {
        MessageProfile(messages)
    }

    /// The pure input where every sender reports `state`.
    pub fn pure(state: usize, n_senders: usize) -> Self {
        MessageProfile(vec![state; n_senders])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The common report if every sender sent the same one.
    pub fn pure_state(&self) -> Option<usize> {
        pure_state(&self.0)
    }

    /// Parses comma separated state names.
    pub fn parse<T: Scalar>(g: &Game<T>, text: &str) -> Result<Self> {
        let msgs = text
            .split(',')
            .map(|s| {
                let s = s.trim();
                g.state_index(s)
                    .ok_or_else(|| Error::InvalidProfile(format!("unknown state {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = MessageProfile(msgs);
        p.validate(g)?;
        Ok(p)
    }

    pub fn validate<T: Scalar>(&self, g: &Game<T>) -> Result<()> {
        if self.0.len() != g.n_senders() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} messages for {} senders",
                self.0.len(),
                g.n_senders()
            )));
        }
        if let Some(&bad) = self.0.iter().find(|&&w| w >= g.state_count()) {
            return Err(Error::InvalidProfile(format!("state index {bad} out of range")));
        }
        Ok(())
    }

    pub fn render_with(&self, names: impl Fn(usize, usize) -> String) -> Vec<String> {
        self.0.iter().enumerate().map(|(i, &x)| names(i, x)).collect()
    }
}

impl From<Vec<usize>> for MessageProfile {
    fn from(v: Vec<usize>) -> Self {
        MessageProfile(v)
    }
}

pub(crate) fn pure_state(msgs: &[usize]) -> Option<usize> {
    let first = *msgs.first()?;
    msgs.iter().all(|&m| m == first).then_some(first)
}

/// Precomputed ≺ test over a base game.
#[derive(Debug, Clone)]
pub struct PrecTest {
    prefs: Vec<Vec<Pref>>,
    k: usize,
    mode: Mode,
}

impl PrecTest {
    pub fn new<T: Scalar>(g: &Game<T>, k: usize, mode: Mode) -> Self {
        PrecTest {
            prefs: g.preference_table(),
            k,
            mode,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Preference of `sender` at `state`.
    pub fn pref(&self, state: usize, sender: usize) -> Pref {
        self.prefs[state][sender]
    }

    /// Whether the senders in `set` satisfy the mode quantifier for `target` at `state`.
    pub fn set_wants(&self, state: usize, set: &[usize], target: Pref) -> bool {
        self.mode.wants(self.k, &self.prefs[state], set, target)
    }

    /// `a ≺ b` on raw profiles of equal length; false when `a == b`.
    pub fn holds(&self, a: &[usize], b: &[usize]) -> bool {
        let diff = differing(a, b);
        if diff.is_empty() || diff.len() > self.k {
            return false;
        }
        if let Some(w) = pure_state(a) {
            if self.set_wants(w, &diff, Pref::One) {
                return true;
            }
        }
        if let Some(w) = pure_state(b) {
            if self.set_wants(w, &diff, Pref::Zero) {
                return true;
            }
        }
        false
    }
}

/// Senders whose reports differ.
pub(crate) fn differing(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| i)
        .collect()
}

/// Decides `a ≺_k b` (or its strong variant).
pub fn prec_holds<T: Scalar>(
    g: &Game<T>,
    k: usize,
    mode: Mode,
    a: &MessageProfile,
    b: &MessageProfile,
) -> Result<bool> {
    a.validate(g)?;
    b.validate(g)?;
    if a == b {
        return Err(Error::InvalidProfile("relation is only defined for distinct profiles".into()));
    }
    Ok(PrecTest::new(g, k, mode).holds(a.as_slice(), b.as_slice()))
}

/// Decides whether the pure input at `from` relates directly to the pure
/// input at `to`. That needs every sender to deviate, so `k` must equal `n`.
pub fn direct_edge<T: Scalar>(g: &Game<T>, k: usize, mode: Mode, from: usize, to: usize) -> Result<bool> {
    g.check_state(from)?;
    g.check_state(to)?;
    if from == to {
        return Err(Error::InvalidProfile("direct edge needs two distinct states".into()));
    }
    Ok(direct_edge_with(&PrecTest::new(g, k, mode), g.n_senders(), from, to))
}

fn direct_edge_with(test: &PrecTest, n: usize, from: usize, to: usize) -> bool {
    if test.k != n {
        return false;
    }
    let all: Vec<usize> = (0..n).collect();
    test.set_wants(from, &all, Pref::One) || test.set_wants(to, &all, Pref::Zero)
}

/// Finds an input `m` with `pure(from) ≺ m ≺ pure(to)`, if one exists.
pub fn chain_witness<T: Scalar>(
    g: &Game<T>,
    k: usize,
    mode: Mode,
    from: usize,
    to: usize,
) -> Result<Option<MessageProfile>> {
    g.check_state(from)?;
    g.check_state(to)?;
    if from == to {
        return Err(Error::InvalidProfile("chain witness needs two distinct states".into()));
    }
    let test = PrecTest::new(g, k, mode);
    Ok(chain_witness_with(&test, g.n_senders(), g.state_count(), from, to))
}

fn chain_witness_with(test: &PrecTest, n: usize, m: usize, from: usize, to: usize) -> Option<MessageProfile> {
    let (x, y) = (vec![from; n], vec![to; n]);
    let ends = ChainEnds {
        x: &x,
        y: &y,
        pref_x: &test.prefs[from],
        pref_y: &test.prefs[to],
        alphabet: &vec![m; n],
    };
    let witness = find_chain(test.mode, test.k, &ends)?;
    debug_assert!(test.holds(&x, &witness));
    debug_assert!(test.holds(&witness, &y));
    Some(MessageProfile(witness))
}

/// Two distinct nodes between which an intermediate input is sought, with
/// every sender's preference at each end and alphabet size.
pub(crate) struct ChainEnds<'a> {
    pub x: &'a [usize],
    pub y: &'a [usize],
    pub pref_x: &'a [Pref],
    pub pref_y: &'a [Pref],
    pub alphabet: &'a [usize],
}

/// Finds `m` with `x ≺ m ≺ y`, where `x ≺ m` is justified by `x` and
/// `m ≺ y` by `y`. Senders with `x_i = y_i` keep that report unless they
/// are needed as a witness.
pub(crate) fn find_chain(mode: Mode, k: usize, ends: &ChainEnds<'_>) -> Option<Vec<usize>> {
    match mode {
        Mode::Resilient => resilient_chain(k, ends),
        Mode::Strong | Mode::StrongFull => strong_chain(mode, k, ends),
    }
}

/// Four-way split of the differing senders by what they may do.
///
/// A sender may leave `x` (report something else) only if it strictly
/// prefers action 1 there, and may leave `y` only if it strictly prefers
/// action 0 there.
fn resilient_chain(k: usize, ends: &ChainEnds<'_>) -> Option<Vec<usize>> {
    let (x, y) = (ends.x, ends.y);
    let mut stay_x = Vec::new(); // must report x_i
    let mut stay_y = Vec::new(); // must report y_i
    let mut free = Vec::new();
    for i in differing(x, y) {
        let leave_x = ends.pref_x[i] == Pref::One;
        let leave_y = ends.pref_y[i] == Pref::Zero;
        match (leave_x, leave_y) {
            (false, false) => return None,
            (false, true) => stay_x.push(i),
            (true, false) => stay_y.push(i),
            (true, true) => free.push(i),
        }
    }
    if stay_x.len() > k || stay_y.len() > k || stay_x.len() + stay_y.len() + free.len() > 2 * k {
        return None;
    }
    let mut msgs = y.to_vec();
    for &i in &stay_x {
        msgs[i] = x[i];
    }
    let to_x = k.saturating_sub(stay_x.len()).min(free.len());
    for &i in &free[..to_x] {
        msgs[i] = x[i];
    }
    if msgs == x {
        // every differing sender ended on `x`: push one free sender over
        let &last = free.last()?;
        msgs[last] = y[last];
    }
    (msgs != y).then_some(msgs)
}

/// Strong modes: a witness `i` preferring 1 at `x` must belong to some
/// admissible coalition containing `C_x` (the senders not reporting `x_i`),
/// and a witness `j` preferring 0 at `y` to one containing `C_y`. In
/// `Strong` mode the witnesses must themselves deviate; in `StrongFull`
/// they may stay put as beneficiaries. Distinct witness pairs are tried
/// before a single sender serving both ends.
fn strong_chain(mode: Mode, k: usize, ends: &ChainEnds<'_>) -> Option<Vec<usize>> {
    let (x, y) = (ends.x, ends.y);
    let n = x.len();
    let ones: Vec<usize> = (0..n).filter(|&i| ends.pref_x[i] == Pref::One).collect();
    let zeros: Vec<usize> = (0..n).filter(|&j| ends.pref_y[j] == Pref::Zero).collect();
    let options = |s: usize, first: usize, second: usize| {
        let mut v = vec![first, second];
        v.extend((0..ends.alphabet[s]).find(|&t| t != x[s] && t != y[s]));
        v.dedup();
        v
    };
    for same in [false, true] {
        for &i in &ones {
            for &j in zeros.iter().filter(|&&j| (i == j) == same) {
                let opts_i = options(i, y[i], x[i]);
                let opts_j = if same { vec![usize::MAX] } else { options(j, x[j], y[j]) };
                for &vi in &opts_i {
                    for &vj in &opts_j {
                        let mut msgs = y.to_vec();
                        msgs[i] = vi;
                        if !same {
                            msgs[j] = vj;
                        }
                        if let Some(done) = fill_strong(mode, k, ends, msgs, i, j) {
                            return Some(done);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Places the remaining differing senders on `x` (up to capacity) or `y`.
fn fill_strong(mode: Mode, k: usize, ends: &ChainEnds<'_>, mut msgs: Vec<usize>, i: usize, j: usize) -> Option<Vec<usize>> {
    let (x, y) = (ends.x, ends.y);
    let off_x = |msgs: &[usize], s: usize| msgs[s] != x[s];
    let off_y = |msgs: &[usize], s: usize| msgs[s] != y[s];
    if mode == Mode::Strong && !(off_x(&msgs, i) && off_y(&msgs, j)) {
        return None;
    }
    // beneficiaries outside the deviating set take a coalition slot
    let extra_x = usize::from(!off_x(&msgs, i));
    let extra_y = usize::from(!off_y(&msgs, j));
    let flex: Vec<usize> = (0..x.len()).filter(|&s| s != i && s != j && x[s] != y[s]).collect();
    let c_x = (0..x.len()).filter(|&s| !flex.contains(&s) && off_x(&msgs, s)).count() + flex.len();
    let c_y = (0..x.len()).filter(|&s| !flex.contains(&s) && off_y(&msgs, s)).count();
    // moving `a` flex senders onto `x` shifts them from `C_x` to `C_y`
    let lo = (c_x + extra_x).saturating_sub(k).max(1usize.saturating_sub(c_y));
    let hi = flex.len().min((k - extra_y.min(k)).saturating_sub(c_y)).min(c_x.saturating_sub(1));
    if lo > hi || c_x + extra_x - lo > k || c_y + lo + extra_y > k {
        return None;
    }
    for &s in &flex[..hi] {
        msgs[s] = x[s];
    }
    (msgs != x && msgs != y).then_some(msgs)
}

/// How an edge of the order was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Direct,
    Chain(MessageProfile),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub witness: Witness,
}

/// The constraint system `x_from <= x_to` together with its reflexive
/// transitive closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRelation {
    k: usize,
    mode: Mode,
    edges: Vec<Edge>,
    reach: Vec<Vec<bool>>,
}

impl OrderRelation {
    /// Builds the relation from row-major edges over `nodes` nodes.
    pub fn from_edges(k: usize, mode: Mode, nodes: usize, edges: Vec<Edge>) -> Self {
        let mut reach = vec![vec![false; nodes]; nodes];
        for (w, row) in reach.iter_mut().enumerate() {
            row[w] = true;
        }
        for e in &edges {
            reach[e.from][e.to] = true;
        }
        for via in 0..nodes {
            for a in 0..nodes {
                if reach[a][via] {
                    for b in 0..nodes {
                        if reach[via][b] {
                            reach[a][b] = true;
                        }
                    }
                }
            }
        }
        OrderRelation { k, mode, edges, reach }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.reach.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    /// `from <= to` in the closed order.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.reach[from][to]
    }

    pub fn reach_matrix(&self) -> &[Vec<bool>] {
        &self.reach
    }

    /// Pairs `(a, b)` with `a != b` and `a <= b`.
    pub fn strict_reach_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.node_count();
        (0..n).flat_map(move |a| (0..n).filter(move |&b| a != b && self.reach[a][b]).map(move |b| (a, b)))
    }
}

/// Computes the edge system and order for `(k, mode)`.
pub fn build_order<T: Scalar>(g: &Game<T>, k: usize, mode: Mode) -> Result<OrderRelation> {
    g.check_k(k)?;
    let test = PrecTest::new(g, k, mode);
    let (n, m) = (g.n_senders(), g.state_count());
    let mut edges = Vec::new();
    for from in 0..m {
        for to in (0..m).filter(|&to| to != from) {
            let witness = if direct_edge_with(&test, n, from, to) {
                Some(Witness::Direct)
            } else {
                chain_witness_with(&test, n, m, from, to).map(Witness::Chain)
            };
            if let Some(witness) = witness {
                edges.push(Edge { from, to, witness });
            }
        }
    }
    Ok(OrderRelation::from_edges(k, mode, m, edges))
}
