//! Games with private, heterogeneous signals.
//!
//! Each sender observes its own coordinate of a signal profile drawn from a
//! distribution with finite support. Support profiles play the role of pure
//! inputs. A sender's preference at a profile is its conditional preference
//! given what it knows, which is only well defined for the order when every
//! coalition of size at most `k` agrees on it (strict `k`-separability).

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::game::{expected_utility, Game, Model, Outcome, Player, Pref};
use crate::mechanism::combine;
use crate::optimize::{check_outcome_with, optimize_with, order_violations, FeasibilityReport, Objective, Optimum};
use crate::order::{differing, find_chain, ChainEnds, Edge, MessageProfile, Mode, OrderRelation, Witness};
use crate::scalar::Scalar;
use crate::verify::{
    binomial, combinations, search_coalition, CoalitionViolation, DeviationTiming, GainTable, HonestMediator,
    VerificationReport, VerificationStats, VerifyOptions,
};

/// Cap on separability checks performed implicitly by order construction.
pub const DEFAULT_SEPARABILITY_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportEntry<T> {
    /// Index into each sender's alphabet.
    pub profile: Vec<usize>,
    pub prob: T,
    pub receiver_u: [T; 2],
    pub sender_u: Vec<[T; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedGame<T> {
    signals: Vec<Vec<String>>,
    support: Vec<SupportEntry<T>>,
    index: HashMap<Vec<usize>, usize>,
}

impl<T: Scalar> ExtendedGame<T> {
    pub fn new(signals: Vec<Vec<String>>, support: Vec<SupportEntry<T>>) -> Result<Self> {
        let n = signals.len();
        if n == 0 {
            return Err(Error::InvalidGame("at least one sender is required".into()));
        }
        for (i, alphabet) in signals.iter().enumerate() {
            if alphabet.is_empty() {
                return Err(Error::InvalidGame(format!("sender {} has an empty alphabet", i + 1)));
            }
            let distinct: HashSet<&String> = alphabet.iter().collect();
            if distinct.len() != alphabet.len() {
                return Err(Error::InvalidGame(format!("sender {} has repeated signals", i + 1)));
            }
        }
        if support.is_empty() {
            return Err(Error::InvalidGame("support is empty".into()));
        }
        let mut index = HashMap::with_capacity(support.len());
        let mut total = T::zero();
        for (row, e) in support.iter().enumerate() {
            if e.profile.len() != n || e.sender_u.len() != n {
                return Err(Error::InvalidGame(format!("support entry {row} does not have {n} senders")));
            }
            if let Some(i) = (0..n).find(|&i| e.profile[i] >= signals[i].len()) {
                return Err(Error::IndexOutOfRange {
                    what: "signal",
                    index: e.profile[i],
                    bound: signals[i].len(),
                });
            }
            if !e.prob.is_pos() {
                return Err(Error::InvalidGame(format!("support entry {row} has probability {}", e.prob)));
            }
            if index.insert(e.profile.clone(), row).is_some() {
                return Err(Error::InvalidGame(format!("support entry {row} repeats a profile")));
            }
            total = total + e.prob.clone();
        }
        if !(total.clone() - T::one()).is_negligible() {
            return Err(Error::PriorSum(total.render()));
        }
        Ok(ExtendedGame { signals, support, index })
    }

    /// The base game as an extended game in which every sender observes the state.
    pub fn embed(g: &Game<T>) -> Self {
        let n = g.n_senders();
        let support = (0..g.state_count())
            .map(|w| SupportEntry {
                profile: vec![w; n],
                prob: g.prior()[w].clone(),
                receiver_u: g.receiver_utility(w).clone(),
                sender_u: (0..n).map(|i| g.sender_utility(i, w).clone()).collect(),
            })
            .collect();
        Self::new(vec![g.states().to_vec(); n], support).expect("a valid base game embeds")
    }

    pub fn signals(&self) -> &[Vec<String>] {
        &self.signals
    }

    pub fn n_senders(&self) -> usize {
        self.signals.len()
    }

    pub fn support(&self) -> &[SupportEntry<T>] {
        &self.support
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn profile(&self, node: usize) -> &[usize] {
        &self.support[node].profile
    }

    /// Support node of a profile, if it has positive probability.
    pub fn support_index(&self, profile: &[usize]) -> Option<usize> {
        self.index.get(profile).copied()
    }

    pub fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n_senders() {
            return Err(Error::InvalidK { k, n: self.n_senders() });
        }
        Ok(())
    }

    /// Parses comma separated signal names, one per sender.
    pub fn parse_profile(&self, text: &str) -> Result<MessageProfile> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != self.n_senders() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} signals for {} senders",
                parts.len(),
                self.n_senders()
            )));
        }
        parts
            .iter()
            .enumerate()
            .map(|(i, s)| {
                self.signals[i]
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::InvalidProfile(format!("unknown signal {s:?} for sender {}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()
            .map(MessageProfile::new)
    }

    pub fn validate_profile(&self, msgs: &[usize]) -> Result<()> {
        if msgs.len() != self.n_senders() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} signals for {} senders",
                msgs.len(),
                self.n_senders()
            )));
        }
        if let Some(i) = (0..msgs.len()).find(|&i| msgs[i] >= self.signals[i].len()) {
            return Err(Error::InvalidProfile(format!("signal index {} out of range for sender {}", msgs[i], i + 1)));
        }
        Ok(())
    }

    pub fn render_profile(&self, msgs: &[usize]) -> Vec<String> {
        msgs.iter().enumerate().map(|(i, &x)| self.signals[i][x].clone()).collect()
    }

    /// Sign of `E[u_i(1) - u_i(0) | X_K = x_K]`, unnormalized.
    fn conditional_pref(&self, sender: usize, coalition: &[usize], node: usize) -> Pref {
        let x = &self.support[node].profile;
        let diff = self
            .support
            .iter()
            .filter(|e| coalition.iter().all(|&j| e.profile[j] == x[j]))
            .fold(T::zero(), |acc, e| {
                let [u0, u1] = &e.sender_u[sender];
                acc + e.prob.clone() * (u1.clone() - u0.clone())
            });
        Pref::from_difference(&diff)
    }

    /// Preference of `sender` inside `coalition` given the profile at support node `node`.
    pub fn coalition_preference(&self, sender: usize, coalition: &[usize], node: usize) -> Result<Pref> {
        if sender >= self.n_senders() {
            return Err(Error::IndexOutOfRange { what: "sender", index: sender, bound: self.n_senders() });
        }
        if node >= self.support_len() {
            return Err(Error::IndexOutOfRange { what: "support profile", index: node, bound: self.support_len() });
        }
        if !coalition.contains(&sender) {
            return Err(Error::InvalidProfile(format!("sender {} is not in the coalition", sender + 1)));
        }
        if let Some(&j) = coalition.iter().find(|&&j| j >= self.n_senders()) {
            return Err(Error::IndexOutOfRange { what: "sender", index: j, bound: self.n_senders() });
        }
        Ok(self.conditional_pref(sender, coalition, node))
    }

    /// Singleton-coalition preferences, indexed `[node][sender]`.
    pub fn preference_table(&self) -> Vec<Vec<Pref>> {
        (0..self.support_len())
            .map(|node| (0..self.n_senders()).map(|i| self.conditional_pref(i, &[i], node)).collect())
            .collect()
    }
}

impl<T: Scalar> Model<T> for ExtendedGame<T> {
    fn node_count(&self) -> usize {
        self.support.len()
    }

    fn sender_count(&self) -> usize {
        self.signals.len()
    }

    fn node_prob(&self, node: usize) -> &T {
        &self.support[node].prob
    }

    fn utility(&self, player: Player, node: usize) -> &[T; 2] {
        match player {
            Player::Sender(i) => &self.support[node].sender_u[i],
            Player::Receiver => &self.support[node].receiver_u,
        }
    }

    fn node_name(&self, node: usize) -> String {
        self.render_profile(&self.support[node].profile).join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparabilityWitness {
    /// 0-based sender index.
    pub sender: usize,
    pub node: usize,
    pub profile: Vec<String>,
    pub first: Vec<usize>,
    pub first_pref: Pref,
    pub second: Vec<usize>,
    pub second_pref: Pref,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparabilityReport {
    pub k: usize,
    pub separable: bool,
    pub witness: Option<SeparabilityWitness>,
    /// Coalition preferences evaluated.
    pub checked: u128,
}

/// Number of coalition preferences a separability check evaluates.
pub fn separability_work(n: usize, support: usize, k: usize) -> u128 {
    let per_sender: u128 = (1..=k.min(n)).map(|s| binomial(n - 1, s - 1)).sum();
    per_sender * n as u128 * support as u128
}

/// Coalitions of size at most `k` containing `sender`, largest first, then lexicographic.
fn coalitions_with(n: usize, k: usize, sender: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&j| j != sender).collect();
    let mut out = Vec::new();
    for size in (1..=k.min(n)).rev() {
        for rest in combinations(others.len(), size - 1) {
            let mut c: Vec<usize> = rest.iter().map(|&r| others[r]).collect();
            c.push(sender);
            c.sort_unstable();
            out.push(c);
        }
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out
}

/// Strict `k`-separability: at every support profile, every sender has the
/// same preference in every coalition of size at most `k` that contains it.
///
/// Profiles are scanned in support order and senders in index order. A
/// conflict is reported as the first coalition preferring 0 against the
/// first preferring 1 when both occur, otherwise the first coalition against
/// the first that disagrees with it.
pub fn check_separability<T: Scalar>(xg: &ExtendedGame<T>, k: usize, cap: u128) -> Result<SeparabilityReport> {
    xg.check_k(k)?;
    let n = xg.n_senders();
    let required = separability_work(n, xg.support_len(), k);
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    let mut checked = 0u128;
    let families: Vec<Vec<Vec<usize>>> = (0..n).map(|i| coalitions_with(n, k, i)).collect();
    for node in 0..xg.support_len() {
        for (sender, family) in families.iter().enumerate() {
            let prefs: Vec<Pref> = family.iter().map(|c| xg.conditional_pref(sender, c, node)).collect();
            checked += prefs.len() as u128;
            if prefs.iter().all(|p| *p == prefs[0]) {
                continue;
            }
            let find = |target: Pref| prefs.iter().position(|p| *p == target);
            let (a, b) = match (find(Pref::Zero), find(Pref::One)) {
                (Some(z), Some(o)) => (z, o),
                _ => (0, prefs.iter().position(|p| *p != prefs[0]).expect("a disagreeing coalition")),
            };
            let witness = SeparabilityWitness {
                sender,
                node,
                profile: xg.render_profile(xg.profile(node)),
                first: family[a].clone(),
                first_pref: prefs[a],
                second: family[b].clone(),
                second_pref: prefs[b],
            };
            return Ok(SeparabilityReport { k, separable: false, witness: Some(witness), checked });
        }
    }
    Ok(SeparabilityReport { k, separable: true, witness: None, checked })
}

fn require_separable<T: Scalar>(xg: &ExtendedGame<T>, k: usize) -> Result<()> {
    let report = check_separability(xg, k, DEFAULT_SEPARABILITY_CAP)?;
    if report.separable {
        Ok(())
    } else {
        Err(Error::NotSeparable { k, report: Box::new(report) })
    }
}

/// Precomputed ≺ test on signal profiles.
#[derive(Debug, Clone)]
pub struct ExtPrecTest {
    prefs: Vec<Vec<Pref>>,
    index: HashMap<Vec<usize>, usize>,
    alphabet_sizes: Vec<usize>,
    k: usize,
    mode: Mode,
}

impl ExtPrecTest {
    pub fn new<T: Scalar>(xg: &ExtendedGame<T>, k: usize, mode: Mode) -> Self {
        ExtPrecTest {
            prefs: xg.preference_table(),
            index: xg.index.clone(),
            alphabet_sizes: xg.signals.iter().map(Vec::len).collect(),
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

    fn wants(&self, node: usize, set: &[usize], target: Pref) -> bool {
        self.mode.wants(self.k, &self.prefs[node], set, target)
    }

    /// `a ≺ b`; false when `a == b`.
    pub fn holds(&self, a: &[usize], b: &[usize]) -> bool {
        let diff = differing(a, b);
        if diff.is_empty() || diff.len() > self.k {
            return false;
        }
        if let Some(&x) = self.index.get(a) {
            if self.wants(x, &diff, Pref::One) {
                return true;
            }
        }
        if let Some(&y) = self.index.get(b) {
            if self.wants(y, &diff, Pref::Zero) {
                return true;
            }
        }
        false
    }

    /// Finds `m` with `x ≺ m ≺ y` for support profiles `x != y`.
    pub fn chain(&self, x: &[usize], y: &[usize]) -> Option<Vec<usize>> {
        let ends = ChainEnds {
            x,
            y,
            pref_x: &self.prefs[self.index[x]],
            pref_y: &self.prefs[self.index[y]],
            alphabet: &self.alphabet_sizes,
        };
        let witness = find_chain(self.mode, self.k, &ends)?;
        debug_assert!(self.holds(x, &witness) && self.holds(&witness, y));
        Some(witness)
    }
}

/// ≺ between two signal profiles.
pub fn prec_holds_extended<T: Scalar>(
    xg: &ExtendedGame<T>,
    k: usize,
    mode: Mode,
    a: &MessageProfile,
    b: &MessageProfile,
) -> Result<bool> {
    xg.validate_profile(a.as_slice())?;
    xg.validate_profile(b.as_slice())?;
    if a == b {
        return Err(Error::InvalidProfile("relation is only defined for distinct profiles".into()));
    }
    Ok(ExtPrecTest::new(xg, k, mode).holds(a.as_slice(), b.as_slice()))
}

/// Order over support profiles; requires strict `k`-separability.
pub fn build_order_extended<T: Scalar>(xg: &ExtendedGame<T>, k: usize, mode: Mode) -> Result<OrderRelation> {
    xg.check_k(k)?;
    require_separable(xg, k)?;
    Ok(order_from_test(xg, &ExtPrecTest::new(xg, k, mode)))
}

fn order_from_test<T: Scalar>(xg: &ExtendedGame<T>, test: &ExtPrecTest) -> OrderRelation {
    let m = xg.support_len();
    let mut edges = Vec::new();
    for from in 0..m {
        for to in (0..m).filter(|&to| to != from) {
            let (x, y) = (xg.profile(from), xg.profile(to));
            let witness = if test.holds(x, y) {
                Some(Witness::Direct)
            } else {
                test.chain(x, y).map(|w| Witness::Chain(MessageProfile::new(w)))
            };
            if let Some(witness) = witness {
                edges.push(Edge { from, to, witness });
            }
        }
    }
    OrderRelation::from_edges(test.k, test.mode, m, edges)
}

pub fn check_outcome_extended<T: Scalar>(
    xg: &ExtendedGame<T>,
    k: usize,
    mode: Mode,
    outcome: &Outcome<T>,
) -> Result<FeasibilityReport<T>> {
    let order = build_order_extended(xg, k, mode)?;
    check_outcome_with(xg, &order, outcome)
}

pub fn optimize_extended<T: Scalar>(
    xg: &ExtendedGame<T>,
    k: usize,
    mode: Mode,
    objective: &Objective<T>,
) -> Result<Optimum<T>> {
    let order = build_order_extended(xg, k, mode)?;
    optimize_with(xg, &order, objective)
}

/// Mediator for an extended game and an order-feasible outcome over its support.
#[derive(Debug, Clone)]
pub struct ExtendedMediator<'g, T> {
    game: &'g ExtendedGame<T>,
    outcome: Outcome<T>,
    order: OrderRelation,
    test: ExtPrecTest,
}

impl<'g, T: Scalar> ExtendedMediator<'g, T> {
    pub fn new(game: &'g ExtendedGame<T>, k: usize, mode: Mode, outcome: Outcome<T>) -> Result<Self> {
        outcome.check_len(game.support_len())?;
        let order = build_order_extended(game, k, mode)?;
        if let Some(v) = order_violations(&order, &outcome).into_iter().next() {
            return Err(Error::OrderViolation {
                from: game.node_name(v.from),
                to: game.node_name(v.to),
                from_value: v.from_value.render(),
                to_value: v.to_value.render(),
            });
        }
        Ok(ExtendedMediator {
            game,
            outcome,
            order,
            test: ExtPrecTest::new(game, k, mode),
        })
    }

    pub fn game(&self) -> &'g ExtendedGame<T> {
        self.game
    }

    pub fn outcome(&self) -> &Outcome<T> {
        &self.outcome
    }

    pub fn order(&self) -> &OrderRelation {
        &self.order
    }

    fn related(&self, msgs: &[usize], target: Pref) -> Vec<usize> {
        (0..self.game.support_len())
            .filter(|&node| {
                let diff = differing(msgs, self.game.profile(node));
                diff.len() <= self.test.k && self.test.wants(node, &diff, target)
            })
            .collect()
    }

    /// Support profiles above `m`.
    pub fn upper_support_set(&self, m: &MessageProfile) -> Result<Vec<usize>> {
        self.game.validate_profile(m.as_slice())?;
        Ok(self.related(m.as_slice(), Pref::Zero))
    }

    /// Support profiles below `m`.
    pub fn lower_support_set(&self, m: &MessageProfile) -> Result<Vec<usize>> {
        self.game.validate_profile(m.as_slice())?;
        Ok(self.related(m.as_slice(), Pref::One))
    }

    pub fn eval(&self, m: &MessageProfile) -> Result<T> {
        self.game.validate_profile(m.as_slice())?;
        self.eval_raw(m.as_slice())
    }

    pub fn eval_raw(&self, msgs: &[usize]) -> Result<T> {
        if let Some(node) = self.game.support_index(msgs) {
            return Ok(self.outcome.get(node).clone());
        }
        let upper = self.related(msgs, Pref::Zero);
        let lower = self.related(msgs, Pref::One);
        combine(&self.outcome, &upper, &lower, |node| self.game.node_name(node))
    }
}

impl<T: Scalar> HonestMediator<T> for ExtendedMediator<'_, T> {
    fn honest_recommendation(&self, node: usize) -> Result<T> {
        Ok(self.outcome.get(node).clone())
    }
}

pub fn eval_mediator_extended<T: Scalar>(mediator: &ExtendedMediator<'_, T>, m: &MessageProfile) -> Result<T> {
    mediator.eval(m)
}

/// Information sets of a coalition: the distinct restrictions `x_K` of
/// support profiles, in order of first appearance, with their members.
fn information_sets<T: Scalar>(xg: &ExtendedGame<T>, coalition: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut sets: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for node in 0..xg.support_len() {
        let key: Vec<usize> = coalition.iter().map(|&i| xg.profile(node)[i]).collect();
        match seen.get(&key) {
            Some(&s) => sets[s].1.push(node),
            None => {
                seen.insert(key.clone(), sets.len());
                sets.push((key, vec![node]));
            }
        }
    }
    sets
}

/// The signal vectors a coalition can observe, in the order the verifier
/// indexes deviations.
pub fn observed_signals<T: Scalar>(xg: &ExtendedGame<T>, coalition: &[usize]) -> Vec<Vec<usize>> {
    information_sets(xg, coalition).into_iter().map(|(key, _)| key).collect()
}

fn mixed_decode(mut c: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = c % r;
        c /= r;
    }
    digits
}

fn mixed_encode(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

fn coalition_space<T: Scalar>(xg: &ExtendedGame<T>, coalition: &[usize], mode: Mode, timing: DeviationTiming) -> u128 {
    let choices = coalition
        .iter()
        .fold(1u128, |acc, &i| acc.saturating_mul(xg.signals[i].len() as u128));
    let infos = information_sets(xg, coalition).len() as u32;
    match (mode, timing) {
        (Mode::Resilient, DeviationTiming::ExAnte) => choices.saturating_pow(infos),
        _ => choices.saturating_mul(infos as u128),
    }
}

/// Expected-utility change of each member when the coalition reports
/// `deviation[s]` at its `s`-th information set (as listed by the verifier).
pub fn replay_deviation_extended<T: Scalar>(
    mediator: &ExtendedMediator<'_, T>,
    coalition: &[usize],
    deviation: &[Vec<usize>],
) -> Result<Vec<T>> {
    let xg = mediator.game();
    let sets = information_sets(xg, coalition);
    if deviation.len() != sets.len() || deviation.iter().any(|r| r.len() != coalition.len()) {
        return Err(Error::InvalidProfile("deviation does not match the coalition's information sets".into()));
    }
    let mut q = vec![T::zero(); xg.support_len()];
    for ((_, nodes), reports) in sets.iter().zip(deviation) {
        for &node in nodes {
            let mut msgs = xg.profile(node).to_vec();
            for (&i, &r) in coalition.iter().zip(reports) {
                msgs[i] = r;
            }
            q[node] = mediator.eval(&MessageProfile::new(msgs))?;
        }
    }
    let deviated = Outcome::new(q)?;
    coalition
        .iter()
        .map(|&i| {
            let p = Player::Sender(i);
            Ok(expected_utility(xg, p, &deviated)? - expected_utility(xg, p, mediator.outcome())?)
        })
        .collect()
}

/// Coalition deviations over signal reports. A coalition pools its members'
/// signals; a deviation maps each observed `x_K` to reports for the members.
/// `deviation` in a reported violation is indexed by information set, in
/// order of first appearance in the support.
pub fn verify_coalitions_extended<T: Scalar>(
    mediator: &ExtendedMediator<'_, T>,
    k: usize,
    mode: Mode,
    options: &VerifyOptions,
) -> Result<VerificationReport<T>> {
    let xg = mediator.game();
    xg.check_k(k)?;
    let n = xg.n_senders();
    let coalitions: Vec<Vec<usize>> = (1..=k).flat_map(|s| combinations(n, s)).collect();
    let required = coalitions
        .iter()
        .fold(0u128, |acc, c| acc.saturating_add(coalition_space(xg, c, mode, options.timing)));
    if required > options.cap {
        return Err(Error::CapExceeded { required, cap: options.cap });
    }

    let mut stats = VerificationStats { deviation_space: required, ..Default::default() };
    for coalition in coalitions {
        stats.coalitions += 1;
        let radices: Vec<usize> = coalition.iter().map(|&i| xg.signals[i].len()).collect();
        let choices: usize = radices.iter().product();
        let sets = information_sets(xg, &coalition);
        let mut gains = Vec::with_capacity(sets.len());
        let mut honest = Vec::with_capacity(sets.len());
        for (key, nodes) in &sets {
            let mut row = vec![vec![T::zero(); coalition.len()]; choices];
            for (c, slot) in row.iter_mut().enumerate() {
                let reports = mixed_decode(c, &radices);
                for &node in nodes {
                    let mut msgs = xg.profile(node).to_vec();
                    for (&i, &r) in coalition.iter().zip(&reports) {
                        msgs[i] = r;
                    }
                    let dq = mediator.eval_raw(&msgs)? - mediator.outcome().get(node).clone();
                    let e = &xg.support()[node];
                    for (g, &i) in slot.iter_mut().zip(&coalition) {
                        let [u0, u1] = &e.sender_u[i];
                        *g = g.clone() + e.prob.clone() * dq.clone() * (u0.clone() - u1.clone());
                    }
                }
            }
            honest.push(mixed_encode(key, &radices));
            gains.push(row);
        }
        let table = GainTable { gains, honest };
        if let Some(choice) = search_coalition(&table, mode, options.timing, &mut stats.deviations_evaluated) {
            let deviation: Vec<Vec<usize>> = choice.iter().map(|&c| mixed_decode(c, &radices)).collect();
            let deltas = replay_deviation_extended(mediator, &coalition, &deviation)?;
            let violation = CoalitionViolation { coalition, deviation, deltas };
            return Ok(VerificationReport {
                passed: false,
                receiver_violation: None,
                coalition_violation: Some(violation),
                receiver_gains: Vec::new(),
                stats,
            });
        }
    }
    Ok(VerificationReport {
        passed: true,
        receiver_violation: None,
        coalition_violation: None,
        receiver_gains: Vec::new(),
        stats,
    })
}
