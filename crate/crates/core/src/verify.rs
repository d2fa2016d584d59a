//! Brute-force incentive checks for a constructed mediator and Monte-Carlo
//! playout of the honest mechanism.
//!
//! Nothing here relies on the order characterization: the verifier
//! enumerates coalitions and report deviations and scores them with the
//! mediator's own outputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{expected_utility, Game, Model, Outcome, Player};
use crate::mechanism::MediatorSpec;
use crate::order::Mode;
use crate::scalar::Scalar;

/// Receiver strategies: a map from the recommendation to the action played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverStrategy {
    Follow,
    AlwaysZero,
    AlwaysOne,
    Invert,
}

impl ReceiverStrategy {
    pub const ALL: [ReceiverStrategy; 4] = [
        ReceiverStrategy::Follow,
        ReceiverStrategy::AlwaysZero,
        ReceiverStrategy::AlwaysOne,
        ReceiverStrategy::Invert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReceiverStrategy::Follow => "follow",
            ReceiverStrategy::AlwaysZero => "always-0",
            ReceiverStrategy::AlwaysOne => "always-1",
            ReceiverStrategy::Invert => "invert",
        }
    }

    /// Probability of playing 0 given the mediator plays 0 with probability `q`.
    fn play_zero<T: Scalar>(self, q: &T) -> T {
        match self {
            ReceiverStrategy::Follow => q.clone(),
            ReceiverStrategy::AlwaysZero => T::one(),
            ReceiverStrategy::AlwaysOne => T::zero(),
            ReceiverStrategy::Invert => T::one() - q.clone(),
        }
    }
}

/// When coalition members commit to a deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationTiming {
    /// A deviation is a full map from states to reports; gains are ex-ante
    /// expectations over the prior.
    #[default]
    ExAnte,
    /// Members decide after seeing the state; a deviation is profitable if
    /// it profits at some realized state.
    Interim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Upper bound on the enumeration size.
    pub cap: u128,
    pub timing: DeviationTiming,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cap: 1_000_000,
            timing: DeviationTiming::ExAnte,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverViolation<T> {
    pub strategy: ReceiverStrategy,
    pub gain: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionViolation<T> {
    /// 0-based sender indices, increasing.
    pub coalition: Vec<usize>,
    /// `deviation[node]` lists the reports of the coalition members at that node.
    pub deviation: Vec<Vec<usize>>,
    /// Expected-utility change per member, aligned with `coalition`.
    pub deltas: Vec<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationStats {
    pub coalitions: u64,
    /// Size of the deviation space covered (pruned branches included).
    pub deviation_space: u128,
    /// Gain-table entries combined by the search; pruning keeps this far
    /// below the deviation space.
    pub deviations_evaluated: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<T> {
    pub passed: bool,
    pub receiver_violation: Option<ReceiverViolation<T>>,
    pub coalition_violation: Option<CoalitionViolation<T>>,
    /// Gain of every non-following receiver strategy, when checked.
    pub receiver_gains: Vec<(ReceiverStrategy, T)>,
    pub stats: VerificationStats,
}

impl<T: Scalar> VerificationReport<T> {
    fn from_parts(
        receiver_violation: Option<ReceiverViolation<T>>,
        coalition_violation: Option<CoalitionViolation<T>>,
        receiver_gains: Vec<(ReceiverStrategy, T)>,
        stats: VerificationStats,
    ) -> Self {
        VerificationReport {
            passed: receiver_violation.is_none() && coalition_violation.is_none(),
            receiver_violation,
            coalition_violation,
            receiver_gains,
            stats,
        }
    }

    /// Merges a receiver check and a coalition check.
    pub fn combine(receiver: Self, coalitions: Self) -> Self {
        Self::from_parts(
            receiver.receiver_violation,
            coalitions.coalition_violation,
            receiver.receiver_gains,
            coalitions.stats,
        )
    }
}

/// Receiver utility when it applies `strategy` to recommendations drawn from `outcome`.
pub fn receiver_strategy_utility<T: Scalar, M: Model<T> + ?Sized>(
    model: &M,
    outcome: &Outcome<T>,
    strategy: ReceiverStrategy,
) -> Result<T> {
    outcome.check_len(model.node_count())?;
    let played = Outcome::new(outcome.values().iter().map(|q| strategy.play_zero(q)).collect())?;
    expected_utility(model, Player::Receiver, &played)
}

/// Checks that following the recommendation is a best response for the
/// receiver.
///
/// All four strategies are enumerated. The reported violation is the most
/// profitable constant strategy (ties go to always-1); a profitable invert
/// strategy always comes with a profitable constant one.
pub fn verify_receiver<T: Scalar, M: Model<T> + ?Sized>(model: &M, outcome: &Outcome<T>) -> Result<VerificationReport<T>> {
    let honest = receiver_strategy_utility(model, outcome, ReceiverStrategy::Follow)?;
    let mut gains = Vec::with_capacity(3);
    for s in &ReceiverStrategy::ALL[1..] {
        let gain = receiver_strategy_utility(model, outcome, *s)? - honest.clone();
        gains.push((*s, gain));
    }
    let best_constant = gains
        .iter()
        .filter(|(s, g)| *s != ReceiverStrategy::Invert && g.is_pos())
        .fold(None::<&(ReceiverStrategy, T)>, |best, cand| match best {
            Some(b) if b.1 > cand.1 => Some(b),
            _ => Some(cand),
        });
    let invert_profitable = gains.iter().any(|(s, g)| *s == ReceiverStrategy::Invert && g.is_pos());
    if invert_profitable && best_constant.is_none() {
        return Err(Error::Internal("invert strategy profitable without a profitable constant".into()));
    }
    let violation = best_constant.map(|(s, g)| ReceiverViolation {
        strategy: *s,
        gain: g.clone(),
    });
    Ok(VerificationReport::from_parts(violation, None, gains, VerificationStats::default()))
}

/// Lexicographic combinations of `0..n` of size `size`.
pub(crate) fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

pub(crate) fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Decodes index `r` into `len` digits in base `base`, most significant first.
pub(crate) fn decode(mut r: usize, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = r % base;
        r /= base;
    }
    digits
}

/// Per-coalition deviation tables, independent of the underlying model.
///
/// `gains[info][choice][member]` is the payoff change of a member when the
/// coalition picks report vector `choice` at information set `info`.
pub(crate) struct GainTable<T> {
    pub gains: Vec<Vec<Vec<T>>>,
    /// Index of the truthful choice at each information set.
    pub honest: Vec<usize>,
}

/// Outcome of a search over one coalition: per-information-set choices.
pub(crate) fn search_coalition<T: Scalar>(
    table: &GainTable<T>,
    mode: Mode,
    timing: DeviationTiming,
    evaluated: &mut u128,
) -> Option<Vec<usize>> {
    let infos = table.gains.len();
    let members = table.gains.first().and_then(|g| g.first()).map_or(0, Vec::len);
    match (mode, timing) {
        (Mode::Strong | Mode::StrongFull, _) => {
            for member in 0..members {
                let mut choice = table.honest.clone();
                let mut any = false;
                for (info, slot) in choice.iter_mut().enumerate() {
                    let mut best: Option<(usize, &T)> = None;
                    for (c, g) in table.gains[info].iter().enumerate() {
                        *evaluated += 1;
                        if g[member].is_pos() && best.is_none_or(|(_, b)| g[member] > *b) {
                            best = Some((c, &g[member]));
                        }
                    }
                    if let Some((c, _)) = best {
                        *slot = c;
                        any = true;
                    }
                }
                if any {
                    return Some(choice);
                }
            }
            None
        }
        (Mode::Resilient, DeviationTiming::Interim) => {
            for info in 0..infos {
                for (c, g) in table.gains[info].iter().enumerate() {
                    *evaluated += 1;
                    if g.iter().all(|v| v.is_pos()) {
                        let mut choice = table.honest.clone();
                        choice[info] = c;
                        return Some(choice);
                    }
                }
            }
            None
        }
        (Mode::Resilient, DeviationTiming::ExAnte) => {
            // Optimistic remaining gain per member, used to prune.
            let mut rest = vec![vec![T::zero(); members]; infos + 1];
            for info in (0..infos).rev() {
                for member in 0..members {
                    let best = table.gains[info]
                        .iter()
                        .map(|g| &g[member])
                        .fold(T::zero(), |acc, v| if *v > acc { v.clone() } else { acc });
                    rest[info][member] = rest[info + 1][member].clone() + best;
                }
            }
            let mut choice = Vec::with_capacity(infos);
            let partial = vec![T::zero(); members];
            dfs(table, &rest, 0, &partial, &mut choice, evaluated).then_some(choice)
        }
    }
}

fn dfs<T: Scalar>(
    table: &GainTable<T>,
    rest: &[Vec<T>],
    info: usize,
    partial: &[T],
    choice: &mut Vec<usize>,
    evaluated: &mut u128,
) -> bool {
    if info == table.gains.len() {
        return partial.iter().all(|v| v.is_pos());
    }
    for (c, g) in table.gains[info].iter().enumerate() {
        *evaluated += 1;
        let next: Vec<T> = partial.iter().zip(g).map(|(a, b)| a.clone() + b.clone()).collect();
        if next
            .iter()
            .zip(&rest[info + 1])
            .any(|(v, r)| !(v.clone() + r.clone()).is_pos())
        {
            continue;
        }
        choice.push(c);
        if dfs(table, rest, info + 1, &next, choice, evaluated) {
            return true;
        }
        choice.pop();
    }
    false
}

/// Expected-utility change of each coalition member under a deviation,
/// recomputed from scratch through the mediator.
pub fn replay_deviation<T: Scalar>(
    spec: &MediatorSpec<'_, T>,
    coalition: &[usize],
    deviation: &[Vec<usize>],
) -> Result<Vec<T>> {
    let g = spec.game();
    let m = g.state_count();
    if deviation.len() != m || deviation.iter().any(|r| r.len() != coalition.len()) {
        return Err(Error::InvalidProfile("deviation does not match coalition and states".into()));
    }
    let mut q = Vec::with_capacity(m);
    for (w, reports) in deviation.iter().enumerate() {
        let mut msgs = vec![w; g.n_senders()];
        for (&i, &r) in coalition.iter().zip(reports) {
            msgs[i] = r;
        }
        q.push(spec.eval_raw(&msgs)?);
    }
    let deviated = Outcome::new(q)?;
    coalition
        .iter()
        .map(|&i| {
            let p = Player::Sender(i);
            Ok(expected_utility(g, p, &deviated)? - expected_utility(g, p, spec.outcome())?)
        })
        .collect()
}

/// Size of the deviation space for coalitions of size `1..=k`.
pub fn deviation_space(n: usize, k: usize, infos: usize, choices_per_member: usize, mode: Mode, timing: DeviationTiming) -> u128 {
    let joint = matches!((mode, timing), (Mode::Resilient, DeviationTiming::ExAnte));
    (1..=k.min(n)).fold(0u128, |acc, s| {
        let per_info = (choices_per_member as u128).saturating_pow(s as u32);
        let per_coalition = if joint {
            per_info.saturating_pow(infos as u32)
        } else {
            per_info.saturating_mul(infos as u128)
        };
        acc.saturating_add(binomial(n, s).saturating_mul(per_coalition))
    })
}

/// Searches for a coalition of at most `k` senders with a profitable
/// deviation from truthful reporting.
///
/// Resilient mode: profitable means every member strictly gains. Strong
/// mode: some member strictly gains. Coalitions are visited by size, then
/// lexicographically; deviations lexicographically.
pub fn verify_coalitions<T: Scalar>(
    spec: &MediatorSpec<'_, T>,
    k: usize,
    mode: Mode,
    options: &VerifyOptions,
) -> Result<VerificationReport<T>> {
    let g = spec.game();
    g.check_k(k)?;
    let (n, m) = (g.n_senders(), g.state_count());
    let required = deviation_space(n, k, m, m, mode, options.timing);
    if required > options.cap {
        return Err(Error::CapExceeded {
            required,
            cap: options.cap,
        });
    }

    let mut stats = VerificationStats {
        deviation_space: required,
        ..Default::default()
    };
    for size in 1..=k {
        for coalition in combinations(n, size) {
            stats.coalitions += 1;
            let table = base_gain_table(spec, &coalition)?;
            if let Some(choice) = search_coalition(&table, mode, options.timing, &mut stats.deviations_evaluated) {
                let deviation: Vec<Vec<usize>> = choice.iter().map(|&c| decode(c, m, size)).collect();
                let deltas = replay_deviation(spec, &coalition, &deviation)?;
                let violation = CoalitionViolation {
                    coalition,
                    deviation,
                    deltas,
                };
                return Ok(VerificationReport::from_parts(None, Some(violation), Vec::new(), stats));
            }
        }
    }
    Ok(VerificationReport::from_parts(None, None, Vec::new(), stats))
}

fn base_gain_table<T: Scalar>(spec: &MediatorSpec<'_, T>, coalition: &[usize]) -> Result<GainTable<T>> {
    let g = spec.game();
    let (n, m) = (g.n_senders(), g.state_count());
    let size = coalition.len();
    let choices = m.pow(size as u32);
    let mut gains = Vec::with_capacity(m);
    let mut honest = Vec::with_capacity(m);
    for w in 0..m {
        let base = spec.outcome().get(w).clone();
        let weights: Vec<T> = coalition
            .iter()
            .map(|&i| {
                let [u0, u1] = g.sender_utility(i, w);
                g.prior()[w].clone() * (u0.clone() - u1.clone())
            })
            .collect();
        let mut row = Vec::with_capacity(choices);
        let mut msgs = vec![w; n];
        for c in 0..choices {
            let reports = decode(c, m, size);
            for (&i, &r) in coalition.iter().zip(&reports) {
                msgs[i] = r;
            }
            let dq = spec.eval_raw(&msgs)? - base.clone();
            row.push(weights.iter().map(|wt| wt.clone() * dq.clone()).collect());
        }
        honest.push((0..size).fold(0, |acc, _| acc * m + w));
        gains.push(row);
    }
    Ok(GainTable { gains, honest })
}

/// Full check: receiver obedience plus coalition resilience.
pub fn verify_mechanism<T: Scalar>(
    spec: &MediatorSpec<'_, T>,
    k: usize,
    mode: Mode,
    options: &VerifyOptions,
) -> Result<VerificationReport<T>> {
    let receiver = verify_receiver(spec.game(), spec.outcome())?;
    let coalitions = verify_coalitions(spec, k, mode, options)?;
    Ok(VerificationReport::combine(receiver, coalitions))
}

/// Anything that can recommend an action on truthful reports.
pub trait HonestMediator<T: Scalar> {
    /// Probability of recommending 0 when every sender reports truthfully at `node`.
    fn honest_recommendation(&self, node: usize) -> Result<T>;
}

impl<T: Scalar> HonestMediator<T> for MediatorSpec<'_, T> {
    fn honest_recommendation(&self, node: usize) -> Result<T> {
        self.eval_raw(&vec![node; self.game().n_senders()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeFrequency {
    pub node: usize,
    pub visits: u64,
    pub zeros: u64,
    /// `zeros / visits`, or `None` for unvisited nodes.
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub rounds: u64,
    pub seed: u64,
    pub per_node: Vec<NodeFrequency>,
}

/// Plays the honest mechanism `rounds` times with a seeded generator.
pub fn simulate<T: Scalar, M: Model<T> + ?Sized, D: HonestMediator<T> + ?Sized>(
    model: &M,
    mediator: &D,
    rounds: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if rounds == 0 {
        return Err(Error::Parse("rounds must be at least 1".into()));
    }
    let nodes = model.node_count();
    let mut cumulative = Vec::with_capacity(nodes);
    let mut acc = 0.0;
    for w in 0..nodes {
        acc += model.node_prob(w).to_f64();
        cumulative.push(acc);
    }
    let q: Vec<f64> = (0..nodes)
        .map(|w| mediator.honest_recommendation(w).map(|v| v.to_f64()))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visits = vec![0u64; nodes];
    let mut zeros = vec![0u64; nodes];
    for _ in 0..rounds {
        let u: f64 = rng.gen::<f64>() * acc;
        let w = cumulative.iter().position(|&c| u < c).unwrap_or(nodes - 1);
        visits[w] += 1;
        if rng.gen::<f64>() < q[w] {
            zeros[w] += 1;
        }
    }
    let per_node = (0..nodes)
        .map(|w| NodeFrequency {
            node: w,
            visits: visits[w],
            zeros: zeros[w],
            frequency: (visits[w] > 0).then(|| zeros[w] as f64 / visits[w] as f64),
        })
        .collect();
    Ok(SimulationReport { rounds, seed, per_node })
}

/// Empirical action-0 frequency of the honest mechanism on a base game.
pub fn simulate_game<T: Scalar>(g: &Game<T>, spec: &MediatorSpec<'_, T>, rounds: u64, seed: u64) -> Result<SimulationReport> {
    simulate(g, spec, rounds, seed)
}
