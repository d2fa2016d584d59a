//! Implementability checks and optimal implementable outcomes.
//!
//! An outcome is implementable by a truthful mechanism for `(k, mode)` iff
//! it is monotone along the order from [`crate::order::build_order`] and the
//! receiver does at least as well as with either constant action.

use crate::error::{Error, Result};
use crate::game::{expected_utility, receiver_baseline, Action, Game, Model, Outcome, Player};
use crate::lp::{Constraint, LinearProgram, LpError, Relation};
use crate::order::{build_order, Mode, OrderRelation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderViolation<T> {
    pub from: usize,
    pub to: usize,
    pub from_value: T,
    pub to_value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverViolation<T> {
    pub action: Action,
    /// `E_r(o)`.
    pub expected: T,
    /// `U_a`.
    pub baseline: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<T> {
    pub feasible: bool,
    pub violated_order: Vec<OrderViolation<T>>,
    pub violated_receiver: Vec<ReceiverViolation<T>>,
}

/// What the optimizer maximizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective<T> {
    Receiver,
    /// 0-based sender index.
    Sender(usize),
    Welfare { senders: Vec<T>, receiver: T },
}

impl<T: Scalar> Objective<T> {
    /// Unit weight for every sender and the receiver.
    pub fn welfare(n_senders: usize) -> Self {
        Objective::Welfare {
            senders: vec![T::one(); n_senders],
            receiver: T::one(),
        }
    }

    fn weights(&self, n_senders: usize) -> Result<Vec<(Player, T)>> {
        match self {
            Objective::Receiver => Ok(vec![(Player::Receiver, T::one())]),
            Objective::Sender(i) if *i < n_senders => Ok(vec![(Player::Sender(*i), T::one())]),
            Objective::Sender(i) => Err(Error::IndexOutOfRange {
                what: "sender",
                index: *i,
                bound: n_senders,
            }),
            Objective::Welfare { senders, receiver } => {
                if senders.len() != n_senders {
                    return Err(Error::InvalidObjective(format!(
                        "{} sender weights for {n_senders} senders",
                        senders.len()
                    )));
                }
                let all = senders.iter().chain(std::iter::once(receiver));
                if all.clone().any(|w| w.is_neg()) {
                    return Err(Error::InvalidObjective("weights must be nonnegative".into()));
                }
                if all.clone().all(|w| w.is_negligible()) {
                    return Err(Error::InvalidObjective("weights must not all be zero".into()));
                }
                Ok(senders
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (Player::Sender(i), w.clone()))
                    .chain(std::iter::once((Player::Receiver, receiver.clone())))
                    .collect())
            }
        }
    }

    /// Objective value of an outcome, computed from expected utilities.
    pub fn evaluate<M: Model<T> + ?Sized>(&self, model: &M, outcome: &Outcome<T>) -> Result<T> {
        self.weights(model.sender_count())?
            .into_iter()
            .try_fold(T::zero(), |acc, (p, w)| Ok(acc + w * expected_utility(model, p, outcome)?))
    }
}

/// Checks an outcome against a precomputed order.
pub fn check_outcome_with<T: Scalar, M: Model<T> + ?Sized>(
    model: &M,
    order: &OrderRelation,
    outcome: &Outcome<T>,
) -> Result<FeasibilityReport<T>> {
    outcome.check_len(model.node_count())?;
    let violated_order = order_violations(order, outcome);
    let expected = expected_utility(model, Player::Receiver, outcome)?;
    let violated_receiver: Vec<_> = Action::ALL
        .iter()
        .filter_map(|&a| {
            let baseline = receiver_baseline(model, a);
            (expected.clone() - baseline.clone()).is_neg().then(|| ReceiverViolation {
                action: a,
                expected: expected.clone(),
                baseline,
            })
        })
        .collect();
    Ok(FeasibilityReport {
        feasible: violated_order.is_empty() && violated_receiver.is_empty(),
        violated_order,
        violated_receiver,
    })
}

/// Reach pairs `a <= b` with `o*(a) > o*(b)`.
pub fn order_violations<T: Scalar>(order: &OrderRelation, outcome: &Outcome<T>) -> Vec<OrderViolation<T>> {
    order
        .strict_reach_pairs()
        .filter(|&(a, b)| (outcome.get(a).clone() - outcome.get(b).clone()).is_pos())
        .map(|(from, to)| OrderViolation {
            from,
            to,
            from_value: outcome.get(from).clone(),
            to_value: outcome.get(to).clone(),
        })
        .collect()
}

/// Decides whether `o` is implementable by a (strong) `k`-resilient truthful mechanism.
pub fn check_outcome<T: Scalar>(
    g: &Game<T>,
    k: usize,
    mode: Mode,
    outcome: &Outcome<T>,
) -> Result<FeasibilityReport<T>> {
    let order = build_order(g, k, mode)?;
    check_outcome_with(g, &order, outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum<T> {
    pub outcome: Outcome<T>,
    pub value: T,
}

/// Maximizes `objective` over outcomes that satisfy `order` and receiver IC.
pub fn optimize_with<T: Scalar, M: Model<T> + ?Sized>(
    model: &M,
    order: &OrderRelation,
    objective: &Objective<T>,
) -> Result<Optimum<T>> {
    let m = model.node_count();
    let weights = objective.weights(model.sender_count())?;

    // E_p(x) = sum_w p(w) u1 + sum_w x_w p(w) (u0 - u1); only the slope matters here.
    let slope = |p: Player, w: usize| {
        let [u0, u1] = model.utility(p, w);
        model.node_prob(w).clone() * (u0.clone() - u1.clone())
    };
    let cost: Vec<T> = (0..m)
        .map(|w| {
            weights
                .iter()
                .fold(T::zero(), |acc, (p, wt)| acc + wt.clone() * slope(*p, w))
        })
        .collect();

    let unit = |w: usize| {
        let mut v = vec![T::zero(); m];
        v[w] = T::one();
        v
    };
    let mut constraints: Vec<Constraint<T>> = (0..m)
        .map(|w| Constraint {
            coeffs: unit(w),
            relation: Relation::Le,
            rhs: T::one(),
        })
        .collect();
    for e in order.edges() {
        let mut coeffs = vec![T::zero(); m];
        coeffs[e.from] = T::one();
        coeffs[e.to] = -T::one();
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Le,
            rhs: T::zero(),
        });
    }
    let receiver_slope: Vec<T> = (0..m).map(|w| slope(Player::Receiver, w)).collect();
    let u0 = receiver_baseline(model, Action::Zero);
    let u1 = receiver_baseline(model, Action::One);
    for rhs in [T::zero(), u0 - u1] {
        constraints.push(Constraint {
            coeffs: receiver_slope.clone(),
            relation: Relation::Ge,
            rhs,
        });
    }

    let lp = LinearProgram {
        objective: cost,
        constraints,
    };
    let sol = lp.maximize().map_err(|e| match e {
        LpError::Infeasible => Error::Internal("constant outcomes should always be feasible".into()),
        LpError::Unbounded => Error::Internal("bounded program reported unbounded".into()),
    })?;
    // Clamp float noise back into [0, 1]; exact values are untouched.
    let x = sol
        .x
        .into_iter()
        .map(|v| {
            if v < T::zero() {
                T::zero()
            } else if v > T::one() {
                T::one()
            } else {
                v
            }
        })
        .collect();
    let outcome = Outcome::new(x)?;
    let value = objective.evaluate(model, &outcome)?;
    Ok(Optimum { outcome, value })
}

/// Computes an optimal outcome implementable for `(k, mode)`.
pub fn optimize<T: Scalar>(g: &Game<T>, k: usize, mode: Mode, objective: &Objective<T>) -> Result<Optimum<T>> {
    let order = build_order(g, k, mode)?;
    optimize_with(g, &order, objective)
}
