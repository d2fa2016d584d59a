//! On-demand evaluation of the mediator that implements an order-feasible
//! outcome.
//!
//! Pure inputs get the outcome value. Any other input looks at the pure
//! inputs it is related to: those above it (`A≺`) and those below it (`A≻`).
//! No state above: recommend 0 with probability 1. No state below:
//! probability 0. Otherwise the midpoint between the lowest value above and
//! the highest value below.

use crate::error::{Error, Result};
use crate::game::{Game, Outcome, Pref};
use crate::optimize::order_violations;
use crate::order::{build_order, differing, pure_state, MessageProfile, Mode, OrderRelation, PrecTest};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct MediatorSpec<'g, T> {
    game: &'g Game<T>,
    outcome: Outcome<T>,
    order: OrderRelation,
    test: PrecTest,
}

impl<'g, T: Scalar> MediatorSpec<'g, T> {
    /// Validates that `outcome` respects the `(k, mode)` order.
    pub fn new(game: &'g Game<T>, k: usize, mode: Mode, outcome: Outcome<T>) -> Result<Self> {
        outcome.check_len(game.state_count())?;
        let order = build_order(game, k, mode)?;
        if let Some(v) = order_violations(&order, &outcome).into_iter().next() {
            return Err(Error::OrderViolation {
                from: game.states()[v.from].clone(),
                to: game.states()[v.to].clone(),
                from_value: v.from_value.render(),
                to_value: v.to_value.render(),
            });
        }
        Ok(MediatorSpec {
            game,
            outcome,
            order,
            test: PrecTest::new(game, k, mode),
        })
    }

    pub fn game(&self) -> &'g Game<T> {
        self.game
    }

    pub fn outcome(&self) -> &Outcome<T> {
        &self.outcome
    }

    pub fn order(&self) -> &OrderRelation {
        &self.order
    }

    pub fn k(&self) -> usize {
        self.test.k()
    }

    pub fn mode(&self) -> Mode {
        self.test.mode()
    }

    fn related_pure(&self, msgs: &[usize], target: Pref) -> Vec<usize> {
        (0..self.game.state_count())
            .filter(|&w| {
                let diff: Vec<usize> = differing(msgs, &vec![w; msgs.len()]);
                diff.len() <= self.test.k() && self.test.set_wants(w, &diff, target)
            })
            .collect()
    }

    fn non_pure<'a>(&self, m: &'a MessageProfile) -> Result<&'a [usize]> {
        m.validate(self.game)?;
        if m.pure_state().is_some() {
            return Err(Error::InvalidProfile("A-sets are only defined for non-pure inputs".into()));
        }
        Ok(m.as_slice())
    }

    /// `A≺(m)`: states whose pure input sits above `m`.
    pub fn upper_pure_set(&self, m: &MessageProfile) -> Result<Vec<usize>> {
        Ok(self.related_pure(self.non_pure(m)?, Pref::Zero))
    }

    /// `A≻(m)`: states whose pure input sits below `m`.
    pub fn lower_pure_set(&self, m: &MessageProfile) -> Result<Vec<usize>> {
        Ok(self.related_pure(self.non_pure(m)?, Pref::One))
    }

    /// Probability that the mediator recommends action 0 on input `m`.
    pub fn eval(&self, m: &MessageProfile) -> Result<T> {
        m.validate(self.game)?;
        self.eval_raw(m.as_slice())
    }

    /// [`MediatorSpec::eval`] without profile validation.
    pub fn eval_raw(&self, msgs: &[usize]) -> Result<T> {
        if let Some(w) = pure_state(msgs) {
            return Ok(self.outcome.get(w).clone());
        }
        let upper = self.related_pure(msgs, Pref::Zero);
        let lower = self.related_pure(msgs, Pref::One);
        combine(&self.outcome, &upper, &lower, |w| self.game.states()[w].clone())
    }
}

/// The empty-set rules and the midpoint rule, shared with the extended model.
pub(crate) fn combine<T: Scalar>(
    outcome: &Outcome<T>,
    upper: &[usize],
    lower: &[usize],
    name: impl Fn(usize) -> String,
) -> Result<T> {
    let pick = |set: &[usize], want_min: bool| {
        set.iter()
            .copied()
            .reduce(|a, b| {
                let b_wins = if want_min {
                    outcome.get(b) < outcome.get(a)
                } else {
                    outcome.get(b) > outcome.get(a)
                };
                if b_wins {
                    b
                } else {
                    a
                }
            })
    };
    let Some(lo_above) = pick(upper, true) else {
        return Ok(T::one());
    };
    let Some(hi_below) = pick(lower, false) else {
        return Ok(T::zero());
    };
    let (a, b) = (outcome.get(lo_above), outcome.get(hi_below));
    if (b.clone() - a.clone()).is_pos() {
        return Err(Error::OrderViolation {
            from: name(hi_below),
            to: name(lo_above),
            from_value: b.render(),
            to_value: a.render(),
        });
    }
    Ok((a.clone() + b.clone()).half())
}

/// Evaluates the mediator for `(game, k, mode, outcome)` on one input.
pub fn eval_mediator<T: Scalar>(spec: &MediatorSpec<'_, T>, m: &MessageProfile) -> Result<T> {
    spec.eval(m)
}
