//! Random small instances for experiments and property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::extended::{ExtendedGame, SupportEntry};
use crate::game::{Game, Outcome};
use crate::order::OrderRelation;
use crate::scalar::Scalar;
use crate::Rational;

/// Shape of a random base game.
#[derive(Debug, Clone)]
pub struct GameShape {
    pub states: Vec<usize>,
    pub senders: Vec<usize>,
    /// Utilities are drawn uniformly from `0..=max_utility`.
    pub max_utility: i64,
    /// Prior weights are drawn from `1..=max_weight` and normalized.
    pub max_weight: i64,
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape {
            states: vec![2, 3],
            senders: vec![1, 2, 3, 4],
            max_utility: 2,
            max_weight: 4,
        }
    }
}

fn int<T: Scalar>(v: i64) -> T {
    T::from_int(v)
}

/// Draws a random base game.
pub fn random_game<T: Scalar, R: Rng + ?Sized>(rng: &mut R, shape: &GameShape) -> Game<T> {
    let m = *shape.states.choose(rng).expect("at least one state count");
    let n = *shape.senders.choose(rng).expect("at least one sender count");
    let weights: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=shape.max_weight)).collect();
    let total: i64 = weights.iter().sum();
    let prior = weights
        .iter()
        .map(|&w| T::from_rational(&Rational::new(w.into(), total.into())))
        .collect();
    let pair = |rng: &mut R| [int(rng.gen_range(0..=shape.max_utility)), int(rng.gen_range(0..=shape.max_utility))];
    let receiver = (0..m).map(|_| pair(rng)).collect();
    let senders = (0..n).map(|_| (0..m).map(|_| pair(rng)).collect()).collect();
    let states = (1..=m).map(|w| format!("w{w}")).collect();
    Game::new(states, prior, receiver, senders).expect("generated game is valid")
}

/// Shape of a random extended game.
#[derive(Debug, Clone)]
pub struct ExtendedShape {
    pub senders: Vec<usize>,
    pub alphabet: Vec<usize>,
    /// Upper bound on the support size.
    pub max_support: usize,
    pub max_utility: i64,
    pub max_weight: i64,
}

impl Default for ExtendedShape {
    fn default() -> Self {
        ExtendedShape {
            senders: vec![2, 3],
            alphabet: vec![2, 3],
            max_support: 6,
            max_utility: 2,
            max_weight: 4,
        }
    }
}

/// Draws a random extended game with a random support.
pub fn random_extended_game<T: Scalar, R: Rng + ?Sized>(rng: &mut R, shape: &ExtendedShape) -> ExtendedGame<T> {
    let n = *shape.senders.choose(rng).expect("at least one sender count");
    let sizes: Vec<usize> = (0..n).map(|_| *shape.alphabet.choose(rng).expect("an alphabet size")).collect();
    let all: usize = sizes.iter().product();
    let mut profiles: Vec<usize> = (0..all).collect();
    profiles.shuffle(rng);
    profiles.truncate(rng.gen_range(1..=shape.max_support.min(all)));
    let weights: Vec<i64> = profiles.iter().map(|_| rng.gen_range(1..=shape.max_weight)).collect();
    let total: i64 = weights.iter().sum();
    let pair = |rng: &mut R| [int(rng.gen_range(0..=shape.max_utility)), int(rng.gen_range(0..=shape.max_utility))];
    let support = profiles
        .iter()
        .zip(&weights)
        .map(|(&code, &w)| {
            let mut profile = vec![0; n];
            let mut c = code;
            for (slot, &size) in profile.iter_mut().zip(&sizes).rev() {
                *slot = c % size;
                c /= size;
            }
            SupportEntry {
                profile,
                prob: T::from_rational(&Rational::new(w.into(), total.into())),
                receiver_u: pair(rng),
                sender_u: (0..n).map(|_| pair(rng)).collect(),
            }
        })
        .collect();
    let signals = sizes
        .iter()
        .map(|&size| (0..size).map(|x| x.to_string()).collect())
        .collect();
    ExtendedGame::new(signals, support).expect("generated game is valid")
}

/// Draws a value in `{0, 1/d, ..., 1}`.
pub fn grid_value<T: Scalar, R: Rng + ?Sized>(rng: &mut R, denominator: i64) -> T {
    T::from_rational(&Rational::new(rng.gen_range(0..=denominator).into(), denominator.into()))
}

/// Draws grid values and lifts them to the smallest order-feasible outcome
/// above them: each node takes the maximum over the nodes that reach it.
pub fn random_feasible_outcome<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    order: &OrderRelation,
    denominator: i64,
) -> Outcome<T> {
    let n = order.node_count();
    let raw: Vec<T> = (0..n).map(|_| grid_value(rng, denominator)).collect();
    let lifted = (0..n)
        .map(|b| {
            (0..n)
                .filter(|&a| order.reaches(a, b))
                .map(|a| raw[a].clone())
                .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
        })
        .collect();
    Outcome::new(lifted).expect("grid values lie in [0, 1]")
}

/// Draws an arbitrary outcome on the grid.
pub fn random_outcome<T: Scalar, R: Rng + ?Sized>(rng: &mut R, nodes: usize, denominator: i64) -> Outcome<T> {
    Outcome::new((0..nodes).map(|_| grid_value(rng, denominator)).collect()).expect("grid values lie in [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::order_violations;
    use crate::order::{build_order, Mode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lifted_outcomes_respect_the_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let g: Game<Rational> = random_game(&mut rng, &GameShape::default());
            let k = rng.gen_range(1..=g.n_senders());
            let order = build_order(&g, k, Mode::Strong).unwrap();
            let o = random_feasible_outcome::<Rational, _>(&mut rng, &order, 12);
            assert!(order_violations(&order, &o).is_empty());
        }
    }
}
