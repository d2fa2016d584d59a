//! Truthful, coalition-resilient mediators for information aggregation games.
//!
//! A set of senders observe a state and report it to a mediator, which
//! recommends one of two actions to a receiver. This crate decides which
//! outcomes (state → action distributions) can be implemented so that no
//! coalition of at most `k` senders profits from misreporting, computes
//! optimal such outcomes with a linear program, builds the mediator on
//! demand, and checks all of it against brute-force enumeration.
//!
//! Everything is generic over [`Scalar`]; [`Rational`] gives exact results.
//!
//! ```
//! use resilient_mediator::{format, optimize, Mode, Objective, Rational};
//!
//! let g: resilient_mediator::ExactGame = format::parse_game(format::G1_JSON).unwrap();
//! let best = optimize::optimize(&g, 1, Mode::Resilient, &Objective::Receiver).unwrap();
//! assert_eq!(best.value, Rational::from_integer(1.into()));
//! ```

pub mod error;
pub mod extended;
pub mod format;
pub mod game;
pub mod lp;
pub mod mechanism;
pub mod optimize;
pub mod order;
pub mod sample;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use extended::{ExtendedGame, ExtendedMediator, SeparabilityReport};
pub use game::{Action, Game, Model, Outcome, Player, Pref};
pub use mechanism::MediatorSpec;
pub use optimize::{FeasibilityReport, Objective, Optimum};
pub use order::{MessageProfile, Mode, OrderRelation};
pub use scalar::Scalar;
pub use verify::{DeviationTiming, VerificationReport, VerifyOptions};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type ExactGame = Game<Rational>;
pub type ExactOutcome = Outcome<Rational>;
pub type ExactExtendedGame = ExtendedGame<Rational>;
pub type FloatGame = Game<f64>;
pub type FloatOutcome = Outcome<f64>;
