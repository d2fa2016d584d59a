mod common;

use common::{expected, grid_best, q, receiver_ok, respects, rng, vertex_max, zero};
use rand::Rng;
use resilient_mediator::optimize::{check_outcome, optimize};
use resilient_mediator::order::build_order;
use resilient_mediator::sample::{random_feasible_outcome, random_game, GameShape};
use resilient_mediator::{ExactGame, FloatGame, Mode, Objective, Rational};

fn games(seed: u64, count: usize) -> Vec<ExactGame> {
    let mut r = rng(seed);
    (0..count).map(|_| random_game(&mut r, &GameShape::default())).collect()
}

fn objectives(g: &ExactGame) -> Vec<(Objective<Rational>, Option<usize>)> {
    let mut out = vec![(Objective::Receiver, None)];
    out.extend((0..g.n_senders()).map(|i| (Objective::Sender(i), Some(i))));
    out
}

/// The optimization problem written out as `max c·x` over `A x <= b, x >= 0`,
/// plus the constant term of the objective.
fn explicit_lp(g: &ExactGame, reach: &[Vec<bool>], player: Option<usize>) -> (Vec<Rational>, Vec<Vec<Rational>>, Vec<Rational>, Rational) {
    let m = g.state_count();
    let util = |who: Option<usize>, w: usize| match who {
        Some(i) => g.sender_utility(i, w).clone(),
        None => g.receiver_utility(w).clone(),
    };
    let slope = |who: Option<usize>| -> Vec<Rational> {
        (0..m)
            .map(|w| {
                let [u0, u1] = util(who, w);
                g.prior()[w].clone() * (u0 - u1)
            })
            .collect()
    };
    let base = |who: Option<usize>, a: usize| (0..m).fold(zero(), |acc, w| acc + g.prior()[w].clone() * util(who, w)[a].clone());
    let (mut rows, mut rhs) = (Vec::new(), Vec::new());
    for w in 0..m {
        let mut row = vec![zero(); m];
        row[w] = q(1, 1);
        rows.push(row);
        rhs.push(q(1, 1));
    }
    for a in 0..m {
        for b in (0..m).filter(|&b| b != a && reach[a][b]) {
            let mut row = vec![zero(); m];
            row[a] = q(1, 1);
            row[b] = q(-1, 1);
            rows.push(row);
            rhs.push(zero());
        }
    }
    let recv = slope(None);
    for a in 0..2 {
        rows.push(recv.iter().map(|v| -v.clone()).collect());
        rhs.push(base(None, 1) - base(None, a));
    }
    (slope(player), rows, rhs, base(player, 1))
}

#[test]
fn optimum_equals_best_vertex() {
    for g in games(41, 80) {
        for k in 1..=g.n_senders() {
            for mode in Mode::ALL {
                let order = build_order(&g, k, mode).unwrap();
                for (objective, player) in objectives(&g) {
                    let best = optimize(&g, k, mode, &objective).unwrap();
                    let (c, a, b, constant) = explicit_lp(&g, order.reach_matrix(), player);
                    let vertex = vertex_max(&c, &a, &b).expect("constant outcomes are feasible");
                    assert_eq!(best.value, vertex + constant, "k={k} {mode:?} {objective:?}");
                    assert_eq!(best.value, expected(&g, player, best.outcome.values()));
                }
            }
        }
    }
}

#[test]
fn optimum_is_feasible() {
    for g in games(42, 80) {
        for k in 1..=g.n_senders() {
            for mode in Mode::ALL {
                let order = build_order(&g, k, mode).unwrap();
                for (objective, _) in objectives(&g) {
                    let best = optimize(&g, k, mode, &objective).unwrap();
                    assert!(check_outcome(&g, k, mode, &best.outcome).unwrap().feasible);
                    assert!(respects(order.reach_matrix(), best.outcome.values()));
                    assert!(receiver_ok(&g, best.outcome.values()));
                }
            }
        }
    }
}

#[test]
fn grid_search_never_beats_the_optimum() {
    for g in games(43, 60) {
        for k in 1..=g.n_senders() {
            for mode in [Mode::Resilient, Mode::Strong] {
                let order = build_order(&g, k, mode).unwrap();
                for (objective, player) in objectives(&g).into_iter().take(2) {
                    let best = optimize(&g, k, mode, &objective).unwrap();
                    let grid = grid_best(&g, order.reach_matrix(), player, 64).expect("constant outcomes lie on the grid");
                    assert!(grid <= best.value, "grid {grid} beats {} k={k} {mode:?}", best.value);
                }
            }
        }
    }
}

#[test]
fn optimum_dominates_random_feasible_outcomes() {
    let mut r = rng(44);
    for g in games(45, 80) {
        let k = r.gen_range(1..=g.n_senders());
        let mode = Mode::ALL[r.gen_range(0..3)];
        let order = build_order(&g, k, mode).unwrap();
        for (objective, player) in objectives(&g) {
            let best = optimize(&g, k, mode, &objective).unwrap();
            for _ in 0..20 {
                let o = random_feasible_outcome::<Rational, _>(&mut r, &order, 24);
                if receiver_ok(&g, o.values()) {
                    assert!(expected(&g, player, o.values()) <= best.value);
                }
            }
        }
    }
}

#[test]
fn receiver_value_shrinks_as_constraints_grow() {
    for g in games(46, 120) {
        let value = |k, mode| optimize(&g, k, mode, &Objective::Receiver).unwrap().value;
        for mode in Mode::ALL {
            for k in 1..g.n_senders() {
                assert!(value(k + 1, mode) <= value(k, mode));
            }
        }
        for k in 1..=g.n_senders() {
            assert!(value(k, Mode::Strong) <= value(k, Mode::Resilient));
            assert!(value(k, Mode::StrongFull) <= value(k, Mode::Strong));
        }
    }
}

#[test]
fn float_optimum_tracks_exact_optimum() {
    let mut r = rng(47);
    for _ in 0..80 {
        let seed: u64 = r.gen();
        let exact: ExactGame = random_game(&mut rng(seed), &GameShape::default());
        let float: FloatGame = random_game(&mut rng(seed), &GameShape::default());
        for k in 1..=exact.n_senders() {
            let a = optimize(&exact, k, Mode::Resilient, &Objective::Receiver).unwrap();
            let b = optimize(&float, k, Mode::Resilient, &Objective::Receiver).unwrap();
            let a: f64 = num_traits::ToPrimitive::to_f64(&a.value).unwrap();
            assert!((a - b.value).abs() < 1e-9, "{a} vs {}", b.value);
        }
    }
}

#[test]
fn welfare_objective_is_the_weighted_sum() {
    for g in games(48, 40) {
        let objective = Objective::welfare(g.n_senders());
        let best = optimize(&g, 1, Mode::Resilient, &objective).unwrap();
        let o = best.outcome.values();
        let total = (0..g.n_senders()).fold(expected(&g, None, o), |acc, i| acc + expected(&g, Some(i), o));
        assert_eq!(best.value, total);
    }
}
