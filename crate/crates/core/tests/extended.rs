mod common;

use std::collections::VecDeque;

use common::{q, rng, zero};
use rand::seq::SliceRandom;
use rand::Rng;
use resilient_mediator::extended::{
    build_order_extended, check_outcome_extended, check_separability, prec_holds_extended, verify_coalitions_extended,
    SupportEntry, DEFAULT_SEPARABILITY_CAP,
};
use resilient_mediator::format::{majority_game_json, parse_extended_game, parse_game, G1_JSON};
use resilient_mediator::optimize::check_outcome;
use resilient_mediator::order::{build_order, Witness};
use resilient_mediator::sample::{
    random_extended_game, random_feasible_outcome, random_game, random_outcome, ExtendedShape, GameShape,
};
use resilient_mediator::verify::verify_coalitions;
use resilient_mediator::{
    DeviationTiming, ExactExtendedGame, ExactGame, ExactOutcome, ExtendedGame, ExtendedMediator, MediatorSpec,
    MessageProfile, Mode, Rational, VerifyOptions,
};

const TIMINGS: [DeviationTiming; 2] = [DeviationTiming::ExAnte, DeviationTiming::Interim];

/// Sign of a sender's expected gain from action 1 given its own signal.
fn lean(xg: &ExactExtendedGame, i: usize, node: usize) -> i32 {
    let own = xg.profile(node)[i];
    let sum = xg
        .support()
        .iter()
        .filter(|e| e.profile[i] == own)
        .fold(zero(), |acc, e| acc + e.prob.clone() * (e.sender_u[i][1].clone() - e.sender_u[i][0].clone()));
    if sum > zero() {
        1
    } else if sum < zero() {
        -1
    } else {
        0
    }
}

fn naive_prec(xg: &ExactExtendedGame, k: usize, mode: Mode, a: &[usize], b: &[usize]) -> bool {
    let c: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    if c.is_empty() || c.len() > k {
        return false;
    }
    let ok = |node: usize, target: i32| match mode {
        Mode::Resilient => c.iter().all(|&i| lean(xg, i, node) == target),
        Mode::Strong => c.iter().any(|&i| lean(xg, i, node) == target),
        Mode::StrongFull => (0..xg.n_senders())
            .any(|i| lean(xg, i, node) == target && c.len() + usize::from(!c.contains(&i)) <= k),
    };
    xg.support_index(a).is_some_and(|n| ok(n, 1)) || xg.support_index(b).is_some_and(|n| ok(n, -1))
}

fn all_profiles(xg: &ExactExtendedGame) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = xg.signals().iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut c| {
            let mut v = vec![0; sizes.len()];
            for (slot, &s) in v.iter_mut().zip(&sizes).rev() {
                *slot = c % s;
                c /= s;
            }
            v
        })
        .collect()
}

/// Support-to-support reachability by breadth-first search over raw steps.
fn reach_by_chains(xg: &ExactExtendedGame, k: usize, mode: Mode) -> Vec<Vec<bool>> {
    let profiles = all_profiles(xg);
    let s = xg.support_len();
    let mut reach = vec![vec![false; s]; s];
    for start in 0..s {
        let mut seen = vec![false; profiles.len()];
        let first = profiles.iter().position(|p| p == xg.profile(start)).unwrap();
        seen[first] = true;
        let mut queue = VecDeque::from([first]);
        while let Some(cur) = queue.pop_front() {
            let here = xg.support_index(&profiles[cur]);
            if let Some(node) = here {
                reach[start][node] = true;
            }
            for (nb, p) in profiles.iter().enumerate() {
                let allowed = here.is_some() || xg.support_index(p).is_some();
                if !seen[nb] && allowed && naive_prec(xg, k, mode, &profiles[cur], p) {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
    }
    reach
}

fn naive_mediator(xg: &ExactExtendedGame, k: usize, mode: Mode, o: &[Rational], msgs: &[usize]) -> Rational {
    if let Some(node) = xg.support_index(msgs) {
        return o[node].clone();
    }
    let nodes = 0..xg.support_len();
    let above = nodes.clone().filter(|&y| naive_prec(xg, k, mode, msgs, xg.profile(y))).map(|y| &o[y]).min();
    let below = nodes.filter(|&y| naive_prec(xg, k, mode, xg.profile(y), msgs)).map(|y| &o[y]).max();
    match (above, below) {
        (None, _) => q(1, 1),
        (_, None) => zero(),
        (Some(a), Some(b)) => (a + b) / q(2, 1),
    }
}

/// Separable random extended games with every `k` they are separable for.
fn separable_games(seed: u64, count: usize) -> Vec<(ExactExtendedGame, usize)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let xg: ExactExtendedGame = random_extended_game(&mut r, &ExtendedShape::default());
        for k in 1..=xg.n_senders() {
            if check_separability(&xg, k, DEFAULT_SEPARABILITY_CAP).unwrap().separable {
                out.push((xg.clone(), k));
            }
        }
    }
    out
}

#[test]
fn single_senders_are_always_separable() {
    let mut r = rng(51);
    for _ in 0..200 {
        let xg: ExactExtendedGame = random_extended_game(&mut r, &ExtendedShape::default());
        assert!(check_separability(&xg, 1, DEFAULT_SEPARABILITY_CAP).unwrap().separable);
    }
}

#[test]
fn extended_closure_matches_breadth_first_chain_search() {
    for (xg, k) in separable_games(52, 150) {
        for mode in Mode::ALL {
            let order = build_order_extended(&xg, k, mode).unwrap();
            assert_eq!(order.reach_matrix(), reach_by_chains(&xg, k, mode).as_slice(), "k={k} {mode:?} {xg:?}");
        }
    }
}

#[test]
fn extended_chain_witnesses_replay() {
    let mut chains = 0;
    for (xg, k) in separable_games(53, 200) {
        for mode in Mode::ALL {
            for e in build_order_extended(&xg, k, mode).unwrap().edges() {
                let (x, y) = (xg.profile(e.from), xg.profile(e.to));
                match &e.witness {
                    Witness::Direct => assert!(naive_prec(&xg, k, mode, x, y)),
                    Witness::Chain(m) => {
                        chains += 1;
                        assert!(naive_prec(&xg, k, mode, x, m.as_slice()));
                        assert!(naive_prec(&xg, k, mode, m.as_slice(), y));
                    }
                }
            }
        }
    }
    assert!(chains > 0);
}

#[test]
fn extended_relation_agrees_with_the_definition() {
    let mut r = rng(54);
    for (xg, k) in separable_games(54, 100) {
        let profiles = all_profiles(&xg);
        for _ in 0..30 {
            let a = profiles.choose(&mut r).unwrap();
            let b = if r.gen_bool(0.5) {
                xg.profile(r.gen_range(0..xg.support_len()))
            } else {
                profiles.choose(&mut r).unwrap()
            };
            if a == b {
                continue;
            }
            for mode in Mode::ALL {
                let got = prec_holds_extended(&xg, k, mode, &MessageProfile::new(a.clone()), &MessageProfile::new(b.to_vec()));
                assert_eq!(got.unwrap(), naive_prec(&xg, k, mode, a, b));
            }
        }
    }
}

#[test]
fn extended_mediator_matches_the_definition_and_is_monotone() {
    let mut r = rng(55);
    for (xg, k) in separable_games(55, 120) {
        for mode in Mode::ALL {
            let order = build_order_extended(&xg, k, mode).unwrap();
            let o: ExactOutcome = random_feasible_outcome(&mut r, &order, 12);
            let med = ExtendedMediator::new(&xg, k, mode, o.clone()).unwrap();
            let profiles = all_profiles(&xg);
            let values: Vec<Rational> = profiles.iter().map(|m| med.eval_raw(m).unwrap()).collect();
            for (m, v) in profiles.iter().zip(&values) {
                assert_eq!(*v, naive_mediator(&xg, k, mode, o.values(), m), "{m:?}");
            }
            for (a, va) in profiles.iter().zip(&values) {
                for (b, vb) in profiles.iter().zip(&values) {
                    if naive_prec(&xg, k, mode, a, b) {
                        assert!(va <= vb);
                    }
                }
            }
        }
    }
}

#[test]
fn embedding_preserves_every_engine() {
    let mut r = rng(56);
    for _ in 0..60 {
        let g: ExactGame = random_game(&mut r, &GameShape::default());
        let xg = ExtendedGame::embed(&g);
        let profiles = common::all_profiles(g.state_count(), g.n_senders());
        for k in 1..=g.n_senders() {
            assert!(check_separability(&xg, k, DEFAULT_SEPARABILITY_CAP).unwrap().separable);
            for mode in Mode::ALL {
                let base = build_order(&g, k, mode).unwrap();
                let ext = build_order_extended(&xg, k, mode).unwrap();
                assert_eq!(base.edge_pairs(), ext.edge_pairs());
                assert_eq!(base.reach_matrix(), ext.reach_matrix());
                for _ in 0..5 {
                    let o: ExactOutcome = random_outcome(&mut r, g.state_count(), 6);
                    let a = check_outcome(&g, k, mode, &o).unwrap();
                    let b = check_outcome_extended(&xg, k, mode, &o).unwrap();
                    assert_eq!(a.feasible, b.feasible);
                }
                let o: ExactOutcome = random_feasible_outcome(&mut r, &base, 12);
                let spec = MediatorSpec::new(&g, k, mode, o.clone()).unwrap();
                let med = ExtendedMediator::new(&xg, k, mode, o).unwrap();
                for m in &profiles {
                    assert_eq!(spec.eval_raw(m).unwrap(), med.eval_raw(m).unwrap());
                }
                for timing in TIMINGS {
                    let opts = VerifyOptions {
                        timing,
                        ..VerifyOptions::default()
                    };
                    let a = verify_coalitions(&spec, k, mode, &opts).unwrap();
                    let b = verify_coalitions_extended(&med, k, mode, &opts).unwrap();
                    assert_eq!(a.passed, b.passed);
                }
            }
        }
    }
}

/// A game in which each sender's signal alone identifies the profile.
fn revealing_game<R: Rng>(r: &mut R) -> ExactExtendedGame {
    let n = r.gen_range(2..=3);
    let sizes: Vec<usize> = (0..n).map(|_| r.gen_range(2..=3)).collect();
    let len = r.gen_range(1..=*sizes.iter().min().unwrap());
    let columns: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&s| {
            let mut v: Vec<usize> = (0..s).collect();
            v.shuffle(r);
            v.truncate(len);
            v
        })
        .collect();
    let weights: Vec<i64> = (0..len).map(|_| r.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let mut pair = || [q(r.gen_range(0..=2), 1), q(r.gen_range(0..=2), 1)];
    let support = (0..len)
        .map(|j| SupportEntry {
            profile: columns.iter().map(|c| c[j]).collect(),
            prob: q(weights[j], total),
            receiver_u: pair(),
            sender_u: (0..n).map(|_| pair()).collect(),
        })
        .collect();
    let signals = sizes.iter().map(|&s| (0..s).map(|x| x.to_string()).collect()).collect();
    ExtendedGame::new(signals, support).unwrap()
}

#[test]
fn revealing_supports_keep_the_resilience_guarantees() {
    let mut r = rng(57);
    for _ in 0..300 {
        let xg = revealing_game(&mut r);
        for k in 1..=xg.n_senders() {
            assert!(check_separability(&xg, k, DEFAULT_SEPARABILITY_CAP).unwrap().separable);
            for (mode, timings) in [
                (Mode::Resilient, &TIMINGS[1..]),
                (Mode::StrongFull, &TIMINGS[..]),
            ] {
                let order = build_order_extended(&xg, k, mode).unwrap();
                for _ in 0..3 {
                    let o: ExactOutcome = random_feasible_outcome(&mut r, &order, 12);
                    let med = ExtendedMediator::new(&xg, k, mode, o).unwrap();
                    for &timing in timings {
                        let opts = VerifyOptions {
                            timing,
                            ..VerifyOptions::default()
                        };
                        let report = verify_coalitions_extended(&med, k, mode, &opts).unwrap();
                        assert!(report.passed, "k={k} {mode:?} {timing:?} {xg:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn pooled_information_sets_admit_profitable_misreports() {
    let p = |a: i64, b: i64| [q(a, 1), q(b, 1)];
    let entry = |profile: Vec<usize>, s0, s1| SupportEntry {
        profile,
        prob: q(1, 3),
        receiver_u: p(1, 1),
        sender_u: vec![s0, s1],
    };
    let bits = || vec!["0".to_string(), "1".to_string()];
    let xg = ExtendedGame::new(
        vec![bits(), bits()],
        vec![
            entry(vec![1, 0], p(1, 0), p(1, 0)),
            entry(vec![0, 0], p(1, 0), p(1, 1)),
            entry(vec![1, 1], p(0, 1), p(0, 0)),
        ],
    )
    .unwrap();
    assert!(check_separability(&xg, 1, DEFAULT_SEPARABILITY_CAP).unwrap().separable);
    // sender 1 is indifferent given signal 1, but strictly prefers 1 at (1,1)
    assert_eq!(lean(&xg, 0, 2), 0);

    let o = ExactOutcome::new(vec![q(1, 1), q(1, 1), q(1, 1)]).unwrap();
    let med = ExtendedMediator::new(&xg, 1, Mode::Resilient, o).unwrap();
    // reporting 0 on signal 1 leaves (1,0) in place and pulls (1,1) to 0
    assert_eq!(med.eval_raw(&[0, 0]).unwrap(), q(1, 1));
    assert_eq!(med.eval_raw(&[0, 1]).unwrap(), q(0, 1));
    for timing in TIMINGS {
        let opts = VerifyOptions {
            timing,
            ..VerifyOptions::default()
        };
        let report = verify_coalitions_extended(&med, 1, Mode::Resilient, &opts).unwrap();
        let v = report.coalition_violation.expect("a profitable misreport");
        assert_eq!(v.coalition, vec![0]);
        assert_eq!(v.deltas, vec![q(1, 3)]);
    }
}

#[test]
fn majority_game_reference_values() {
    let xg: ExactExtendedGame = parse_extended_game(&majority_game_json()).unwrap();
    assert_eq!(xg.support_len(), 32);
    let r3 = check_separability(&xg, 3, DEFAULT_SEPARABILITY_CAP).unwrap();
    assert!(!r3.separable);
    let w = r3.witness.unwrap();
    assert_eq!((w.sender, w.profile.join(",")), (0, "0,0,0,1,1".to_string()));
    assert_eq!(w.first, vec![0, 1, 2]);
    assert_eq!(w.second, vec![0, 3, 4]);
    assert!(check_separability(&xg, 1, DEFAULT_SEPARABILITY_CAP).unwrap().separable);

    // sender 5 given its own signal 1: majority is 1 with probability 11/16
    let node = xg.support_index(&[0, 0, 0, 0, 1]).unwrap();
    assert_eq!(lean(&xg, 4, node), 1);
    let ones = xg
        .support()
        .iter()
        .filter(|e| e.profile[4] == 1 && e.profile.iter().filter(|&&b| b == 1).count() >= 3)
        .count();
    assert_eq!(q(ones as i64, 16), q(11, 16));
    let order = build_order_extended(&xg, 1, Mode::Resilient).unwrap();
    assert!(order.has_edge(node, xg.support_index(&[0, 0, 0, 0, 0]).unwrap()));
}

#[test]
fn embedded_reference_game_has_the_base_edge() {
    let g: ExactGame = parse_game(G1_JSON).unwrap();
    let xg = ExtendedGame::embed(&g);
    let order = build_order_extended(&xg, 2, Mode::Resilient).unwrap();
    assert_eq!(order.edge_pairs(), vec![(0, 1)]);
    assert_eq!(xg.n_senders(), 4);
    assert_eq!(g.n_senders(), 4);
}
