//! Brute-force reference implementations used as test oracles.
//!
//! These deliberately avoid the library's relation, LP and mediator code.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resilient_mediator::{ExactGame, Game, Mode, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn zero() -> Rational {
    q(0, 1)
}

/// `u(i,ω,1) - u(i,ω,0)` sign: +1 prefers 1, -1 prefers 0, 0 indifferent.
pub fn lean(g: &ExactGame, i: usize, w: usize) -> i32 {
    let [u0, u1] = g.sender_utility(i, w);
    if u1 > u0 {
        1
    } else if u1 < u0 {
        -1
    } else {
        0
    }
}

fn pure_of(v: &[usize]) -> Option<usize> {
    v.iter().all(|&x| x == v[0]).then_some(v[0])
}

/// Whether some coalition satisfying `mode` justifies the step, where
/// `target` is +1 for "prefers 1" and -1 for "prefers 0".
fn coalition_ok(g: &ExactGame, k: usize, mode: Mode, w: usize, c: &[usize], target: i32) -> bool {
    match mode {
        Mode::Resilient => c.iter().all(|&i| lean(g, i, w) == target),
        Mode::Strong => c.iter().any(|&i| lean(g, i, w) == target),
        Mode::StrongFull => (0..g.n_senders()).any(|i| {
            let size = c.len() + usize::from(!c.contains(&i));
            lean(g, i, w) == target && size <= k
        }),
    }
}

/// `a ≺ b` straight from the definition.
pub fn naive_prec(g: &ExactGame, k: usize, mode: Mode, a: &[usize], b: &[usize]) -> bool {
    let c: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    if c.is_empty() || c.len() > k {
        return false;
    }
    pure_of(a).is_some_and(|w| coalition_ok(g, k, mode, w, &c, 1))
        || pure_of(b).is_some_and(|w| coalition_ok(g, k, mode, w, &c, -1))
}

pub fn all_profiles(m: usize, n: usize) -> Vec<Vec<usize>> {
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut c| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = c % m;
                c /= m;
            }
            v
        })
        .collect()
}

/// Pure-to-pure reachability by breadth-first search over raw `≺` steps,
/// optionally bounded by the number of steps.
pub fn reach_by_chains(g: &ExactGame, k: usize, mode: Mode, max_steps: Option<usize>) -> Vec<Vec<bool>> {
    let (m, n) = (g.state_count(), g.n_senders());
    let profiles = all_profiles(m, n);
    let code = |v: &[usize]| v.iter().fold(0, |acc, &x| acc * m + x);
    let mut reach = vec![vec![false; m]; m];
    for s in 0..m {
        let mut dist = vec![usize::MAX; profiles.len()];
        let start = code(&vec![s; n]);
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            let d = dist[cur];
            if let Some(w) = pure_of(&profiles[cur]) {
                reach[s][w] = true;
            }
            if max_steps.is_some_and(|l| d >= l) {
                continue;
            }
            let next: Vec<usize> = if pure_of(&profiles[cur]).is_some() {
                (0..profiles.len()).collect()
            } else {
                (0..m).map(|w| code(&vec![w; n])).collect()
            };
            for nb in next {
                if dist[nb] == usize::MAX && naive_prec(g, k, mode, &profiles[cur], &profiles[nb]) {
                    dist[nb] = d + 1;
                    queue.push_back(nb);
                }
            }
        }
    }
    reach
}

/// Expected utility of a sender or the receiver (`None`) from raw tables.
pub fn expected(g: &ExactGame, sender: Option<usize>, o: &[Rational]) -> Rational {
    (0..g.state_count()).fold(zero(), |acc, w| {
        let [u0, u1] = match sender {
            Some(i) => g.sender_utility(i, w).clone(),
            None => g.receiver_utility(w).clone(),
        };
        acc + g.prior()[w].clone() * (o[w].clone() * u0 + (q(1, 1) - o[w].clone()) * u1)
    })
}

/// Receiver obedience from the definition.
pub fn receiver_ok(g: &ExactGame, o: &[Rational]) -> bool {
    let e = expected(g, None, o);
    let ones = vec![q(1, 1); g.state_count()];
    let zeros = vec![zero(); g.state_count()];
    e >= expected(g, None, &ones) && e >= expected(g, None, &zeros)
}

/// Order feasibility against an explicit reachability matrix.
pub fn respects(reach: &[Vec<bool>], o: &[Rational]) -> bool {
    (0..o.len()).all(|a| (0..o.len()).all(|b| !reach[a][b] || o[a] <= o[b]))
}

/// Best expected utility of `player` (`None` for the receiver) over the grid
/// `{0, 1/res, ..., 1}^m`, subject to order feasibility against `reach` and
/// receiver obedience. Integer arithmetic throughout.
pub fn grid_best(g: &ExactGame, reach: &[Vec<bool>], player: Option<usize>, res: i64) -> Option<Rational> {
    let m = g.state_count();
    let utility = |who: Option<usize>, w: usize| match who {
        Some(i) => g.sender_utility(i, w).clone(),
        None => g.receiver_utility(w).clone(),
    };
    // E(x) = U_1 + sum_w p_w (u0 - u1) x_w
    let slope = |who: Option<usize>| -> Vec<Rational> {
        (0..m)
            .map(|w| {
                let [u0, u1] = utility(who, w);
                g.prior()[w].clone() * (u0 - u1)
            })
            .collect()
    };
    let always_one = |who: Option<usize>| {
        (0..m).fold(zero(), |acc, w| acc + g.prior()[w].clone() * utility(who, w)[1].clone())
    };
    let obj = slope(player);
    let recv = slope(None);
    // obedience: sum recv_w x_w >= U_a - U_1 for a in {0, 1}
    let u1 = always_one(None);
    let u0 = (0..m).fold(zero(), |acc, w| acc + g.prior()[w].clone() * g.receiver_utility(w)[0].clone());
    let bounds = [u0 - u1.clone(), zero()];
    let scale = obj
        .iter()
        .chain(&recv)
        .chain(&bounds)
        .fold(1i128, |acc, v| lcm(acc, to_i128(v.denom())));
    let int = |v: &Rational| to_i128(&(v * Rational::from_integer(scale.into())).to_integer());
    let obj_i: Vec<i128> = obj.iter().map(int).collect();
    let recv_i: Vec<i128> = recv.iter().map(int).collect();
    let bounds_i: Vec<i128> = bounds.iter().map(|b| int(b) * res as i128).collect();
    let mut best: Option<i128> = None;
    let mut x = vec![0i64; m];
    loop {
        let ordered = (0..m).all(|a| (0..m).all(|b| !reach[a][b] || x[a] <= x[b]));
        let dot = |c: &[i128]| c.iter().zip(&x).map(|(ci, &xi)| ci * xi as i128).sum::<i128>();
        if ordered && bounds_i.iter().all(|&b| dot(&recv_i) >= b) {
            let v = dot(&obj_i);
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
        let mut i = 0;
        while i < m && x[i] == res {
            x[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
        x[i] += 1;
    }
    best.map(|v| always_one(player) + Rational::new(v.into(), (scale * res as i128).into()))
}

fn to_i128(v: &num_bigint::BigInt) -> i128 {
    i128::try_from(v).expect("small test instance")
}

fn lcm(a: i128, b: i128) -> i128 {
    use num_integer::Integer;
    a.lcm(&b)
}

/// Exact maximum of `c·x` over `{A x <= b, x >= 0}` by enumerating vertices.
pub fn vertex_max(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<Rational> {
    let n = c.len();
    // all constraints as rows `row·x <= rhs`, including `-x_i <= 0`
    let mut rows: Vec<(Vec<Rational>, Rational)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    for i in 0..n {
        let mut row = vec![zero(); n];
        row[i] = q(-1, 1);
        rows.push((row, zero()));
    }
    let feasible = |x: &[Rational]| {
        rows.iter().all(|(row, rhs)| {
            row.iter().zip(x).fold(zero(), |acc, (r, v)| acc + r * v) <= *rhs
        })
    };
    let mut best: Option<Rational> = None;
    for subset in subsets(rows.len(), n) {
        let sys: Vec<(Vec<Rational>, Rational)> = subset.iter().map(|&r| rows[r].clone()).collect();
        if let Some(x) = solve(sys) {
            if feasible(&x) {
                let v = c.iter().zip(&x).fold(zero(), |acc, (ci, xi)| acc + ci * xi);
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

/// Gauss-Jordan elimination; `None` when singular.
fn solve(mut sys: Vec<(Vec<Rational>, Rational)>) -> Option<Vec<Rational>> {
    let n = sys.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| sys[r].0[col] != zero())?;
        sys.swap(col, piv);
        let p = sys[col].0[col].clone();
        let (row, rhs) = sys[col].clone();
        let row: Vec<Rational> = row.iter().map(|v| v / &p).collect();
        let rhs = rhs / &p;
        sys[col] = (row.clone(), rhs.clone());
        for r in 0..n {
            if r != col && sys[r].0[col] != zero() {
                let f = sys[r].0[col].clone();
                for (v, pv) in sys[r].0.iter_mut().zip(&row) {
                    *v = v.clone() - &f * pv;
                }
                sys[r].1 = sys[r].1.clone() - &f * &rhs;
            }
        }
    }
    Some(sys.into_iter().map(|(_, rhs)| rhs).collect())
}

/// Three-sender example on which ex-ante coalition deviations beat the
/// resilient construction.
pub fn ex_ante_counterexample() -> ExactGame {
    let p = |a: i64, b: i64| [q(a, 1), q(b, 1)];
    Game::new(
        vec!["w1".into(), "w2".into()],
        vec![q(1, 2), q(1, 2)],
        vec![p(1, 0), p(0, 1)],
        vec![
            vec![p(0, 2), p(0, 1)],
            vec![p(1, 0), p(2, 0)],
            vec![p(0, 1), p(1, 0)],
        ],
    )
    .unwrap()
}

/// Two-sender example on which a truthful coalition member profits from
/// its partner's misreport under the strong construction.
pub fn strong_counterexample() -> ExactGame {
    let p = |a: i64, b: i64| [q(a, 1), q(b, 1)];
    Game::new(
        vec!["w1".into(), "w2".into()],
        vec![q(3, 5), q(2, 5)],
        vec![p(1, 0), p(0, 1)],
        vec![vec![p(0, 1), p(1, 0)], vec![p(0, 1), p(0, 1)]],
    )
    .unwrap()
}

/// The mediator's recommendation from the definition: pure inputs follow
/// the outcome; otherwise the states above and below the input decide.
pub fn naive_mediator(g: &ExactGame, k: usize, mode: Mode, o: &[Rational], msgs: &[usize]) -> Rational {
    if let Some(w) = pure_of(msgs) {
        return o[w].clone();
    }
    let n = g.n_senders();
    let above: Vec<&Rational> = (0..g.state_count())
        .filter(|&w| naive_prec(g, k, mode, msgs, &vec![w; n]))
        .map(|w| &o[w])
        .collect();
    let below: Vec<&Rational> = (0..g.state_count())
        .filter(|&w| naive_prec(g, k, mode, &vec![w; n], msgs))
        .map(|w| &o[w])
        .collect();
    match (above.iter().min(), below.iter().max()) {
        (None, _) => q(1, 1),
        (_, None) => zero(),
        (Some(&a), Some(&b)) => (a + b) / q(2, 1),
    }
}

/// Every deviation function `state -> reports` of every coalition of size at
/// most `k`, judged ex ante, or state by state when `interim`. Returns the
/// first coalition with a profitable deviation. Only for tiny games.
pub fn brute_violation(g: &ExactGame, k: usize, mode: Mode, o: &[Rational], interim: bool) -> Option<Vec<usize>> {
    let (m, n) = (g.state_count(), g.n_senders());
    let honest: Vec<Rational> = o.to_vec();
    for coalition in all_profiles(2, n).into_iter().map(|bits| {
        (0..n).filter(|&i| bits[i] == 1).collect::<Vec<usize>>()
    }) {
        if coalition.is_empty() || coalition.len() > k {
            continue;
        }
        let s = coalition.len();
        let reports = all_profiles(m, s);
        // q after the coalition reports `r` in state `w`
        let q_at = |w: usize, r: &[usize]| {
            let mut msgs = vec![w; n];
            for (&i, &x) in coalition.iter().zip(r) {
                msgs[i] = x;
            }
            naive_mediator(g, k, mode, o, &msgs)
        };
        let table: Vec<Vec<Rational>> = (0..m).map(|w| reports.iter().map(|r| q_at(w, r)).collect()).collect();
        let profitable = |qs: &[Rational]| {
            let gains: Vec<Rational> = coalition
                .iter()
                .map(|&i| expected(g, Some(i), qs) - expected(g, Some(i), &honest))
                .collect();
            match mode {
                Mode::Resilient => gains.iter().all(|d| *d > zero()),
                Mode::Strong | Mode::StrongFull => gains.iter().any(|d| *d > zero()),
            }
        };
        if interim {
            for w in 0..m {
                for qw in &table[w] {
                    let mut qs = honest.clone();
                    qs[w] = qw.clone();
                    if profitable(&qs) {
                        return Some(coalition);
                    }
                }
            }
        } else {
            for choice in all_profiles(reports.len(), m) {
                let qs: Vec<Rational> = (0..m).map(|w| table[w][choice[w]].clone()).collect();
                if profitable(&qs) {
                    return Some(coalition);
                }
            }
        }
    }
    None
}
