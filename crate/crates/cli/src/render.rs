use serde_json::{json, Value};

use resilient_mediator::extended::SeparabilityReport;
use resilient_mediator::scalar::render_rational;
use resilient_mediator::verify::{CoalitionViolation, VerificationStats};
use resilient_mediator::{Rational, VerificationReport};

pub fn rat(v: &Rational) -> Value {
    Value::String(render_rational(v))
}

/// 0-based member indices to 1-based sender numbers.
pub fn senders(members: &[usize]) -> Vec<usize> {
    members.iter().map(|i| i + 1).collect()
}

/// Counts are numbers when they fit in 64 bits, strings otherwise.
fn count(v: u128) -> Value {
    u64::try_from(v).map_or_else(|_| Value::String(v.to_string()), Value::from)
}

pub fn separability(r: &SeparabilityReport) -> Value {
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "sender": w.sender + 1,
            "profile": w.profile,
            "first": { "coalition": senders(&w.first), "preference": w.first_pref },
            "second": { "coalition": senders(&w.second), "preference": w.second_pref },
        })
    });
    json!({
        "k": r.k,
        "separable": r.separable,
        "checked": count(r.checked),
        "witness": witness,
    })
}

fn stats(s: &VerificationStats) -> Value {
    json!({
        "coalitions": s.coalitions,
        "deviation_space": count(s.deviation_space),
        "deviations_evaluated": count(s.deviations_evaluated),
    })
}

/// `rows` labels each information set and renders each member's report.
pub fn verification(
    r: &VerificationReport<Rational>,
    coalition_rows: impl Fn(&CoalitionViolation<Rational>) -> Vec<Value>,
) -> Value {
    let receiver = r
        .receiver_violation
        .as_ref()
        .map(|v| json!({ "strategy": v.strategy.name(), "gain": rat(&v.gain) }));
    let coalition = r.coalition_violation.as_ref().map(|v| {
        json!({
            "coalition": senders(&v.coalition),
            "deviation": coalition_rows(v),
            "deltas": v.deltas.iter().map(rat).collect::<Vec<_>>(),
        })
    });
    let gains: Vec<Value> = r
        .receiver_gains
        .iter()
        .map(|(s, g)| json!({ "strategy": s.name(), "gain": rat(g) }))
        .collect();
    json!({
        "passed": r.passed,
        "receiver_violation": receiver,
        "receiver_gains": gains,
        "coalition_violation": coalition,
        "stats": stats(&r.stats),
    })
}
