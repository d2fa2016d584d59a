use std::path::PathBuf;

use serde_json::{json, Value};

use resilient_mediator::extended::{
    build_order_extended, check_outcome_extended, check_separability, observed_signals, optimize_extended,
    verify_coalitions_extended, DEFAULT_SEPARABILITY_CAP,
};
use resilient_mediator::format::{outcome_to_json, parse_any_game, parse_outcome, AnyGame};
use resilient_mediator::optimize::{check_outcome, optimize};
use resilient_mediator::order::{build_order, Witness};
use resilient_mediator::scalar::parse_rational;
use resilient_mediator::verify::{simulate, verify_mechanism, verify_receiver};
use resilient_mediator::{
    ExactExtendedGame, ExactGame, ExactOutcome, ExtendedGame, ExtendedMediator, FeasibilityReport, MediatorSpec,
    MessageProfile, Model, Objective, OrderRelation, Rational, VerificationReport, VerifyOptions,
};

use crate::render::{self, rat};
use crate::{CliError, Command, Inputs, OrderArgs, Report, EXIT_NEGATIVE, EXIT_OK};

enum Loaded {
    Base(ExactGame),
    Extended(ExactExtendedGame),
}

impl Loaded {
    fn model(&self) -> &dyn Model<Rational> {
        match self {
            Loaded::Base(g) => g,
            Loaded::Extended(xg) => xg,
        }
    }

    fn node_names(&self) -> Vec<String> {
        let m = self.model();
        (0..m.node_count()).map(|w| m.node_name(w)).collect()
    }

    fn render_profile(&self, msgs: &[usize]) -> Vec<String> {
        match self {
            Loaded::Base(g) => msgs.iter().map(|&w| g.states()[w].clone()).collect(),
            Loaded::Extended(xg) => xg.render_profile(msgs),
        }
    }

    /// Reports of `members` rendered in their own alphabets.
    fn render_reports(&self, members: &[usize], reports: &[usize]) -> Vec<String> {
        match self {
            Loaded::Base(g) => reports.iter().map(|&w| g.states()[w].clone()).collect(),
            Loaded::Extended(xg) => members
                .iter()
                .zip(reports)
                .map(|(&i, &x)| xg.signals()[i][x].clone())
                .collect(),
        }
    }

    fn order(&self, args: &OrderArgs) -> Result<OrderRelation, CliError> {
        Ok(match self {
            Loaded::Base(g) => build_order(g, args.k, args.mode)?,
            Loaded::Extended(xg) => build_order_extended(xg, args.k, args.mode)?,
        })
    }

    fn outcome(&self, text: &str) -> Result<ExactOutcome, CliError> {
        Ok(parse_outcome(text, self.model())?)
    }
}

fn load(inputs: &mut Inputs, path: &PathBuf) -> Result<Loaded, CliError> {
    let text = inputs.read("game", path)?;
    Ok(match parse_any_game(&text)? {
        AnyGame::Base(g) => Loaded::Base(g),
        AnyGame::Extended(xg) => Loaded::Extended(xg),
    })
}

fn load_with_outcome(inputs: &mut Inputs, game: &PathBuf, outcome: &PathBuf) -> Result<(Loaded, ExactOutcome), CliError> {
    let g = load(inputs, game)?;
    let text = inputs.read("outcome", outcome)?;
    let o = g.outcome(&text)?;
    Ok((g, o))
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn settings(args: &OrderArgs) -> Value {
    json!({ "k": args.k, "mode": args.mode })
}

pub(crate) fn execute(command: &Command, inputs: &mut Inputs) -> Result<Report, CliError> {
    match command {
        Command::Order { game, order } => cmd_order(&load(inputs, game)?, order),
        Command::Check { game, outcome, order } => {
            let (g, o) = load_with_outcome(inputs, game, outcome)?;
            cmd_check(&g, &o, order)
        }
        Command::Optimize { game, order, objective } => cmd_optimize(&load(inputs, game)?, order, objective),
        Command::Mechanism {
            game,
            outcome,
            order,
            messages,
        } => {
            let (g, o) = load_with_outcome(inputs, game, outcome)?;
            cmd_mechanism(&g, o, order, messages)
        }
        Command::Verify {
            game,
            outcome,
            order,
            caps,
            timing,
        } => {
            let (g, o) = load_with_outcome(inputs, game, outcome)?;
            let options = VerifyOptions {
                cap: *caps,
                timing: *timing,
            };
            cmd_verify(&g, o, order, &options)
        }
        Command::Simulate {
            game,
            outcome,
            order,
            rounds,
            seed,
        } => {
            let (g, o) = load_with_outcome(inputs, game, outcome)?;
            cmd_simulate(&g, o, order, *rounds, *seed)
        }
        Command::Separability { game, k } => cmd_separability(&load(inputs, game)?, *k),
    }
}

fn cmd_order(g: &Loaded, args: &OrderArgs) -> Result<Report, CliError> {
    let order = g.order(args)?;
    let names = g.node_names();
    let edges: Vec<[&str; 2]> = order
        .edges()
        .iter()
        .map(|e| [names[e.from].as_str(), names[e.to].as_str()])
        .collect();
    let witnesses: Vec<Value> = order
        .edges()
        .iter()
        .map(|e| match &e.witness {
            Witness::Direct => json!({ "from": names[e.from], "to": names[e.to], "kind": "direct" }),
            Witness::Chain(m) => json!({
                "from": names[e.from],
                "to": names[e.to],
                "kind": "chain",
                "profile": g.render_profile(m.as_slice()),
            }),
        })
        .collect();
    let payload = json!({
        "settings": settings(args),
        "nodes": names,
        "edges": edges,
        "reach": order.reach_matrix(),
        "witnesses": witnesses,
    });
    Ok(Report { payload, code: EXIT_OK })
}

fn feasibility(g: &Loaded, r: &FeasibilityReport<Rational>) -> Value {
    let names = g.node_names();
    let order: Vec<Value> = r
        .violated_order
        .iter()
        .map(|v| {
            json!({
                "from": names[v.from],
                "to": names[v.to],
                "from_value": rat(&v.from_value),
                "to_value": rat(&v.to_value),
            })
        })
        .collect();
    let receiver: Vec<Value> = r
        .violated_receiver
        .iter()
        .map(|v| json!({ "action": v.action.index(), "expected": rat(&v.expected), "baseline": rat(&v.baseline) }))
        .collect();
    json!({ "feasible": r.feasible, "violated_order": order, "violated_receiver": receiver })
}

fn cmd_check(g: &Loaded, o: &ExactOutcome, args: &OrderArgs) -> Result<Report, CliError> {
    let report = match g {
        Loaded::Base(b) => check_outcome(b, args.k, args.mode, o)?,
        Loaded::Extended(xg) => check_outcome_extended(xg, args.k, args.mode, o)?,
    };
    let mut payload = feasibility(g, &report);
    payload["settings"] = settings(args);
    Ok(Report {
        payload,
        code: verdict(report.feasible),
    })
}

/// `receiver`, `sender:I` (1-based), `welfare`, or `welfare:W1,...,Wn,WR`.
fn parse_objective(text: &str, n: usize) -> Result<Objective<Rational>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("objective {text:?}: {why}"));
    match text.split_once(':') {
        None if text == "receiver" => Ok(Objective::Receiver),
        None if text == "welfare" => Ok(Objective::welfare(n)),
        Some(("sender", i)) => {
            let i: usize = i.trim().parse().map_err(|_| bad("sender number expected"))?;
            if i == 0 || i > n {
                return Err(bad(&format!("senders are numbered 1..={n}")));
            }
            Ok(Objective::Sender(i - 1))
        }
        Some(("welfare", weights)) => {
            let mut w = weights
                .split(',')
                .map(|s| parse_rational(s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            if w.len() != n + 1 {
                return Err(bad(&format!("expected {} weights, senders then receiver", n + 1)));
            }
            let receiver = w.pop().expect("length checked");
            Ok(Objective::Welfare { senders: w, receiver })
        }
        _ => Err(bad("expected receiver, sender:I, welfare or welfare:W1,...,Wn,WR")),
    }
}

fn cmd_optimize(g: &Loaded, args: &OrderArgs, objective: &str) -> Result<Report, CliError> {
    let parsed = parse_objective(objective, g.model().sender_count())?;
    let best = match g {
        Loaded::Base(b) => optimize(b, args.k, args.mode, &parsed)?,
        Loaded::Extended(xg) => optimize_extended(xg, args.k, args.mode, &parsed)?,
    };
    let payload = json!({
        "settings": settings(args),
        "objective": objective,
        "value": rat(&best.value),
        "outcome": outcome_to_json(&best.outcome, g.model())["o_star"],
    });
    Ok(Report { payload, code: EXIT_OK })
}

fn cmd_mechanism(g: &Loaded, o: ExactOutcome, args: &OrderArgs, messages: &str) -> Result<Report, CliError> {
    let names = g.node_names();
    let (profile, node, q, sets) = match g {
        Loaded::Base(b) => {
            let m = MessageProfile::parse(b, messages)?;
            let spec = MediatorSpec::new(b, args.k, args.mode, o)?;
            let node = m.pure_state();
            let sets = match node {
                Some(_) => None,
                None => Some((spec.upper_pure_set(&m)?, spec.lower_pure_set(&m)?)),
            };
            (m.clone(), node, spec.eval(&m)?, sets)
        }
        Loaded::Extended(xg) => {
            let m = xg.parse_profile(messages)?;
            let med = ExtendedMediator::new(xg, args.k, args.mode, o)?;
            let node = xg.support_index(m.as_slice());
            let sets = match node {
                Some(_) => None,
                None => Some((med.upper_support_set(&m)?, med.lower_support_set(&m)?)),
            };
            (m.clone(), node, med.eval(&m)?, sets)
        }
    };
    let label = |set: &[usize]| set.iter().map(|&w| names[w].clone()).collect::<Vec<_>>();
    let mut payload = json!({
        "settings": settings(args),
        "messages": g.render_profile(profile.as_slice()),
        "node": node.map(|w| names[w].clone()),
        "q": rat(&q),
    });
    if let Some((upper, lower)) = sets {
        payload["upper"] = json!(label(&upper));
        payload["lower"] = json!(label(&lower));
    }
    Ok(Report { payload, code: EXIT_OK })
}

fn cmd_verify(g: &Loaded, o: ExactOutcome, args: &OrderArgs, options: &VerifyOptions) -> Result<Report, CliError> {
    let (report, labels): (VerificationReport<Rational>, Box<dyn Fn(&[usize]) -> Vec<Value>>) = match g {
        Loaded::Base(b) => {
            let spec = MediatorSpec::new(b, args.k, args.mode, o)?;
            let report = verify_mechanism(&spec, args.k, args.mode, options)?;
            let states: Vec<Value> = b.states().iter().map(|s| json!({ "state": s })).collect();
            (report, Box::new(move |_| states.clone()))
        }
        Loaded::Extended(xg) => {
            let med = ExtendedMediator::new(xg, args.k, args.mode, o.clone())?;
            let receiver = verify_receiver(xg, &o)?;
            let coalitions = verify_coalitions_extended(&med, args.k, args.mode, options)?;
            let report = VerificationReport::combine(receiver, coalitions);
            (report, Box::new(move |members: &[usize]| observed(xg, members)))
        }
    };
    let body = render::verification(&report, |v| {
        labels(&v.coalition)
            .into_iter()
            .zip(&v.deviation)
            .map(|(mut row, reports)| {
                row["reports"] = json!(g.render_reports(&v.coalition, reports));
                row
            })
            .collect()
    });
    let mut payload = json!({
        "settings": settings(args),
        "timing": options.timing,
        "cap": options.cap.to_string(),
    });
    payload["report"] = body;
    Ok(Report {
        payload,
        code: verdict(report.passed),
    })
}

fn observed(xg: &ExactExtendedGame, members: &[usize]) -> Vec<Value> {
    observed_signals(xg, members)
        .into_iter()
        .map(|key| {
            let shown: Vec<String> = members
                .iter()
                .zip(&key)
                .map(|(&i, &x)| xg.signals()[i][x].clone())
                .collect();
            json!({ "observed": shown })
        })
        .collect()
}

fn cmd_simulate(g: &Loaded, o: ExactOutcome, args: &OrderArgs, rounds: u64, seed: u64) -> Result<Report, CliError> {
    let report = match g {
        Loaded::Base(b) => {
            let spec = MediatorSpec::new(b, args.k, args.mode, o.clone())?;
            simulate(b, &spec, rounds, seed)?
        }
        Loaded::Extended(xg) => {
            let med = ExtendedMediator::new(xg, args.k, args.mode, o.clone())?;
            simulate(xg, &med, rounds, seed)?
        }
    };
    let names = g.node_names();
    let nodes: Vec<Value> = report
        .per_node
        .iter()
        .map(|f| {
            json!({
                "node": names[f.node],
                "visits": f.visits,
                "zeros": f.zeros,
                "frequency": f.frequency,
                "o_star": rat(o.get(f.node)),
            })
        })
        .collect();
    let payload = json!({
        "settings": settings(args),
        "rounds": report.rounds,
        "seed": report.seed,
        "per_node": nodes,
    });
    Ok(Report { payload, code: EXIT_OK })
}

fn cmd_separability(g: &Loaded, k: usize) -> Result<Report, CliError> {
    let embedded;
    let xg = match g {
        Loaded::Base(b) => {
            embedded = ExtendedGame::embed(b);
            &embedded
        }
        Loaded::Extended(xg) => xg,
    };
    let report = check_separability(xg, k, DEFAULT_SEPARABILITY_CAP)?;
    Ok(Report {
        payload: render::separability(&report),
        code: verdict(report.separable),
    })
}
