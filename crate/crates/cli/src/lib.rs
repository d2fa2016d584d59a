//! The `rmed` command line: every command reads JSON game and outcome
//! files and prints a single JSON document on stdout.
//!
//! The document echoes the command, lists the SHA-256 digest of every input
//! file, and carries the command's payload and exit status. Rationals are
//! strings in lowest terms and senders are numbered from 1.
//!
//! Exit status is 0 on success (feasible, passing, separable), 1 on a
//! negative verdict, and 2 on usage or input errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use resilient_mediator::{DeviationTiming, Mode};

mod commands;
mod render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rmed", version, about = "Coalition-resilient mediators for information aggregation games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Largest coalition size to guard against
    #[arg(long)]
    pub k: usize,
    /// weak, strong or strong-full
    #[arg(long, default_value = "weak", value_parser = parse_mode)]
    pub mode: Mode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order constraints between states (or support profiles), with witnesses
    Order {
        game: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
    },
    /// Feasibility of an outcome: order constraints and receiver obedience
    Check {
        game: PathBuf,
        outcome: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
    },
    /// Best feasible outcome for an objective
    Optimize {
        game: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
        /// receiver, sender:I, welfare, or welfare:W1,...,Wn,WR (senders
        /// first, receiver last)
        #[arg(long, default_value = "receiver")]
        objective: String,
    },
    /// The mediator's probability of recommending action 0 on one input
    Mechanism {
        game: PathBuf,
        outcome: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
        /// Comma separated reports, one per sender
        #[arg(long)]
        messages: String,
    },
    /// Exhaustive search for profitable receiver and coalition deviations
    Verify {
        game: PathBuf,
        outcome: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
        /// Refuse to enumerate more deviations than this
        #[arg(long, default_value_t = 1_000_000)]
        caps: u128,
        /// ex-ante (commit to a full reporting rule) or interim (deviate
        /// after observing)
        #[arg(long, default_value = "ex-ante", value_parser = parse_timing)]
        timing: DeviationTiming,
    },
    /// Play the mediated game with truthful senders and count recommendations
    Simulate {
        game: PathBuf,
        outcome: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, default_value_t = 10_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Whether all coalitions of size at most k agree on each sender's preference
    Separability {
        game: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Order { .. } => "order",
            Command::Check { .. } => "check",
            Command::Optimize { .. } => "optimize",
            Command::Mechanism { .. } => "mechanism",
            Command::Verify { .. } => "verify",
            Command::Simulate { .. } => "simulate",
            Command::Separability { .. } => "separability",
        }
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::from_cli_name(s).ok_or_else(|| format!("unknown mode {s:?} (expected weak, strong or strong-full)"))
}

fn parse_timing(s: &str) -> Result<DeviationTiming, String> {
    match s {
        "ex-ante" => Ok(DeviationTiming::ExAnte),
        "interim" => Ok(DeviationTiming::Interim),
        _ => Err(format!("unknown timing {s:?} (expected ex-ante or interim)")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] resilient_mediator::Error),
}

impl CliError {
    fn payload(&self) -> Value {
        let mut v = json!({ "error": self.to_string() });
        if let CliError::Core(resilient_mediator::Error::NotSeparable { report, .. }) = self {
            v["separability"] = render::separability(report);
        }
        v
    }
}

/// Input files read by a command, with their digests.
#[derive(Debug, Default)]
pub(crate) struct Inputs(Vec<Value>);

impl Inputs {
    pub(crate) fn read(&mut self, role: &str, path: &PathBuf) -> Result<String, CliError> {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: shown.clone(),
            source,
        })?;
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.0.push(json!({ "role": role, "path": shown, "sha256": digest }));
        String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("{shown} is not UTF-8: {e}")))
    }
}

/// Result of one command.
pub(crate) struct Report {
    pub payload: Value,
    pub code: i32,
}

/// Everything a process would write, plus its exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, S>(argv: I) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_ERROR,
                }
            } else {
                RunOutput {
                    stdout: text,
                    stderr: String::new(),
                    code: EXIT_OK,
                }
            };
        }
    };

    let mut inputs = Inputs::default();
    let (payload, code, stderr) = match commands::execute(&cli.command, &mut inputs) {
        Ok(r) => (r.payload, r.code, String::new()),
        Err(e) => (e.payload(), EXIT_ERROR, format!("error: {e}\n")),
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let doc = json!({
        "command": { "name": cli.command.name(), "argv": echo },
        "inputs": inputs.0,
        "payload": payload,
        "exit": code,
    });
    let mut stdout = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    stdout.push('\n');
    RunOutput { stdout, stderr, code }
}
