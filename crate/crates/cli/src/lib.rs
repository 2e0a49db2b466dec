//! Command-line front end for `detlocc`.
//!
//! Each invocation reads one JSON problem from stdin and writes one report to
//! stdout, either as text or as a JSON transcript
//! (`schema/transcript.schema.json`).
//!
//! Exit codes: 0 success, 1 input error, 2 source not majorized by target,
//! 3 plan construction or verification failure.

pub mod render;
pub mod transcript;

use clap::{Args, Parser, Subcommand, ValueEnum};
use detlocc_core::{
    greatest_first_chain, majorizes, plan_full, sample_trajectories, validate, verify_plan,
    LadderError, SchmidtError, SchmidtVector,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use transcript::{
    chain_squares, plan_steps, GreatestFirst, Majorization, Normalized, Simulation, Transcript,
    Verification,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_MAJORIZED: i32 = 2;
pub const EXIT_PLAN_FAILED: i32 = 3;

/// A transformation problem as read from stdin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    /// Entries are squared coefficients rather than amplitudes.
    #[serde(default)]
    pub squared: bool,
    /// Sort entries instead of rejecting unsorted input.
    #[serde(default)]
    pub autosort: bool,
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot parse problem: {0}")]
    Json(#[from] serde_json::Error),
    #[error("source: {0}")]
    Source(SchmidtError),
    #[error("target: {0}")]
    Target(SchmidtError),
    #[error("source has dimension {source_dim}, target has {target_dim}")]
    DimensionMismatch { source_dim: usize, target_dim: usize },
    #[error("shots must be at least 1")]
    NoShots,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn parse(&self) -> Result<(SchmidtVector, SchmidtVector), InputError> {
        let source = validate(&self.source, self.squared, self.autosort).map_err(InputError::Source)?;
        let target = validate(&self.target, self.squared, self.autosort).map_err(InputError::Target)?;
        if source.dim() != target.dim() {
            return Err(InputError::DimensionMismatch {
                source_dim: source.dim(),
                target_dim: target.dim(),
            });
        }
        Ok((source, target))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "detlocc", version, about = "Plan and verify deterministic LOCC transformations of bipartite pure states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Read coefficients as squared values (reduced-state eigenvalues)
    #[arg(long)]
    pub squared: bool,
    /// Sort coefficients instead of rejecting unsorted input
    #[arg(long)]
    pub autosort: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether the source can be transformed into the target
    Check(Common),
    /// Build and verify the full measurement protocol
    Plan(Common),
    /// Build the protocol and sample outcome trajectories
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, env = "DLT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Try the greatest-first ordering and report where it loses rank
    DemoInfeasible {
        #[command(flatten)]
        common: Common,
        /// Block dimension
        #[arg(short = 'm', long = "block", default_value_t = 2)]
        m: usize,
    },
}

/// Result of one command: exit code and the text for each stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(e: InputError) -> Self {
        Self {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Runs a parsed command line against the problem text read from stdin.
pub fn run(cli: &Cli, input: &str) -> Outcome {
    let common = match &cli.command {
        Command::Check(c) | Command::Plan(c) => c,
        Command::Simulate { common, .. } | Command::DemoInfeasible { common, .. } => common,
    };
    let mut spec = match ProblemSpec::from_json(input) {
        Ok(s) => s,
        Err(e) => return Outcome::input_error(e),
    };
    spec.squared |= common.squared;
    spec.autosort |= common.autosort;
    let (code, transcript) = match &cli.command {
        Command::Check(_) => cmd_check(&spec),
        Command::Plan(_) => cmd_plan(&spec),
        Command::Simulate { shots, seed, .. } => cmd_simulate(&spec, *shots, *seed),
        Command::DemoInfeasible { m, .. } => cmd_demo_infeasible(&spec, *m),
    };
    match transcript {
        Err(e) => Outcome::input_error(e),
        Ok(t) => {
            let stdout = match common.format {
                Format::Machine => to_json(&t),
                Format::Human => render::human(&t),
            };
            let stderr = match &t.error {
                Some(e) => format!("error: {e}\n"),
                None => String::new(),
            };
            Outcome { code, stdout, stderr }
        }
    }
}

pub fn to_json(t: &Transcript) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("transcript is serializable");
    s.push('\n');
    s
}

type CommandResult = (i32, Result<Transcript, InputError>);

/// Validates the problem and fills in the majorization section.
fn start(command: &str, spec: &ProblemSpec) -> Result<(Transcript, SchmidtVector, SchmidtVector, bool), InputError> {
    let (source, target) = spec.parse()?;
    let report = majorizes(&source, &target).expect("dimensions checked");
    let mut t = Transcript::new(command, spec.clone());
    t.normalized = Some(Normalized::new(&source, &target));
    t.majorization = Some(Majorization::from(&report));
    if !report.holds {
        t.error = Some(
            LadderError::NotMajorized {
                failing_k: report.failing_k,
            }
            .to_string(),
        );
    }
    Ok((t, source, target, report.holds))
}

pub fn cmd_check(spec: &ProblemSpec) -> CommandResult {
    match start("check", spec) {
        Err(e) => (EXIT_INPUT, Err(e)),
        Ok((t, _, _, holds)) => (if holds { EXIT_OK } else { EXIT_NOT_MAJORIZED }, Ok(t)),
    }
}

/// Plans and verifies; returns the transcript, the plan and the exit code
/// reached so far.
fn planned(command: &str, spec: &ProblemSpec) -> Result<(i32, Transcript, Option<detlocc_core::LadderPlan>), InputError> {
    let (mut t, source, target, holds) = start(command, spec)?;
    if !holds {
        return Ok((EXIT_NOT_MAJORIZED, t, None));
    }
    let plan = match plan_full(&source, &target) {
        Ok(p) => p,
        Err(e) => {
            t.error = Some(e.to_string());
            return Ok((EXIT_PLAN_FAILED, t, None));
        }
    };
    let report = verify_plan(&plan);
    t.chain = Some(chain_squares(&plan.chain));
    t.steps = Some(plan_steps(&plan));
    t.verification = Some(Verification::from(&report));
    if !report.passed {
        t.error = Some("plan failed oracle verification".into());
        return Ok((EXIT_PLAN_FAILED, t, Some(plan)));
    }
    Ok((EXIT_OK, t, Some(plan)))
}

pub fn cmd_plan(spec: &ProblemSpec) -> CommandResult {
    match planned("plan", spec) {
        Err(e) => (EXIT_INPUT, Err(e)),
        Ok((code, t, _)) => (code, Ok(t)),
    }
}

pub fn cmd_simulate(spec: &ProblemSpec, shots: u64, seed: u64) -> CommandResult {
    if shots == 0 {
        return (EXIT_INPUT, Err(InputError::NoShots));
    }
    let (code, mut t, plan) = match planned("simulate", spec) {
        Err(e) => return (EXIT_INPUT, Err(e)),
        Ok(r) => r,
    };
    let Some(plan) = plan else {
        return (code, Ok(t));
    };
    let report = sample_trajectories(&plan, shots, seed);
    t.simulation = Some(Simulation::new(&plan, &report));
    if report.matched != shots && code == EXIT_OK {
        t.error = Some(format!("{} of {} trajectories missed the target", shots - report.matched, shots));
        return (EXIT_PLAN_FAILED, Ok(t));
    }
    (code, Ok(t))
}

pub fn cmd_demo_infeasible(spec: &ProblemSpec, m: usize) -> CommandResult {
    let (mut t, source, target, holds) = match start("demo-infeasible", spec) {
        Err(e) => return (EXIT_INPUT, Err(e)),
        Ok(r) => r,
    };
    if !holds {
        return (EXIT_NOT_MAJORIZED, Ok(t));
    }
    match greatest_first_chain(&source, &target, m) {
        Ok(outcome) => {
            t.greatest_first = Some(GreatestFirst::new(m, &outcome));
            (EXIT_OK, Ok(t))
        }
        Err(e) => {
            t.error = Some(e.to_string());
            (EXIT_INPUT, Ok(t))
        }
    }
}
