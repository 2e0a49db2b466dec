//! Serialized transcript format.
//!
//! Every command emits one [`Transcript`]; sections a command does not
//! produce are omitted. Floats are written in their shortest round-trip form.

use detlocc_core::{
    FrequencyReport, GreatestFirstOutcome, InfeasibilityCertificate, IntermediateChain, LadderPlan,
    MajorizationReport, MeasurementStep, SchmidtVector, VerificationReport,
};
use serde::{Deserialize, Serialize};

use crate::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub problem: ProblemSpec,
    /// Validated squared coefficients, sorted non-increasing.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normalized: Option<Normalized>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub majorization: Option<Majorization>,
    /// Squared coefficients of every chain state at fixed basis positions.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chain: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub steps: Option<Vec<Step>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verification: Option<Verification>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simulation: Option<Simulation>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub greatest_first: Option<GreatestFirst>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl Transcript {
    pub fn new(command: &str, problem: ProblemSpec) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            problem,
            normalized: None,
            majorization: None,
            chain: None,
            steps: None,
            verification: None,
            simulation: None,
            greatest_first: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
}

impl Normalized {
    pub fn new(source: &SchmidtVector, target: &SchmidtVector) -> Self {
        Self {
            source: source.squares(),
            target: target.squares(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Majorization {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failing_k: Option<usize>,
    /// `sum_{j>=k} source_j - sum_{j>=k} target_j` for `k = 1..=n`.
    pub tail_margins: Vec<f64>,
}

impl From<&MajorizationReport> for Majorization {
    fn from(r: &MajorizationReport) -> Self {
        Self {
            holds: r.holds,
            failing_k: r.failing_k,
            tail_margins: r.tail_margins.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub index: usize,
    pub case: String,
    /// Half-open range of basis positions the block measurement acts on.
    pub block: [usize; 2],
    pub pruned_count: usize,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// Index announced to the other party when this outcome occurs.
    pub index: usize,
    pub diag: Vec<f64>,
    pub probability: f64,
    /// Basis relabeling `|i> -> |correction[i]>` applied by both parties.
    pub correction: Vec<usize>,
}

impl Step {
    pub fn new(index: usize, block: [usize; 2], step: &MeasurementStep) -> Self {
        Self {
            index,
            case: step.case_tag.as_str().to_string(),
            block,
            pruned_count: step.pruned_count,
            branches: step
                .branches
                .iter()
                .enumerate()
                .map(|(i, b)| Branch {
                    index: i,
                    diag: b.op.diag.clone(),
                    probability: b.prob,
                    correction: b.correction.map().to_vec(),
                })
                .collect(),
        }
    }
}

pub fn chain_squares(chain: &IntermediateChain) -> Vec<Vec<f64>> {
    chain
        .layouts
        .iter()
        .map(|l| l.iter().map(|a| a * a).collect())
        .collect()
}

pub fn plan_steps(plan: &LadderPlan) -> Vec<Step> {
    plan.steps
        .iter()
        .zip(&plan.chain.blocks)
        .enumerate()
        .map(|(k, (s, r))| Step::new(k, [r.start, r.end], s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub passed: bool,
    pub tolerance: f64,
    pub dimension_supported: bool,
    pub structure_ok: bool,
    /// Absent when a check could not produce a finite value.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_deviation: Option<f64>,
    pub paths: u64,
    pub terminal_states: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub path_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub terminal_deviation: Option<f64>,
    pub steps: Vec<StepCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub step: usize,
    pub completeness: f64,
    pub probability_sum: f64,
    pub probability: f64,
    pub post_state: f64,
    pub spectrum: f64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl From<&VerificationReport> for Verification {
    fn from(r: &VerificationReport) -> Self {
        Self {
            passed: r.passed,
            tolerance: r.tolerance,
            dimension_supported: r.dimension_supported,
            structure_ok: r.structure_ok,
            max_deviation: finite(r.max_deviation()),
            paths: r.paths,
            terminal_states: r.terminal_states,
            path_probability: finite(r.path_probability),
            terminal_deviation: finite(r.terminal_deviation),
            steps: r
                .steps
                .iter()
                .map(|s| StepCheck {
                    step: s.step,
                    completeness: s.completeness,
                    probability_sum: s.probability_sum,
                    probability: s.probability,
                    post_state: s.post_state,
                    spectrum: s.spectrum,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub seed: u64,
    pub shots: u64,
    pub matched: u64,
    pub match_rate: f64,
    pub max_deviation: f64,
    /// Per step, per branch.
    pub branches: Vec<Vec<BranchFrequency>>,
    pub paths: Vec<PathCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFrequency {
    pub count: u64,
    pub frequency: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCount {
    pub branches: Vec<usize>,
    pub count: u64,
}

impl Simulation {
    pub fn new(plan: &LadderPlan, r: &FrequencyReport) -> Self {
        Self {
            seed: r.seed,
            shots: r.shots,
            matched: r.matched,
            match_rate: r.match_rate(),
            max_deviation: r.max_deviation,
            branches: r
                .branch_counts
                .iter()
                .zip(&plan.steps)
                .enumerate()
                .map(|(k, (counts, step))| {
                    counts
                        .iter()
                        .zip(&step.branches)
                        .enumerate()
                        .map(|(i, (&count, b))| BranchFrequency {
                            count,
                            frequency: r.branch_frequency(k, i),
                            probability: b.prob,
                        })
                        .collect()
                })
                .collect(),
            paths: r
                .path_counts
                .iter()
                .map(|(p, &count)| PathCount {
                    branches: p.clone(),
                    count,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreatestFirst {
    pub m: usize,
    pub collapsed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chain: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub position: usize,
    pub tilde_squared: f64,
    pub intermediate_rank: usize,
    pub target_rank: usize,
    /// Squared coefficients of the collapsed intermediate state.
    pub state: Vec<f64>,
}

impl From<&InfeasibilityCertificate> for Certificate {
    fn from(c: &InfeasibilityCertificate) -> Self {
        Self {
            k: c.k,
            position: c.position,
            tilde_squared: c.tilde_squared,
            intermediate_rank: c.intermediate_rank,
            target_rank: c.target_rank,
            state: c.layout.iter().map(|a| a * a).collect(),
        }
    }
}

impl GreatestFirst {
    pub fn new(m: usize, outcome: &GreatestFirstOutcome) -> Self {
        match outcome {
            GreatestFirstOutcome::Completed(chain) => Self {
                m,
                collapsed: false,
                chain: Some(chain_squares(chain)),
                certificate: None,
            },
            GreatestFirstOutcome::Collapsed(c) => Self {
                m,
                collapsed: true,
                chain: None,
                certificate: Some(c.into()),
            },
        }
    }
}
