//! Planning, execution and independent verification of deterministic LOCC
//! transformations between bipartite pure states in Schmidt form.
//!
//! The crate is organised bottom-up:
//!
//! - [`schmidt`]: Schmidt coefficient vectors and the majorization test.
//! - [`step`]: diagonal Kraus operators, correction permutations and
//!   single measurement steps.
//! - [`solver`]: closed-form single-measurement solvers for 2- and
//!   3-dimensional blocks.
//! - [`ladder`]: intermediate-state chains and the full multi-step plan.
//! - [`oracle`]: brute-force full-matrix verification of plans.
//! - [`sample`]: seeded Monte Carlo trajectory sampling.
//!
//! Basis indices are 0-based everywhere in the API. The tail index `k` used
//! in majorization reports and chain links follows the 1-based convention of
//! the tail sums `sum_{j >= k}`.

pub mod error;
pub mod ladder;
pub mod oracle;
pub mod sample;
pub mod schmidt;
pub mod solver;
pub mod step;

pub use error::{LadderError, OracleError, SchmidtError, SolverError};
pub use ladder::{
    block_decompose, chain_majorization_check, choose_omega, embed_step, greatest_first_chain,
    intermediate_chain, plan_full, BlockDecomposition, GreatestFirstOutcome,
    InfeasibilityCertificate, IntermediateChain, LadderPlan, LinkCheck,
};
pub use oracle::{apply_kraus, verify_plan, FullState, Party, StepVerification, VerificationReport};
pub use sample::{sample_trajectories, sample_trajectory, FrequencyReport, TrajectoryRecord};
pub use schmidt::{effective_rank, majorizes, validate, MajorizationReport, SchmidtVector};
pub use solver::{solve2, solve3};
pub use step::{CaseTag, DiagonalKraus, MeasurementStep, OutcomeBranch, Permutation};

/// Input normalization drift that is silently renormalized.
pub const EPS_NORM: f64 = 1e-9;
/// Tolerance for majorization tail-sum comparisons (squared coefficients).
pub const EPS_CMP: f64 = 1e-12;
/// Threshold below which a coefficient counts as zero.
pub const EPS_ZERO: f64 = 1e-12;
/// Tolerance for POVM completeness and probability normalization.
pub const EPS_COMPLETE: f64 = 1e-12;
/// Largest dimension accepted by the full-matrix oracle.
pub const ORACLE_MAX_DIM: usize = 64;
