//! Brute-force verification on full amplitude matrices.
//!
//! A state `sum_{jk} A_jk |j>|k>` is stored as the dense matrix `A`, so an
//! operator that failed to preserve Schmidt form would show up as
//! off-diagonal weight instead of being hidden by a diagonal shortcut.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::OracleError;
use crate::ladder::LadderPlan;
use crate::schmidt::sorted_squares;
use crate::step::{DiagonalKraus, MeasurementStep, Permutation};
use crate::{EPS_ZERO, ORACLE_MAX_DIM};

/// Pass threshold for every oracle comparison.
pub const VERIFY_TOL: f64 = 1e-10;

/// Terminal states closer than this are merged when enumerating paths.
const MERGE_TOL: f64 = 1e-9;

/// Distinct states tracked during path enumeration before giving up.
const FRONTIER_CAP: usize = 4096;

/// Bipartite pure state as a dense coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    amp: DMatrix<f64>,
}

/// The party holding the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    A,
    B,
}

impl FullState {
    /// Schmidt-form state with the given amplitudes on the diagonal.
    pub fn from_layout(layout: &[f64]) -> Self {
        Self {
            amp: DMatrix::from_diagonal(&DVector::from_column_slice(layout)),
        }
    }

    pub fn from_matrix(amp: DMatrix<f64>) -> Self {
        assert!(amp.is_square(), "coefficient matrix must be square");
        Self { amp }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.amp
    }

    pub fn dim(&self) -> usize {
        self.amp.nrows()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amp.norm_squared()
    }

    /// `rho_A = A A^T`.
    pub fn reduced_a(&self) -> DMatrix<f64> {
        &self.amp * self.amp.transpose()
    }

    /// Eigenvalues of `rho_A`, sorted non-increasing.
    pub fn reduced_spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.reduced_a()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.amp.diagonal().iter().copied().collect()
    }

    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.amp[(i, j)].abs())
            .fold(0.0, f64::max)
    }

    /// Both parties relabel their basis: `P A P^T` with `P|i> = |map[i]>`.
    pub fn permuted(&self, correction: &Permutation) -> Result<Self, OracleError> {
        let n = self.dim();
        if correction.dim() != n {
            return Err(OracleError::DimensionMismatch {
                state: n,
                op: correction.dim(),
            });
        }
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            p[(correction.image(i), i)] = 1.0;
        }
        Ok(Self {
            amp: &p * &self.amp * p.transpose(),
        })
    }

    /// Largest entrywise gap to the Schmidt-form state with amplitudes
    /// `layout`, off-diagonal entries included.
    pub fn deviation_from_layout(&self, layout: &[f64]) -> f64 {
        (&self.amp - DMatrix::from_diagonal(&DVector::from_column_slice(layout))).amax()
    }

    pub fn max_abs_diff(&self, other: &FullState) -> f64 {
        (&self.amp - &other.amp).amax()
    }
}

fn operator_matrix(op: &DiagonalKraus) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(&op.diag))
}

/// Applies `M` on one side and returns the normalized post-measurement state
/// with its probability `<psi|M^T M|psi>`. Outcomes with probability at or
/// below [`EPS_ZERO`] come back unnormalized.
pub fn apply_kraus(state: &FullState, op: &DiagonalKraus, party: Party) -> Result<(FullState, f64), OracleError> {
    if op.dim() != state.dim() {
        return Err(OracleError::DimensionMismatch {
            state: state.dim(),
            op: op.dim(),
        });
    }
    let m = operator_matrix(op);
    let mut amp = match party {
        Party::A => &m * &state.amp,
        Party::B => &state.amp * m.transpose(),
    };
    let prob = amp.norm_squared();
    if prob > EPS_ZERO {
        amp /= prob.sqrt();
    }
    Ok((FullState { amp }, prob))
}

/// Oracle results for one measurement step, all as maximum deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct StepVerification {
    pub step: usize,
    pub branches: usize,
    /// Largest entry of `sum_i M_i^T M_i - I`.
    pub completeness: f64,
    /// `|sum_i p_i - 1|` with oracle probabilities.
    pub probability_sum: f64,
    /// Largest gap between stored and oracle branch probabilities.
    pub probability: f64,
    /// Largest entrywise gap between a corrected post-state and the next
    /// chain state.
    pub post_state: f64,
    /// Largest gap between the reduced spectrum of a post-state and the next
    /// chain state's squared coefficients.
    pub spectrum: f64,
}

impl StepVerification {
    pub fn max_deviation(&self) -> f64 {
        [
            self.completeness,
            self.probability_sum,
            self.probability,
            self.post_state,
            self.spectrum,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Outcome of [`verify_plan`]. Failures are recorded here, never raised.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub tolerance: f64,
    /// False when the dimension exceeds [`ORACLE_MAX_DIM`]; nothing else is
    /// checked in that case.
    pub dimension_supported: bool,
    /// Step count agrees with the chain and operators have the plan's dimension.
    pub structure_ok: bool,
    pub steps: Vec<StepVerification>,
    /// Number of outcome sequences through the plan.
    pub paths: u64,
    /// Distinct terminal states after merging equal ones.
    pub terminal_states: usize,
    /// `|sum over paths of path probability - 1|`.
    pub path_probability: f64,
    /// Largest entrywise gap between any terminal state and the target.
    pub terminal_deviation: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub fn max_deviation(&self) -> f64 {
        self.steps
            .iter()
            .map(StepVerification::max_deviation)
            .fold(self.path_probability.max(self.terminal_deviation), f64::max)
    }

    fn failed(tolerance: f64, dimension_supported: bool) -> Self {
        Self {
            tolerance,
            dimension_supported,
            structure_ok: false,
            steps: Vec::new(),
            paths: 0,
            terminal_states: 0,
            path_probability: f64::INFINITY,
            terminal_deviation: f64::INFINITY,
            passed: false,
        }
    }
}

/// Recomputes every step of a plan with dense matrices and follows all
/// outcome paths to the end.
pub fn verify_plan(plan: &LadderPlan) -> VerificationReport {
    let n = plan.dim();
    if n > ORACLE_MAX_DIM {
        return VerificationReport::failed(VERIFY_TOL, false);
    }
    let structure_ok = plan.steps.len() == plan.chain.len()
        && plan.chain.layouts.iter().all(|l| l.len() == n)
        && plan.steps.iter().all(|s| {
            s.dim() == n
                && !s.branches.is_empty()
                && s.branches.iter().all(|b| b.op.dim() == n && b.correction.dim() == n)
        });
    if !structure_ok {
        return VerificationReport::failed(VERIFY_TOL, true);
    }

    let steps: Vec<StepVerification> = plan
        .steps
        .iter()
        .enumerate()
        .map(|(k, step)| verify_step(k, step, &plan.chain.layouts[k], &plan.chain.layouts[k + 1]))
        .collect();

    let (paths, terminal_states, path_probability, terminal_deviation) = follow_paths(plan);

    let passed = steps.iter().all(|s| s.max_deviation() <= VERIFY_TOL)
        && path_probability <= VERIFY_TOL
        && terminal_deviation <= VERIFY_TOL;
    VerificationReport {
        tolerance: VERIFY_TOL,
        dimension_supported: true,
        structure_ok,
        steps,
        paths,
        terminal_states,
        path_probability,
        terminal_deviation,
        passed,
    }
}

fn verify_step(k: usize, step: &MeasurementStep, input: &[f64], next: &[f64]) -> StepVerification {
    let n = input.len();
    let state = FullState::from_layout(input);
    let expected_spectrum = sorted_squares(next);

    let mut gram = -DMatrix::<f64>::identity(n, n);
    let (mut prob_sum, mut probability, mut post_state, mut spectrum) = (0.0, 0.0f64, 0.0f64, 0.0f64);
    for branch in &step.branches {
        let m = operator_matrix(&branch.op);
        gram += m.transpose() * &m;
        let (post, p) = apply_kraus(&state, &branch.op, Party::A).expect("dimensions checked");
        prob_sum += p;
        probability = probability.max((p - branch.prob).abs());
        let corrected = post.permuted(&branch.correction).expect("dimensions checked");
        post_state = post_state.max(corrected.deviation_from_layout(next));
        let gap = corrected
            .reduced_spectrum()
            .iter()
            .zip(&expected_spectrum)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        spectrum = spectrum.max(gap);
    }
    StepVerification {
        step: k,
        branches: step.branches.len(),
        completeness: gram.amax(),
        probability_sum: (prob_sum - 1.0).abs(),
        probability,
        post_state,
        spectrum,
    }
}

/// Propagates the source through every outcome sequence, merging terminal
/// states that coincide. Returns `(paths, distinct states, |mass - 1|,
/// max deviation from the target)`.
fn follow_paths(plan: &LadderPlan) -> (u64, usize, f64, f64) {
    let mut frontier = vec![(FullState::from_layout(plan.source.amps()), 1.0)];
    let mut paths: u64 = 1;
    for step in &plan.steps {
        paths = paths.saturating_mul(step.branches.len() as u64);
        let mut next: Vec<(FullState, f64)> = Vec::new();
        for (state, weight) in &frontier {
            for branch in &step.branches {
                let (post, p) = apply_kraus(state, &branch.op, Party::A).expect("dimensions checked");
                let post = post.permuted(&branch.correction).expect("dimensions checked");
                let w = weight * p;
                match next.iter_mut().find(|(s, _)| s.max_abs_diff(&post) <= MERGE_TOL) {
                    Some((_, acc)) => *acc += w,
                    None => next.push((post, w)),
                }
            }
        }
        if next.len() > FRONTIER_CAP {
            return (paths, next.len(), f64::INFINITY, f64::INFINITY);
        }
        frontier = next;
    }
    let mass: f64 = frontier.iter().map(|(_, w)| w).sum();
    let deviation = frontier
        .iter()
        .map(|(s, _)| s.deviation_from_layout(plan.target.amps()))
        .fold(0.0, f64::max);
    (paths, frontier.len(), (mass - 1.0).abs(), deviation)
}
