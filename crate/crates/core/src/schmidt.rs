//! Schmidt coefficient vectors and the majorization feasibility test.

use crate::error::SchmidtError;
use crate::{EPS_CMP, EPS_NORM, EPS_ZERO};

/// Ordered, non-negative Schmidt amplitudes of a bipartite pure state
/// `sum_j c_j |j>|j>`, normalized so that `sum_j c_j^2 = 1`.
///
/// Amplitudes are the canonical representation; majorization arithmetic is
/// done on their squares.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector {
    amps: Vec<f64>,
}

impl SchmidtVector {
    /// Strict constructor from amplitudes: sorted input is required.
    pub fn new(amps: Vec<f64>) -> Result<Self, SchmidtError> {
        validate(&amps, false, false)
    }

    /// Builds a vector from amplitudes in arbitrary basis order.
    ///
    /// The entries are stably sorted non-increasing and renormalized when the
    /// drift is within [`EPS_NORM`].
    pub fn from_layout(layout: &[f64]) -> Result<Self, SchmidtError> {
        validate(layout, false, true)
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Squared amplitudes, i.e. the decreasingly ordered spectrum of either
    /// reduced density matrix.
    pub fn squares(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    /// All coefficients strictly positive.
    pub fn is_source_grade(&self) -> bool {
        self.amps.iter().all(|&a| a > 0.0)
    }

    pub fn require_source_grade(&self) -> Result<(), SchmidtError> {
        match self.amps.iter().position(|&a| a <= 0.0) {
            Some(index) => Err(SchmidtError::SourceNotPositive { index }),
            None => Ok(()),
        }
    }

    /// Maximum entrywise amplitude difference.
    pub fn max_abs_diff(&self, other: &SchmidtVector) -> f64 {
        max_abs_diff(&self.amps, &other.amps)
    }

    pub fn into_amps(self) -> Vec<f64> {
        self.amps
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Checks and normalizes raw input coefficients.
///
/// With `squared` set the entries are read as eigenvalues `lambda_j` and
/// square-rooted. Without `autosort` unsorted input is rejected.
pub fn validate(raw: &[f64], squared: bool, autosort: bool) -> Result<SchmidtVector, SchmidtError> {
    if raw.len() < 2 {
        return Err(SchmidtError::DimensionTooSmall(raw.len()));
    }
    if let Some((index, &value)) = raw
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(SchmidtError::NegativeEntry { index, value });
    }
    let mut amps: Vec<f64> = if squared {
        raw.iter().map(|v| v.sqrt()).collect()
    } else {
        raw.to_vec()
    };
    if autosort {
        amps.sort_by(|a, b| b.total_cmp(a));
    } else if let Some(index) = amps.windows(2).position(|w| w[0] < w[1]) {
        return Err(SchmidtError::NotSorted { index: index + 1 });
    }
    let sum: f64 = amps.iter().map(|a| a * a).sum();
    if (sum - 1.0).abs() > EPS_NORM {
        return Err(SchmidtError::NotNormalized { sum });
    }
    // Re-validating an already normalized vector must be the identity.
    if (sum - 1.0).abs() > 8.0 * f64::EPSILON {
        let scale = sum.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= scale);
    }
    Ok(SchmidtVector { amps })
}

/// Outcome of the tail-sum majorization test.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationReport {
    pub holds: bool,
    /// Smallest 1-based tail index `k` at which the test fails.
    pub failing_k: Option<usize>,
    /// `sum_{j>=k} psi_j^2 - sum_{j>=k} phi_j^2` for `k = 1..=n`.
    pub tail_margins: Vec<f64>,
}

/// Tests whether `source` can be turned into `target` deterministically,
/// i.e. every tail sum of the target's squares is bounded by the source's
/// and the totals agree.
pub fn majorizes(
    source: &SchmidtVector,
    target: &SchmidtVector,
) -> Result<MajorizationReport, SchmidtError> {
    if source.dim() != target.dim() {
        return Err(SchmidtError::DimensionMismatch {
            left: source.dim(),
            right: target.dim(),
        });
    }
    Ok(majorization_of_squares(&source.squares(), &target.squares()))
}

/// Majorization test on squared coefficients that are already sorted
/// non-increasing and of equal length.
pub(crate) fn majorization_of_squares(source: &[f64], target: &[f64]) -> MajorizationReport {
    let n = source.len();
    let mut tail_margins = vec![0.0; n];
    let (mut ts, mut tt) = (0.0, 0.0);
    for k in (0..n).rev() {
        ts += source[k];
        tt += target[k];
        tail_margins[k] = ts - tt;
    }
    let failing_k = tail_margins
        .iter()
        .enumerate()
        .find(|(k, m)| **m < -EPS_CMP || (*k == 0 && m.abs() > EPS_CMP))
        .map(|(k, _)| k + 1);
    MajorizationReport {
        holds: failing_k.is_none(),
        failing_k,
        tail_margins,
    }
}

/// Majorization test on two amplitude layouts in arbitrary basis order.
pub(crate) fn majorization_of_layouts(source: &[f64], target: &[f64]) -> MajorizationReport {
    majorization_of_squares(&sorted_squares(source), &sorted_squares(target))
}

pub(crate) fn sorted_squares(layout: &[f64]) -> Vec<f64> {
    let mut sq: Vec<f64> = layout.iter().map(|a| a * a).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    sq
}

/// Number of coefficients above [`EPS_ZERO`].
pub fn effective_rank(v: &SchmidtVector) -> usize {
    layout_rank(v.amps())
}

pub(crate) fn layout_rank(layout: &[f64]) -> usize {
    layout.iter().filter(|&&a| a > EPS_ZERO).count()
}
