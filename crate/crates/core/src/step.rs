//! Diagonal Kraus operators, correction permutations and measurement steps.
//!
//! Every operator in this crate is diagonal in the Schmidt basis and acts on
//! party A. Corrections are basis relabelings applied by both parties.

use crate::schmidt::max_abs_diff;
use crate::EPS_ZERO;

/// A measurement operator diagonal in the Schmidt basis, stored by its
/// diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalKraus {
    pub diag: Vec<f64>,
}

impl DiagonalKraus {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }

    pub fn identity(n: usize) -> Self {
        Self { diag: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Unnormalized image `M |psi>` of an amplitude layout.
    pub fn apply(&self, layout: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(layout).map(|(d, a)| d * a).collect()
    }

    /// Outcome probability `<psi| M^T M |psi>`.
    pub fn probability(&self, layout: &[f64]) -> f64 {
        self.diag
            .iter()
            .zip(layout)
            .map(|(d, a)| (d * a) * (d * a))
            .sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.diag.iter().map(|d| d * d).fold(0.0, f64::max)
    }
}

/// Basis relabeling `|i> -> |map[i]>`, applied by both parties.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Transposition of basis states `i` and `j`.
    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut p = Self::identity(n);
        p.map.swap(i, j);
        p
    }

    /// Builds a permutation from its image list, rejecting non-bijections.
    pub fn from_map(map: Vec<usize>) -> Option<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &m in &map {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return None;
            }
        }
        Some(Self { map })
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// Relabels a layout: the amplitude at `i` moves to `map[i]`.
    pub fn apply(&self, layout: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; layout.len()];
        for (i, &a) in layout.iter().enumerate() {
            out[self.map[i]] = a;
        }
        out
    }

    /// Disjoint cycles of length > 1, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.map.len()];
        let mut out = Vec::new();
        for start in 0..self.map.len() {
            if seen[start] || self.map[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.map[i];
            }
            out.push(cycle);
        }
        out
    }
}

/// Which closed-form construction produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// Three outcomes, middle source coefficient not below the target's.
    CaseI,
    /// Three outcomes, middle target coefficient above the source's.
    CaseII,
    TwoOutcome,
    /// Source already equals target.
    Trivial,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::CaseI => "CASE_I",
            CaseTag::CaseII => "CASE_II",
            CaseTag::TwoOutcome => "TWO_OUTCOME",
            CaseTag::Trivial => "TRIVIAL",
        }
    }
}

/// One measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBranch {
    pub op: DiagonalKraus,
    pub prob: f64,
    pub correction: Permutation,
    /// Amplitudes after the operator, renormalization and correction.
    pub post_state: Vec<f64>,
}

impl OutcomeBranch {
    pub(crate) fn new(op: DiagonalKraus, prob: f64, correction: Permutation, source: &[f64]) -> Self {
        let scale = if prob > 0.0 { prob.sqrt().recip() } else { 0.0 };
        let measured: Vec<f64> = op.apply(source).into_iter().map(|a| a * scale).collect();
        let post_state = correction.apply(&measured);
        Self {
            op,
            prob,
            correction,
            post_state,
        }
    }
}

/// A complete generalized measurement with its outcome corrections.
///
/// `source` and `target` are amplitude layouts in the fixed basis order the
/// operators act on; for solver outputs they are sorted, for embedded ladder
/// steps they follow the chain's positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementStep {
    pub branches: Vec<OutcomeBranch>,
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    pub case_tag: CaseTag,
    /// Outcomes dropped because their operator vanished.
    pub pruned_count: usize,
}

impl MeasurementStep {
    /// Single identity outcome; `target` must already equal `source` up to
    /// rounding.
    pub fn trivial(source: &[f64], target: &[f64]) -> Self {
        let n = source.len();
        Self {
            branches: vec![OutcomeBranch::new(
                DiagonalKraus::identity(n),
                1.0,
                Permutation::identity(n),
                source,
            )],
            source: source.to_vec(),
            target: target.to_vec(),
            case_tag: CaseTag::Trivial,
            pruned_count: 0,
        }
    }

    /// Builds a step from candidate outcomes, dropping those whose operator
    /// is zero up to [`EPS_ZERO`].
    pub(crate) fn assemble(
        source: &[f64],
        target: &[f64],
        case_tag: CaseTag,
        candidates: Vec<(DiagonalKraus, f64, Permutation)>,
    ) -> Self {
        let total = candidates.len();
        let branches: Vec<OutcomeBranch> = candidates
            .into_iter()
            .filter(|(op, _, _)| op.max_weight() > EPS_ZERO)
            .map(|(op, p, c)| OutcomeBranch::new(op, p, c, source))
            .collect();
        Self {
            pruned_count: total - branches.len(),
            branches,
            source: source.to_vec(),
            target: target.to_vec(),
            case_tag,
        }
    }

    pub fn dim(&self) -> usize {
        self.source.len()
    }

    /// `max_j |sum_i diag_i[j]^2 - 1|`, the deviation from `sum_i M_i^T M_i = I`.
    pub fn completeness_deviation(&self) -> f64 {
        (0..self.dim())
            .map(|j| {
                let s: f64 = self.branches.iter().map(|b| b.op.diag[j] * b.op.diag[j]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `|sum_i p_i - 1|`.
    pub fn probability_deviation(&self) -> f64 {
        (self.branches.iter().map(|b| b.prob).sum::<f64>() - 1.0).abs()
    }

    /// Largest gap between a stored probability and `sum_j (diag_j psi_j)^2`.
    pub fn probability_consistency(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| (b.prob - b.op.probability(&self.source)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise gap between a corrected post-measurement state and
    /// the target, recomputed from the operators.
    pub fn branch_deviation(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| {
                let p = b.op.probability(&self.source);
                let measured: Vec<f64> = b
                    .op
                    .apply(&self.source)
                    .into_iter()
                    .map(|a| a / p.sqrt())
                    .collect();
                max_abs_diff(&b.correction.apply(&measured), &self.target)
            })
            .fold(0.0, f64::max)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.prob).collect()
    }
}
