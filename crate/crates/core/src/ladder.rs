//! Multi-step plans built from small-block measurements.
//!
//! The smallest-first ladder keeps the largest source coefficients untouched
//! and, at every step, finalizes `m - 1` more of the target's smallest
//! coefficients by transforming an `m`-dimensional block. Intermediate states
//! are stored as *layouts*: amplitudes at fixed basis positions. A layout is
//! not necessarily sorted (the inserted coefficient may overtake its
//! neighbours), so every majorization check runs on sorted squares while
//! operators are assigned to the fixed positions.

use std::ops::Range;

use crate::error::LadderError;
use crate::schmidt::{
    layout_rank, majorization_of_layouts, majorizes, max_abs_diff, MajorizationReport,
    SchmidtVector,
};
use crate::solver::{solve2, solve3};
use crate::step::{DiagonalKraus, MeasurementStep, OutcomeBranch, Permutation};
use crate::{EPS_CMP, EPS_ZERO};

/// Split of a layout into an active block and the untouched remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    /// The decomposed layout.
    pub layout: Vec<f64>,
    /// 0-based basis positions covered by the block.
    pub index_range: Range<usize>,
    /// 2-norm of the block's amplitudes.
    pub block_norm: f64,
    /// Block amplitudes divided by `block_norm`, sorted non-increasing.
    pub block: SchmidtVector,
    /// `block.amps()[i]` sits at position `index_range.start + order[i]`.
    pub order: Vec<usize>,
}

impl BlockDecomposition {
    /// Decomposes `layout` around the block `range`.
    pub fn at(layout: &[f64], range: Range<usize>) -> Result<Self, LadderError> {
        let n = layout.len();
        if range.start >= range.end || range.end > n {
            return Err(LadderError::IndexRangeInvalid {
                start: range.start,
                end: range.end,
                n,
            });
        }
        let active = &layout[range.clone()];
        let norm_sq: f64 = active.iter().map(|a| a * a).sum();
        if norm_sq <= EPS_ZERO {
            return Err(LadderError::ZeroBlockNorm {
                start: range.start,
                end: range.end,
            });
        }
        let block_norm = norm_sq.sqrt();
        let mut order: Vec<usize> = (0..active.len()).collect();
        order.sort_by(|&i, &j| active[j].total_cmp(&active[i]));
        let sorted: Vec<f64> = order.iter().map(|&i| active[i] / block_norm).collect();
        let block = SchmidtVector::new(sorted)?;
        Ok(Self {
            layout: layout.to_vec(),
            index_range: range,
            block_norm,
            block,
            order,
        })
    }

    pub fn m(&self) -> usize {
        self.index_range.len()
    }

    pub fn prefix(&self) -> &[f64] {
        &self.layout[..self.index_range.start]
    }

    pub fn suffix(&self) -> &[f64] {
        &self.layout[self.index_range.end..]
    }

    /// Rebuilds the layout from prefix, `block_norm * block` and suffix.
    pub fn reassemble(&self) -> Vec<f64> {
        let mut out = self.layout.clone();
        for (i, &pos) in self.order.iter().enumerate() {
            out[self.index_range.start + pos] = self.block_norm * self.block.amps()[i];
        }
        out
    }
}

/// Decomposes a state into the untouched leading `n - m` amplitudes and the
/// normalized tail block of size `m`.
pub fn block_decompose(state: &SchmidtVector, m: usize) -> Result<BlockDecomposition, LadderError> {
    let n = state.dim();
    if m > n {
        return Err(LadderError::BlockTooLarge { m, n });
    }
    if m < 2 {
        return Err(LadderError::BlockTooSmall(m));
    }
    BlockDecomposition::at(state.amps(), n - m..n)
}

/// Target for a block step: the `m - 1` trailing coefficients are copied from
/// the target (rescaled by `block_norm`) and the head closes normalization.
///
/// The result must be sorted and must majorize `block_source`; either failure
/// is reported rather than repaired.
pub fn choose_omega(
    block_source: &SchmidtVector,
    target_tail: &[f64],
    block_norm: f64,
) -> Result<SchmidtVector, LadderError> {
    let m = block_source.dim();
    if target_tail.len() + 1 != m {
        return Err(LadderError::BlockTooLarge {
            m: target_tail.len() + 1,
            n: m,
        });
    }
    let tail: Vec<f64> = target_tail.iter().map(|p| p / block_norm).collect();
    let residual = 1.0 - tail.iter().map(|w| w * w).sum::<f64>();
    if residual < -EPS_CMP {
        return Err(LadderError::NormalizationUnderflow { residual });
    }
    let head = residual.max(0.0).sqrt();
    if let Some(&next) = tail.first() {
        if head * head < next * next - EPS_CMP {
            return Err(LadderError::OmegaNotSorted { head, next });
        }
    }
    let mut amps = Vec::with_capacity(m);
    amps.push(head);
    amps.extend_from_slice(&tail);
    let omega = SchmidtVector::from_layout(&amps)?;
    let report = majorizes(block_source, &omega)?;
    if !report.holds {
        return Err(LadderError::OmegaNotMajorizing {
            failing_k: report.failing_k,
        });
    }
    Ok(omega)
}

/// A sequence of layouts from source to target, each link acting on one
/// block of basis positions.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateChain {
    /// Block dimension.
    pub m: usize,
    /// Amplitudes at fixed positions; first is the source, last the target.
    pub layouts: Vec<Vec<f64>>,
    /// Sorted view of every layout.
    pub states: Vec<SchmidtVector>,
    /// `(position, amplitude)` of the inserted coefficient of each
    /// intermediate layout.
    pub tilde_values: Vec<(usize, f64)>,
    /// Positions transformed by each link.
    pub blocks: Vec<Range<usize>>,
}

impl IntermediateChain {
    /// Number of links (measurement steps).
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Smallest-first chain computed without any feasibility checks.
    pub fn smallest_first_unchecked(
        source: &SchmidtVector,
        target: &SchmidtVector,
        m: usize,
    ) -> Result<Self, LadderError> {
        check_pair(source, target, m)?;
        let (psi, phi) = (source.amps(), target.amps());
        let n = psi.len();
        if source.max_abs_diff(target) <= EPS_CMP {
            return single_link(source, target, m);
        }
        let l = link_count(n, m);
        let mut layouts = vec![psi.to_vec()];
        let mut tilde_values = Vec::new();
        let mut blocks = Vec::new();
        for k in 1..l {
            let idx = n - k * (m - 1) - 1;
            let tilde_sq = tail_sq(psi, idx) - tail_sq(phi, idx + 1);
            let tilde = tilde_sq.max(0.0).sqrt();
            let mut layout = psi[..idx].to_vec();
            layout.push(tilde);
            layout.extend_from_slice(&phi[idx + 1..]);
            tilde_values.push((idx, tilde));
            layouts.push(layout);
            blocks.push(idx..n - (k - 1) * (m - 1));
        }
        blocks.push(0..n - (l - 1) * (m - 1));
        layouts.push(phi.to_vec());
        Self::from_layouts(m, layouts, tilde_values, blocks)
    }

    fn from_layouts(
        m: usize,
        layouts: Vec<Vec<f64>>,
        tilde_values: Vec<(usize, f64)>,
        blocks: Vec<Range<usize>>,
    ) -> Result<Self, LadderError> {
        let states = layouts
            .iter()
            .map(|l| SchmidtVector::from_layout(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            m,
            layouts,
            states,
            tilde_values,
            blocks,
        })
    }
}

fn check_pair(source: &SchmidtVector, target: &SchmidtVector, m: usize) -> Result<(), LadderError> {
    if m < 2 {
        return Err(LadderError::BlockTooSmall(m));
    }
    let report = majorizes(source, target)?;
    if !report.holds {
        return Err(LadderError::NotMajorized {
            failing_k: report.failing_k,
        });
    }
    Ok(())
}

fn single_link(source: &SchmidtVector, target: &SchmidtVector, m: usize) -> Result<IntermediateChain, LadderError> {
    let n = source.dim();
    IntermediateChain::from_layouts(
        m,
        vec![source.amps().to_vec(), target.amps().to_vec()],
        Vec::new(),
        std::iter::once(0..n).collect(),
    )
}

/// `sum_{j >= from} v_j^2`, accumulated from the smallest entries up.
fn tail_sq(v: &[f64], from: usize) -> f64 {
    v[from..].iter().rev().map(|a| a * a).sum()
}

/// Links needed so that the final block has between 2 and `m` coordinates.
fn link_count(n: usize, m: usize) -> usize {
    if n <= m {
        1
    } else {
        1 + (n - m).div_ceil(m - 1)
    }
}

/// Builds the smallest-first chain and verifies every link: sorted
/// majorization, changes confined to the link's block, the positional tail
/// inequalities inside the block and the fixed target suffix.
pub fn intermediate_chain(
    source: &SchmidtVector,
    target: &SchmidtVector,
    m: usize,
) -> Result<IntermediateChain, LadderError> {
    let chain = IntermediateChain::smallest_first_unchecked(source, target, m)?;
    let n = source.dim();
    for check in chain_majorization_check(&chain) {
        if !check.sorted.holds {
            return Err(LadderError::ChainInvariantViolated {
                link: check.link,
                reason: format!(
                    "sorted tail sum fails at k = {}",
                    check.sorted.failing_k.unwrap_or(0)
                ),
            });
        }
        if !check.outside_block_unchanged {
            return Err(LadderError::ChainInvariantViolated {
                link: check.link,
                reason: "coefficients outside the block changed".into(),
            });
        }
        if !check.positional_holds {
            return Err(LadderError::ChainInvariantViolated {
                link: check.link,
                reason: "positional block tail inequality fails".into(),
            });
        }
    }
    if chain.len() > 1 {
        for (k, layout) in chain.layouts.iter().enumerate().take(chain.len()).skip(1) {
            let fixed = n - k * (m - 1);
            if layout[fixed..] != target.amps()[fixed..] {
                return Err(LadderError::ChainInvariantViolated {
                    link: k,
                    reason: format!("smallest {} coefficients differ from the target", n - fixed),
                });
            }
        }
    }
    Ok(chain)
}

/// Per-link feasibility diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCheck {
    /// 0-based link index; link `k` maps `layouts[k]` to `layouts[k + 1]`.
    pub link: usize,
    pub block: Range<usize>,
    /// Majorization of the link on sorted squares.
    pub sorted: MajorizationReport,
    /// `sum_{j>=t} cur_j^2 - sum_{j>=t} next_j^2` over block positions `t`,
    /// summing to the end of the block.
    pub positional_margins: Vec<f64>,
    pub positional_holds: bool,
    pub outside_block_unchanged: bool,
}

/// Checks every link of a chain. For `m = 3` the positional margins are the
/// three block tail inequalities of the ladder.
pub fn chain_majorization_check(chain: &IntermediateChain) -> Vec<LinkCheck> {
    chain
        .blocks
        .iter()
        .enumerate()
        .map(|(k, block)| {
            let (cur, next) = (&chain.layouts[k], &chain.layouts[k + 1]);
            let sorted = majorization_of_layouts(cur, next);
            let mut positional_margins = vec![0.0; block.len()];
            let mut acc = 0.0;
            for t in block.clone().rev() {
                acc += cur[t] * cur[t] - next[t] * next[t];
                positional_margins[t - block.start] = acc;
            }
            let positional_holds = positional_margins.iter().all(|m| *m >= -EPS_CMP);
            let outside_block_unchanged = (0..cur.len())
                .filter(|j| !block.contains(j))
                .all(|j| cur[j] == next[j]);
            LinkCheck {
                link: k,
                block: block.clone(),
                sorted,
                positional_margins,
                positional_holds,
                outside_block_unchanged,
            }
        })
        .collect()
}

/// Evidence that the greatest-first ordering destroys a Schmidt coefficient
/// the target still needs.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityCertificate {
    /// 1-based step index of the collapsing intermediate state.
    pub k: usize,
    /// 0-based position of the inserted coefficient.
    pub position: usize,
    /// Squared inserted coefficient before clamping.
    pub tilde_squared: f64,
    pub intermediate_rank: usize,
    pub target_rank: usize,
    /// The collapsed intermediate layout (inserted coefficient clamped at 0).
    pub layout: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GreatestFirstOutcome {
    /// No rank collapse; the chain is returned unverified for comparison.
    Completed(IntermediateChain),
    Collapsed(InfeasibilityCertificate),
}

/// Greatest-first counterpart of the ladder: each step finalizes the largest
/// remaining target coefficients instead of the smallest.
pub fn greatest_first_chain(
    source: &SchmidtVector,
    target: &SchmidtVector,
    m: usize,
) -> Result<GreatestFirstOutcome, LadderError> {
    check_pair(source, target, m)?;
    if source.max_abs_diff(target) <= EPS_CMP {
        return single_link(source, target, m).map(GreatestFirstOutcome::Completed);
    }
    let (psi, phi) = (source.amps(), target.amps());
    let n = psi.len();
    let l = link_count(n, m);
    let target_rank = layout_rank(phi);
    let mut layouts = vec![psi.to_vec()];
    let mut tilde_values = Vec::new();
    let mut blocks = Vec::new();
    for k in 1..l {
        let idx = k * (m - 1);
        let tilde_squared = tail_sq(phi, idx) - tail_sq(psi, idx + 1);
        // A squared weight at or below EPS_ZERO is a lost coefficient.
        let tilde = if tilde_squared <= EPS_ZERO { 0.0 } else { tilde_squared.sqrt() };
        let mut layout = phi[..idx].to_vec();
        layout.push(tilde);
        layout.extend_from_slice(&psi[idx + 1..]);
        if tilde_squared <= EPS_ZERO {
            let intermediate_rank = layout_rank(&layout);
            if intermediate_rank < target_rank {
                return Ok(GreatestFirstOutcome::Collapsed(InfeasibilityCertificate {
                    k,
                    position: idx,
                    tilde_squared,
                    intermediate_rank,
                    target_rank,
                    layout,
                }));
            }
        }
        tilde_values.push((idx, tilde));
        layouts.push(layout);
        blocks.push((k - 1) * (m - 1)..idx + 1);
    }
    blocks.push((l - 1) * (m - 1)..n);
    layouts.push(phi.to_vec());
    IntermediateChain::from_layouts(m, layouts, tilde_values, blocks).map(GreatestFirstOutcome::Completed)
}

/// Lifts a block measurement to the full dimension.
///
/// Positions outside the block get `sqrt(p_i)` on the diagonal of outcome
/// `i`; inside, the block operator is laid out through the decomposition's
/// sort order. The block target is assumed to occupy `index_range` in
/// non-increasing order, which holds for every smallest-first link.
pub fn embed_step(
    block_step: &MeasurementStep,
    decomposition: &BlockDecomposition,
    n: usize,
) -> Result<MeasurementStep, LadderError> {
    let range = decomposition.index_range.clone();
    if range.end > n || decomposition.layout.len() != n || block_step.dim() != range.len() {
        return Err(LadderError::IndexRangeInvalid {
            start: range.start,
            end: range.end,
            n,
        });
    }
    let start = range.start;
    let source = decomposition.layout.clone();
    let mut target = source.clone();
    for (t, &amp) in block_step.target.iter().enumerate() {
        target[start + t] = decomposition.block_norm * amp;
    }
    let branches = block_step
        .branches
        .iter()
        .map(|b| {
            let outside = b.prob.sqrt();
            let mut diag = vec![outside; n];
            let mut map: Vec<usize> = (0..n).collect();
            for (s, &pos) in decomposition.order.iter().enumerate() {
                diag[start + pos] = b.op.diag[s];
                map[start + pos] = start + b.correction.image(s);
            }
            let correction = Permutation::from_map(map).expect("block relabeling is a bijection");
            OutcomeBranch::new(DiagonalKraus::new(diag), b.prob, correction, &source)
        })
        .collect();
    Ok(MeasurementStep {
        branches,
        source,
        target,
        case_tag: block_step.case_tag,
        pruned_count: block_step.pruned_count,
    })
}

/// A complete deterministic protocol from source to target.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPlan {
    pub source: SchmidtVector,
    pub target: SchmidtVector,
    pub chain: IntermediateChain,
    /// One full-dimension measurement per chain link.
    pub steps: Vec<MeasurementStep>,
}

impl LadderPlan {
    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// Number of distinct outcome paths through the plan.
    pub fn path_count(&self) -> u128 {
        self.steps.iter().map(|s| s.branches.len() as u128).product()
    }

    /// Sum over all paths of the product of branch probabilities.
    pub fn total_probability(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.branches.iter().map(|b| b.prob).sum::<f64>())
            .product()
    }

    /// Largest entrywise gap between any step's recomputed branch outcome and
    /// the next chain layout.
    pub fn max_branch_deviation(&self) -> f64 {
        self.steps
            .iter()
            .zip(self.chain.layouts.iter().skip(1))
            .map(|(s, next)| s.branch_deviation().max(max_abs_diff(&s.target, next)))
            .fold(0.0, f64::max)
    }
}

/// Plans the full transformation with 3-dimensional blocks: `floor(n/2)`
/// measurements for `n >= 3` (two-outcome last step for even `n`, three
/// outcomes for odd `n`), a single two-outcome measurement for `n = 2`, and a
/// single identity step when source equals target.
pub fn plan_full(source: &SchmidtVector, target: &SchmidtVector) -> Result<LadderPlan, LadderError> {
    const M: usize = 3;
    let n = source.dim();
    check_pair(source, target, M)?;
    if source.max_abs_diff(target) <= EPS_CMP {
        let chain = single_link(source, target, M)?;
        return Ok(LadderPlan {
            source: source.clone(),
            target: target.clone(),
            chain,
            steps: vec![MeasurementStep::trivial(source.amps(), target.amps())],
        });
    }
    let chain = intermediate_chain(source, target, M)?;
    let last = chain.len() - 1;
    let mut steps = Vec::with_capacity(chain.len());
    for (k, range) in chain.blocks.iter().enumerate() {
        let wrap = |source| LadderError::Step { step: k, source };
        let decomposition = BlockDecomposition::at(&chain.layouts[k], range.clone())?;
        let next = &chain.layouts[k + 1][range.clone()];
        let omega = if k == last {
            let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
            let scaled: Vec<f64> = next.iter().map(|a| a / norm).collect();
            SchmidtVector::from_layout(&scaled)?
        } else {
            choose_omega(&decomposition.block, &next[1..], decomposition.block_norm)?
        };
        let block_step = match range.len() {
            3 => solve3(&decomposition.block, &omega).map_err(wrap)?,
            2 => solve2(&decomposition.block, &omega).map_err(wrap)?,
            other => unreachable!("ladder block of size {other}"),
        };
        steps.push(embed_step(&block_step, &decomposition, n)?);
    }
    Ok(LadderPlan {
        source: source.clone(),
        target: target.clone(),
        chain,
        steps,
    })
}
