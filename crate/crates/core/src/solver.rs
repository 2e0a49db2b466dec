//! Closed-form single-measurement solvers for 2- and 3-dimensional blocks.
//!
//! Both solvers take sorted source and target Schmidt vectors with
//! `source ≺ target` and return a measurement on party A whose every outcome,
//! after a basis relabeling, lands exactly on the target.

use crate::error::SolverError;
use crate::schmidt::{majorizes, SchmidtVector};
use crate::step::{CaseTag, DiagonalKraus, MeasurementStep, Permutation};
use crate::{EPS_CMP, EPS_ZERO};

/// `x^2 - y^2` without squaring first.
fn sq_diff(x: f64, y: f64) -> f64 {
    (x - y) * (x + y)
}

fn check_common(
    source: &SchmidtVector,
    target: &SchmidtVector,
    dim: usize,
) -> Result<Option<MeasurementStep>, SolverError> {
    for v in [source, target] {
        if v.dim() != dim {
            return Err(SolverError::WrongDimension {
                expected: dim,
                got: v.dim(),
            });
        }
    }
    let report = majorizes(source, target)?;
    if !report.holds {
        return Err(SolverError::NotMajorized {
            failing_k: report.failing_k,
        });
    }
    if source.max_abs_diff(target) <= EPS_CMP {
        return Ok(Some(MeasurementStep::trivial(source.amps(), target.amps())));
    }
    if let Some(index) = source.amps().iter().position(|&a| a <= 0.0) {
        return Err(SolverError::SourceHasZero { index });
    }
    Ok(None)
}

/// Clamps a probability that may have drifted by rounding; anything further
/// out than [`EPS_CMP`] is reported.
fn clamp_prob(branch: usize, p: f64) -> Result<f64, SolverError> {
    if !(-EPS_CMP..=1.0 + EPS_CMP).contains(&p) || p.is_nan() {
        return Err(SolverError::NegativeProbability { branch, prob: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

fn ordered(chain: &[f64], what: &'static str) -> Result<(), SolverError> {
    // squared values, non-increasing up to EPS_CMP
    if chain.windows(2).all(|w| w[0] - w[1] >= -EPS_CMP) {
        Ok(())
    } else {
        Err(SolverError::OrderingViolated(what))
    }
}

fn scaled(p: f64, ratios: [f64; 3]) -> DiagonalKraus {
    let s = p.sqrt();
    DiagonalKraus::new(ratios.iter().map(|r| s * r).collect())
}

/// Deterministic transformation of a 3-dimensional Schmidt vector by a single
/// three-outcome measurement.
///
/// The construction splits on whether the middle coefficient shrinks
/// (`b1 >= b2`, [`CaseTag::CaseI`]) or grows ([`CaseTag::CaseII`]); a tie goes
/// to case I. Outcomes whose operator vanishes are pruned.
pub fn solve3(source: &SchmidtVector, target: &SchmidtVector) -> Result<MeasurementStep, SolverError> {
    if let Some(step) = check_common(source, target, 3)? {
        return Ok(step);
    }
    let [a1, b1, c1] = [source.amps()[0], source.amps()[1], source.amps()[2]];
    let [a2, b2, c2] = [target.amps()[0], target.amps()[1], target.amps()[2]];
    let (a2s, b2s, c2s) = (a2 * a2, b2 * b2, c2 * c2);
    let d_ac = sq_diff(a2, c2);
    if d_ac < EPS_ZERO {
        // Uniform target: majorization forces source == target.
        return Ok(MeasurementStep::trivial(source.amps(), target.amps()));
    }

    let case_i = sq_diff(b1, b2) >= -EPS_CMP;
    let (case_tag, probs, ops, corrections) = if case_i {
        ordered(&[a2s, a1 * a1, b1 * b1, b2s, c2s], "a2 >= a1 >= b1 >= b2 >= c2")?;
        let d_ab = sq_diff(a2, b2);
        let p2 = if d_ab < EPS_ZERO { 0.0 } else { sq_diff(b1, b2) / d_ab };
        let p3 = sq_diff(c1, c2) / d_ac;
        let p1 = (a1 * a1 - b2s * p2 - c2s * p3) / a2s;
        let ops = [
            [a2 / a1, b2 / b1, c2 / c1],
            [b2 / a1, a2 / b1, c2 / c1],
            [c2 / a1, b2 / b1, a2 / c1],
        ];
        let corr = [
            Permutation::identity(3),
            Permutation::swap(3, 0, 1),
            Permutation::swap(3, 0, 2),
        ];
        (CaseTag::CaseI, [p1, p2, p3], ops, corr)
    } else {
        ordered(&[a2s, b2s, b1 * b1, c1 * c1, c2s], "a2 >= b2 >= b1 >= c1 >= c2")?;
        let d_bc = sq_diff(b2, c2);
        let p2 = sq_diff(a2, a1) / d_ac;
        let p3 = if d_bc < EPS_ZERO { 0.0 } else { sq_diff(b2, b1) / d_bc };
        let p1 = (a1 * a1 - c2s * p2) / a2s - p3;
        let ops = [
            [a2 / a1, b2 / b1, c2 / c1],
            [c2 / a1, b2 / b1, a2 / c1],
            [a2 / a1, c2 / b1, b2 / c1],
        ];
        let corr = [
            Permutation::identity(3),
            Permutation::swap(3, 0, 2),
            Permutation::swap(3, 1, 2),
        ];
        (CaseTag::CaseII, [p1, p2, p3], ops, corr)
    };

    let mut candidates = Vec::with_capacity(3);
    for (i, ((p, ratios), corr)) in probs.into_iter().zip(ops).zip(corrections).enumerate() {
        let p = clamp_prob(i, p)?;
        candidates.push((scaled(p, ratios), p, corr));
    }
    Ok(MeasurementStep::assemble(
        source.amps(),
        target.amps(),
        case_tag,
        candidates,
    ))
}

/// Deterministic transformation of a 2-dimensional Schmidt vector by a single
/// two-outcome measurement; the second outcome is corrected by swapping the
/// two basis states.
pub fn solve2(source: &SchmidtVector, target: &SchmidtVector) -> Result<MeasurementStep, SolverError> {
    if let Some(step) = check_common(source, target, 2)? {
        return Ok(step);
    }
    let [a1, b1] = [source.amps()[0], source.amps()[1]];
    let [a2, b2] = [target.amps()[0], target.amps()[1]];
    let d = sq_diff(a2, b2);
    if d < EPS_ZERO {
        // Maximally entangled target: only reachable from itself.
        return Ok(MeasurementStep::trivial(source.amps(), target.amps()));
    }
    let p1 = clamp_prob(0, sq_diff(a1, b2) / d)?;
    let p2 = clamp_prob(1, sq_diff(a2, a1) / d)?;
    let op1 = DiagonalKraus::new(vec![p1.sqrt() * a2 / a1, p1.sqrt() * b2 / b1]);
    let op2 = DiagonalKraus::new(vec![p2.sqrt() * b2 / a1, p2.sqrt() * a2 / b1]);
    Ok(MeasurementStep::assemble(
        source.amps(),
        target.amps(),
        CaseTag::TwoOutcome,
        vec![
            (op1, p1, Permutation::identity(2)),
            (op2, p2, Permutation::swap(2, 0, 1)),
        ],
    ))
}
