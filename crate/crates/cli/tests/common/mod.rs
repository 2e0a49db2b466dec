#![allow(dead_code)]

use detlocc_core::{validate, SchmidtVector};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random squared coefficients, sorted non-increasing, all at least `floor`
/// before normalization.
pub fn random_squares<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0f64).powi(2)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

pub fn to_vector(squares: &[f64]) -> SchmidtVector {
    validate(squares, true, true).unwrap()
}

/// A pair with the source majorized by the target: the source is the target
/// pushed through a random doubly stochastic matrix (mixture of permutations
/// plus a uniform part, so every source coefficient is positive).
pub fn feasible_pair<R: Rng>(rng: &mut R, n: usize) -> (SchmidtVector, SchmidtVector) {
    let t = random_squares(rng, n);
    let uniform = rng.random_range(0.02..0.6f64);
    let mut s = vec![uniform / n as f64; n];
    let terms = rng.random_range(1..=3usize);
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.1..1.0f64)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w *= (1.0 - uniform) / total);
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            s[i] += w * t[j];
        }
    }
    (to_vector(&s), to_vector(&t))
}

/// Head-sum form of the feasibility test, written independently of the
/// library: every partial sum of the target's largest squares must reach the
/// source's, with equal totals.
pub fn head_sum_majorized(source: &[f64], target: &[f64], tol: f64) -> bool {
    let mut s: Vec<f64> = source.iter().map(|a| a * a).collect();
    let mut t: Vec<f64> = target.iter().map(|a| a * a).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    t.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (mut hs, mut ht) = (0.0, 0.0);
    for k in 0..s.len() {
        hs += s[k];
        ht += t[k];
        if ht < hs - tol {
            return false;
        }
    }
    (hs - ht).abs() <= tol
}
