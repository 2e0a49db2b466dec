//! Seeded Monte Carlo execution of plans on the dense oracle.
//!
//! Shot `s` draws from a ChaCha20 stream keyed by the master seed with stream
//! number `s`, so results do not depend on how shots are scheduled.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::ladder::LadderPlan;
use crate::oracle::{apply_kraus, FullState, Party};

/// Entrywise tolerance for counting a final state as the target.
pub const MATCH_TOL: f64 = 1e-8;

/// One sampled run through a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub shot: u64,
    /// `(step, branch)` outcomes in order.
    pub path: Vec<(usize, usize)>,
    pub final_state: FullState,
    /// Largest entrywise gap between the final state and the target.
    pub deviation: f64,
    pub matched_target: bool,
}

/// Aggregated outcome statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    pub seed: u64,
    pub shots: u64,
    /// `branch_counts[k][i]`: shots that took branch `i` at step `k`.
    pub branch_counts: Vec<Vec<u64>>,
    /// Shots per full outcome sequence.
    pub path_counts: BTreeMap<Vec<usize>, u64>,
    pub matched: u64,
    pub max_deviation: f64,
}

impl FrequencyReport {
    pub fn match_rate(&self) -> f64 {
        self.matched as f64 / self.shots as f64
    }

    pub fn branch_frequency(&self, step: usize, branch: usize) -> f64 {
        self.branch_counts[step][branch] as f64 / self.shots as f64
    }
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Runs shot number `shot` of the experiment keyed by `seed`.
pub fn sample_trajectory(plan: &LadderPlan, seed: u64, shot: u64) -> TrajectoryRecord {
    let mut rng = shot_rng(seed, shot);
    let mut state = FullState::from_layout(plan.source.amps());
    let mut path = Vec::with_capacity(plan.steps.len());
    for (k, step) in plan.steps.iter().enumerate() {
        let outcomes: Vec<(FullState, f64)> = step
            .branches
            .iter()
            .map(|b| apply_kraus(&state, &b.op, Party::A).expect("plan operators match the state dimension"))
            .collect();
        let total: f64 = outcomes.iter().map(|(_, p)| p).sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = outcomes.len() - 1;
        for (i, (_, p)) in outcomes.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = i;
                break;
            }
        }
        let post = outcomes.into_iter().nth(chosen).expect("branch exists").0;
        state = post
            .permuted(&step.branches[chosen].correction)
            .expect("plan corrections match the state dimension");
        path.push((k, chosen));
    }
    let deviation = state.deviation_from_layout(plan.target.amps());
    TrajectoryRecord {
        seed,
        shot,
        path,
        final_state: state,
        deviation,
        matched_target: deviation <= MATCH_TOL,
    }
}

/// Runs `shots` trajectories in parallel and aggregates them in shot order.
pub fn sample_trajectories(plan: &LadderPlan, shots: u64, seed: u64) -> FrequencyReport {
    let records: Vec<(Vec<usize>, f64)> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let r = sample_trajectory(plan, seed, shot);
            (r.path.into_iter().map(|(_, b)| b).collect(), r.deviation)
        })
        .collect();

    let mut branch_counts: Vec<Vec<u64>> = plan.steps.iter().map(|s| vec![0; s.branches.len()]).collect();
    let mut path_counts = BTreeMap::new();
    let mut matched = 0;
    let mut max_deviation: f64 = 0.0;
    for (path, deviation) in records {
        for (k, &b) in path.iter().enumerate() {
            branch_counts[k][b] += 1;
        }
        *path_counts.entry(path).or_insert(0) += 1;
        if deviation <= MATCH_TOL {
            matched += 1;
        }
        max_deviation = max_deviation.max(deviation);
    }
    FrequencyReport {
        seed,
        shots,
        branch_counts,
        path_counts,
        matched,
        max_deviation,
    }
}
