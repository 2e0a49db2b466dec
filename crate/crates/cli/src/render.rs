//! Plain-text rendering of transcripts.

use std::fmt::Write;

use crate::transcript::Transcript;

fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("({})", items.join(", "))
}

pub fn human(t: &Transcript) -> String {
    let mut out = String::new();
    let w = &mut out;
    if let Some(n) = &t.normalized {
        writeln!(w, "source  {}", list(&n.source)).unwrap();
        writeln!(w, "target  {}", list(&n.target)).unwrap();
    }
    if let Some(m) = &t.majorization {
        match m.failing_k {
            None => writeln!(w, "majorization: holds").unwrap(),
            Some(k) => writeln!(w, "majorization: fails at k = {k}").unwrap(),
        }
        writeln!(w, "tail margins {}", list(&m.tail_margins)).unwrap();
    }
    if let Some(chain) = &t.chain {
        writeln!(w, "chain ({} steps)", chain.len() - 1).unwrap();
        for (k, state) in chain.iter().enumerate() {
            writeln!(w, "  [{k}] {}", list(state)).unwrap();
        }
    }
    if let Some(steps) = &t.steps {
        for s in steps {
            writeln!(
                w,
                "step {} {} on basis {}..{} ({} outcomes, {} pruned)",
                s.index,
                s.case,
                s.block[0],
                s.block[1],
                s.branches.len(),
                s.pruned_count
            )
            .unwrap();
            for b in &s.branches {
                writeln!(
                    w,
                    "  outcome {}  p = {}  M = diag{}  relabel {:?}",
                    b.index,
                    num(b.probability),
                    list(&b.diag),
                    b.correction
                )
                .unwrap();
            }
        }
    }
    if let Some(v) = &t.verification {
        let status = if v.passed { "passed" } else { "FAILED" };
        match v.max_deviation {
            Some(d) => writeln!(w, "verification {status}: max deviation {d:e} (tolerance {:e})", v.tolerance).unwrap(),
            None => writeln!(w, "verification {status}").unwrap(),
        }
        writeln!(w, "  {} outcome paths, {} distinct final states", v.paths, v.terminal_states).unwrap();
    }
    if let Some(s) = &t.simulation {
        writeln!(w, "simulation: {} shots, seed {}", s.shots, s.seed).unwrap();
        writeln!(w, "  reached target: {} ({})", s.matched, s.match_rate).unwrap();
        for (k, step) in s.branches.iter().enumerate() {
            for (i, b) in step.iter().enumerate() {
                writeln!(
                    w,
                    "  step {k} outcome {i}: {} ({} expected {})",
                    b.count, b.frequency, b.probability
                )
                .unwrap();
            }
        }
    }
    if let Some(g) = &t.greatest_first {
        match (&g.chain, &g.certificate) {
            (_, Some(c)) => {
                writeln!(w, "greatest-first (m = {}): rank collapse at step {}", g.m, c.k).unwrap();
                writeln!(w, "  coefficient {} squared = {:e}", c.position, c.tilde_squared).unwrap();
                writeln!(w, "  intermediate {}", list(&c.state)).unwrap();
                writeln!(
                    w,
                    "  rank {} < target rank {}: not reachable by local operations",
                    c.intermediate_rank, c.target_rank
                )
                .unwrap();
            }
            (Some(chain), None) => {
                writeln!(w, "greatest-first (m = {}): no rank collapse", g.m).unwrap();
                for (k, state) in chain.iter().enumerate() {
                    writeln!(w, "  [{k}] {}", list(state)).unwrap();
                }
            }
            (None, None) => {}
        }
    }
    out
}
