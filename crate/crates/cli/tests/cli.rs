use std::collections::BTreeSet;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use detlocc::transcript::Transcript;
use detlocc::{cmd_demo_infeasible, cmd_plan, cmd_simulate, ProblemSpec};
use proptest::prelude::*;

const RUNNING: &str = r#"{"source":[0.4,0.3,0.2,0.1],"target":[0.55,0.25,0.15,0.05],"squared":true}"#;
const CASE_TWO: &str = r#"{"source":[0.4,0.35,0.25],"target":[0.5,0.4,0.1],"squared":true}"#;
const CASE_ONE: &str = r#"{"source":[0.5,0.3,0.2],"target":[0.7,0.2,0.1],"squared":true}"#;
const COLLAPSE: &str = r#"{"source":[0.4,0.3,0.3],"target":[0.7,0.2,0.1],"squared":true}"#;
const NOT_MAJORIZED: &str = r#"{"source":[0.5,0.3,0.2],"target":[0.45,0.45,0.1],"squared":true}"#;
const IDENTITY: &str = r#"{"source":[0.4,0.3,0.2,0.1],"target":[0.4,0.3,0.2,0.1],"squared":true}"#;

fn detlocc(args: &[&str], input: &str, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_detlocc"));
    cmd.args(args)
        .env_remove("DLT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn machine(args: &[&str], input: &str) -> (i32, Transcript) {
    let mut all = args.to_vec();
    all.extend(["--format", "machine"]);
    let out = detlocc(&all, input, &[]);
    let t = serde_json::from_slice(&out.stdout).unwrap();
    (out.status.code().unwrap(), t)
}

#[test]
fn check_exit_codes() {
    assert_eq!(detlocc(&["check"], RUNNING, &[]).status.code(), Some(0));
    let out = detlocc(&["check"], NOT_MAJORIZED, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fails at k = 2"));
    let (code, t) = machine(&["check"], NOT_MAJORIZED);
    assert_eq!(code, 2);
    assert_eq!(t.majorization.unwrap().failing_k, Some(2));

    let negative = r#"{"source":[0.5,-0.3,0.8],"target":[0.7,0.2,0.1],"squared":true}"#;
    assert_eq!(detlocc(&["check"], negative, &[]).status.code(), Some(1));
    assert_eq!(detlocc(&["check"], "not json", &[]).status.code(), Some(1));
    let unsorted = r#"{"source":[0.3,0.5,0.2],"target":[0.7,0.2,0.1]}"#;
    assert_eq!(detlocc(&["check", "--squared"], unsorted, &[]).status.code(), Some(1));
    assert_eq!(detlocc(&["check", "--squared", "--autosort"], unsorted, &[]).status.code(), Some(0));
    let mismatch = r#"{"source":[0.5,0.5],"target":[0.7,0.2,0.1],"squared":true}"#;
    assert_eq!(detlocc(&["check"], mismatch, &[]).status.code(), Some(1));
}

#[test]
fn plan_transcripts() {
    let (code, t) = machine(&["plan"], RUNNING);
    assert_eq!(code, 0);
    assert_eq!(t.steps.as_ref().unwrap().len(), 2);
    assert!(t.verification.as_ref().unwrap().passed);
    assert_eq!(t.chain.as_ref().unwrap().len(), 3);

    let (code, t) = machine(&["plan"], CASE_TWO);
    assert_eq!(code, 0);
    let steps = t.steps.unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].case, "CASE_II");

    let (code, t) = machine(&["plan"], IDENTITY);
    assert_eq!(code, 0);
    let steps = t.steps.unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].case, "TRIVIAL");

    assert_eq!(detlocc(&["plan"], NOT_MAJORIZED, &[]).status.code(), Some(2));
}

#[test]
fn plan_reports_ladder_failure() {
    let input = r#"{"source":[0.3,0.3,0.2,0.2],"target":[0.35,0.35,0.15,0.15],"squared":true}"#;
    let (code, t) = machine(&["plan"], input);
    assert_eq!(code, 3);
    assert!(t.majorization.unwrap().holds);
    assert!(t.error.unwrap().contains("chain link 1"));
}

#[test]
fn simulate_commands() {
    let out = detlocc(&["simulate", "--shots", "0"], CASE_ONE, &[]);
    assert_eq!(out.status.code(), Some(1));

    let (code, t) = machine(&["simulate", "--shots", "2000"], IDENTITY);
    assert_eq!(code, 0);
    let sim = t.simulation.unwrap();
    assert_eq!(sim.matched, 2000);
    assert_eq!(sim.branches, vec![vec![detlocc::transcript::BranchFrequency {
        count: 2000,
        frequency: 1.0,
        probability: 1.0
    }]]);

    let (code, t) = machine(&["simulate", "--shots", "5000", "--seed", "17"], CASE_ONE);
    assert_eq!(code, 0);
    assert_eq!(t.simulation.unwrap().match_rate, 1.0);
}

#[test]
fn seed_from_environment() {
    let flag = detlocc(&["simulate", "--shots", "300", "--seed", "99"], RUNNING, &[]);
    let env = detlocc(&["simulate", "--shots", "300"], RUNNING, &[("DLT_SEED", "99")]);
    let other = detlocc(&["simulate", "--shots", "300"], RUNNING, &[("DLT_SEED", "98")]);
    assert_eq!(flag.stdout, env.stdout);
    assert_ne!(flag.stdout, other.stdout);
}

#[test]
fn demo_infeasible_outputs() {
    let (code, t) = machine(&["demo-infeasible", "-m", "2"], COLLAPSE);
    assert_eq!(code, 0);
    let g = t.greatest_first.unwrap();
    assert!(g.collapsed);
    let c = g.certificate.unwrap();
    assert_eq!((c.k, c.intermediate_rank, c.target_rank), (1, 2, 3));

    let (code, t) = machine(&["demo-infeasible"], IDENTITY);
    assert_eq!(code, 0);
    assert!(!t.greatest_first.unwrap().collapsed);

    let (code, t) = machine(&["demo-infeasible", "-m", "3"], RUNNING);
    assert_eq!(code, 0);
    assert_eq!(t.greatest_first.unwrap().chain.unwrap().len(), 3);
}

fn spec(json: &str) -> ProblemSpec {
    ProblemSpec::from_json(json).unwrap()
}

fn roundtrip(t: &Transcript) {
    let text = detlocc::to_json(t);
    let back: Transcript = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, t);
    assert_eq!(detlocc::to_json(&back), text);
}

#[test]
fn transcripts_roundtrip() {
    roundtrip(&cmd_plan(&spec(RUNNING)).1.unwrap());
    roundtrip(&cmd_simulate(&spec(RUNNING), 500, 3).1.unwrap());
    roundtrip(&cmd_demo_infeasible(&spec(COLLAPSE), 2).1.unwrap());
    roundtrip(&cmd_plan(&spec(NOT_MAJORIZED)).1.unwrap());
}

#[test]
fn schema_lists_every_transcript_field() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/transcript.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let declared: BTreeSet<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    for t in [
        cmd_simulate(&spec(RUNNING), 10, 1).1.unwrap(),
        cmd_demo_infeasible(&spec(COLLAPSE), 2).1.unwrap(),
        cmd_plan(&spec(r#"{"source":[0.3,0.3,0.2,0.2],"target":[0.35,0.35,0.15,0.15],"squared":true}"#)).1.unwrap(),
    ] {
        let value = serde_json::to_value(&t).unwrap();
        for key in value.as_object().unwrap().keys() {
            assert!(declared.contains(key), "{key} missing from schema");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn random_plan_transcripts_roundtrip(w in prop::collection::vec(0.01f64..1.0, 2..8), mix in 0.0f64..1.0) {
        let total: f64 = w.iter().sum();
        let mut target: Vec<f64> = w.iter().map(|x| x / total).collect();
        target.sort_by(|a, b| b.total_cmp(a));
        let n = target.len() as f64;
        let source: Vec<f64> = target.iter().map(|t| mix * t + (1.0 - mix) / n).collect();
        let spec = ProblemSpec { source, target, squared: true, autosort: true };
        let (_, t) = cmd_plan(&spec);
        roundtrip(&t.unwrap());
    }
}
