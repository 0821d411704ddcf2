use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LIMITED_PAIR: &str = r#"{"jobs":[
  {"id":"ev1","arrival":"0","departure":"2","energy":"2","p_max":"1"},
  {"id":"ev2","arrival":"1","departure":"2","energy":"2","p_max":"2"}]}"#;

const NESTED_PAIR: &str = r#"{"jobs":[
  {"id":"ev1","arrival":"0","departure":"3","energy":"2","p_max":"2"},
  {"id":"ev2","arrival":"1","departure":"2","energy":"2","p_max":"2"}]}"#;

const HEADER: &str = "interval_start,interval_end,job_id,energy\n";

fn focs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focs")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_limited_pair_profile() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "limited_pair.json", LIMITED_PAIR);
    let out_dir = tmp.path().join("out");
    let out = focs(&["solve", "--instance", s(&inst), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let profile = fs::read_to_string(out_dir.join("profile.csv")).unwrap();
    assert_eq!(profile, "interval_start,interval_end,power\n0,1,1\n1,2,3\n");
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["objective"], "10");
    assert_eq!(summary["rounds"], 2);
    assert!(!out_dir.join("trace.jsonl").exists());
}

#[test]
fn solve_nested_pair_profile_and_summary() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let out = focs(&["solve", "--instance", s(&inst), "--out", s(tmp.path()), "--alpha", "3", "--trace"]);
    assert_eq!(code(&out), 0);
    let profile = fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    assert_eq!(profile, "interval_start,interval_end,power\n0,1,1\n1,2,2\n2,3,1\n");
    let summary: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["alpha"], 3);
    assert_eq!(summary["objective"], "10");
    let ranks: Vec<u64> = summary["profile"].as_array().unwrap().iter().map(|r| r["rank"].as_u64().unwrap()).collect();
    assert_eq!(ranks, [2, 1, 2]);
    assert_eq!(fs::read_to_string(tmp.path().join("trace.jsonl")).unwrap().lines().count(), 5);
}

#[test]
fn solve_infeasible_exits_2_with_job() {
    let tmp = TempDir::new().unwrap();
    let inst = write(
        tmp.path(),
        "bad.json",
        r#"{"jobs":[{"id":"ok","arrival":"0","departure":"2","energy":"1","p_max":"1"},
                    {"id":"greedy","arrival":"0","departure":"1","energy":"5/2","p_max":"2"}]}"#,
    );
    let out = focs(&["solve", "--instance", s(&inst), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("greedy") && !err.contains("job ok"), "{err}");
    assert!(!tmp.path().join("schedule.csv").exists());
}

#[test]
fn bad_input_exits_1() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.json");
    assert_eq!(code(&focs(&["solve", "--instance", s(&missing)])), 1);
    let numeric = write(
        tmp.path(),
        "n.json",
        r#"{"jobs":[{"id":"a","arrival":0,"departure":"1","energy":"1","p_max":"1"}]}"#,
    );
    assert_eq!(code(&focs(&["solve", "--instance", s(&numeric), "--out", s(tmp.path())])), 1);
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    assert_eq!(code(&focs(&["solve", "--instance", s(&inst), "--out", s(tmp.path()), "--alpha", "1"])), 1);
}

#[test]
fn verify_nested_pair_optimal_passes() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let sched = write(tmp.path(), "s.csv", &format!("{HEADER}0,1,ev1,1\n1,2,ev1,0\n1,2,ev2,2\n2,3,ev1,1\n"));
    let out = focs(&["verify", "--instance", s(&inst), "--schedule", s(&sched), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("kkt_report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["duals"]["valid"], true);
    assert_eq!(report["duals"]["delta"]["ev1"], "2");
    assert_eq!(report["duals"]["delta"]["ev2"], "4");
}

#[test]
fn verify_nested_pair_swapped_exits_3_with_kkt2() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let sched = write(tmp.path(), "s.csv", &format!("{HEADER}0,1,ev1,2\n1,2,ev2,2\n"));
    let out = focs(&["verify", "--instance", s(&inst), "--schedule", s(&sched)]);
    assert_eq!(code(&out), 3);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
    assert_eq!(report["conditions"]["KKT2"], false);
    assert!(report["violations"].as_array().unwrap().iter().any(|v| v["condition"] == "KKT2"));
}

#[test]
fn verify_rejects_limit_and_dimension_errors() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let over = write(tmp.path(), "over.csv", &format!("{HEADER}0,1,ev1,3\n1,2,ev2,2\n2,3,ev1,-1\n"));
    let out = focs(&["verify", "--instance", s(&inst), "--schedule", s(&over)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("constraint violation"));
    let alien = write(tmp.path(), "alien.csv", &format!("{HEADER}0,1,ev9,1\n"));
    assert_eq!(code(&focs(&["verify", "--instance", s(&inst), "--schedule", s(&alien)])), 1);
    let interval = write(tmp.path(), "interval.csv", &format!("{HEADER}0,2,ev1,1\n"));
    assert_eq!(code(&focs(&["verify", "--instance", s(&inst), "--schedule", s(&interval)])), 1);
    let short = write(tmp.path(), "short.csv", &format!("{HEADER}0,1,ev1,1\n1,2,ev2,2\n"));
    assert_eq!(code(&focs(&["verify", "--instance", s(&inst), "--schedule", s(&short)])), 1);
}

#[test]
fn verify_tolerance_mode() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let sched = write(
        tmp.path(),
        "f.csv",
        &format!("{HEADER}0,1,ev1,0.9999999999\n1,2,ev1,-0.0000000001\n1,2,ev2,2.0000000001\n2,3,ev1,1.0000000001\n"),
    );
    assert_eq!(code(&focs(&["verify", "--instance", s(&inst), "--schedule", s(&sched)])), 1);
    let out = focs(&["verify", "--instance", s(&inst), "--schedule", s(&sched), "--tol"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = focs(&["verify", "--instance", s(&inst), "--schedule", s(&sched), "--tol", "1e-15"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn gen_is_deterministic_and_feasible() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    for path in [&a, &b] {
        assert_eq!(code(&focs(&["gen", "--jobs", "5", "--seed", "7", "--out", s(path)])), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let parsed: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(parsed["jobs"].as_array().unwrap().len(), 5);

    let one = focs(&["gen", "--jobs", "1", "--horizon", "1", "--seed", "3"]);
    assert_eq!(code(&one), 0);
    let inst = focs_core::parse_instance(std::str::from_utf8(&one.stdout).unwrap()).unwrap();
    assert_eq!(inst.len(), 1);
    let job = &inst.jobs()[0];
    assert!(job.energy <= job.p_max && focs_core::check_feasibility(&inst));

    assert_eq!(code(&focs(&["gen", "--jobs", "0"])), 1);
}

#[test]
fn trace_records() {
    let tmp = TempDir::new().unwrap();
    let nested_pair = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let out = focs(&["trace", "--instance", s(&nested_pair)]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let iterations: Vec<_> = lines.iter().filter(|l| l["kind"] == "iteration").collect();
    assert_eq!(iterations.len(), 3);
    assert_eq!(lines.iter().filter(|l| l["kind"] == "round").count(), 2);
    for l in &lines {
        for key in ["round", "iteration", "g", "flow_value", "parked", "critical"] {
            assert!(l.get(key).is_some() || (key == "g" && l["kind"] == "round"), "{key} missing");
        }
    }

    let limited_pair = write(tmp.path(), "limited_pair.json", LIMITED_PAIR);
    let dir = tmp.path().join("t");
    assert_eq!(code(&focs(&["trace", "--instance", s(&limited_pair), "--out", s(&dir)])), 0);
    let text = fs::read_to_string(dir.join("trace.jsonl")).unwrap();
    let g2: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|l| l["kind"] == "iteration" && l["round"] == 1)
        .map(|l| l["g"]["2"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(g2, ["2", "3"]);

    let single = write(
        tmp.path(),
        "one.json",
        r#"{"jobs":[{"id":"a","arrival":"0","departure":"1","energy":"1","p_max":"1"}]}"#,
    );
    let out = focs(&["trace", "--instance", s(&single)]);
    let kinds: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["kind"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(kinds, ["iteration", "round"]);
}

#[test]
fn oracle_matches_solve_on_nested_pair() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "nested_pair.json", NESTED_PAIR);
    let out = focs(&["oracle", "--instance", s(&inst), "--delta", "0.5", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(json["objective"], "6");
    assert_eq!(json["equal"], true);
    let profile = fs::read_to_string(tmp.path().join("oracle_profile.csv")).unwrap();
    assert_eq!(profile, "interval_start,interval_end,power\n0,1,1\n1,2,2\n2,3,1\n");
    assert_eq!(code(&focs(&["oracle", "--instance", s(&inst), "--delta", "0"])), 1);
}

#[test]
fn solve_then_verify_round_trips() {
    let tmp = TempDir::new().unwrap();
    for seed in 0..15 {
        let inst = tmp.path().join(format!("i{seed}.json"));
        let dir = tmp.path().join(format!("o{seed}"));
        let jobs = (1 + seed % 9).to_string();
        let seed = seed.to_string();
        assert_eq!(code(&focs(&["gen", "--jobs", &jobs, "--horizon", "12", "--seed", &seed, "--energy-denominator", "3", "--out", s(&inst)])), 0);
        assert_eq!(code(&focs(&["solve", "--instance", s(&inst), "--out", s(&dir)])), 0);
        let first = fs::read(dir.join("schedule.csv")).unwrap();
        let out = focs(&["verify", "--instance", s(&inst), "--schedule", s(&dir.join("schedule.csv"))]);
        assert_eq!(code(&out), 0, "seed {seed}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(code(&focs(&["solve", "--instance", s(&inst), "--out", s(&dir)])), 0);
        assert_eq!(fs::read(dir.join("schedule.csv")).unwrap(), first);
    }
}
