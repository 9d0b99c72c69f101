use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn rtctimes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtctimes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_edf_schedulable() {
    let out = rtctimes(&["check", &fixture("edf_pair.json"), "--policy", "edf"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("edf: schedulable"));
}

#[test]
fn check_fp_reports_failing_task() {
    let out = rtctimes(&["check", &fixture("fp_pair_overload.json"), "--policy", "fp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("task 2"));
}

#[test]
fn check_point_sources_agree() {
    for file in ["fp_pair.json", "fp_pair_overload.json", "edf_pair.json"] {
        let a = rtctimes(&["check", &fixture(file), "--policy", "fp", "--points", "lehoczky"]);
        let b = rtctimes(&["check", &fixture(file), "--policy", "fp", "--points", "reduced"]);
        assert_eq!(a.status.code(), b.status.code(), "{file}");
    }
}

#[test]
fn constrained_override_rejects_late_deadlines() {
    let out = rtctimes(&["check", &fixture("arbitrary_trio.json"), "--deadline-model", "constrained"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("D_1 > T_1"));
}

#[test]
fn missing_execution_times_are_input_errors() {
    let out = rtctimes(&["check", &fixture("arbitrary_trio.json"), "--policy", "edf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rtctimes(&["check"]).status.code(), Some(2));
    assert_eq!(rtctimes(&["frobnicate"]).status.code(), Some(2));
    let out = rtctimes(&["check", &fixture("edf_pair.json"), "--policy", "rm"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rtctimes(&["check", "/nonexistent/tasks.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn minimize_arbitrary_trio() {
    let out = rtctimes(&["minimize", &fixture("arbitrary_trio.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("0 6 13 20 55"));
    assert!(text.contains("edf:t=55,27/55,1/5,8/55,1"));
}

#[test]
fn optimize_edf_edf_pair() {
    let out = rtctimes(&["optimize", &fixture("edf_pair.json"), "--policy", "edf", "-w", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("optimum 5\n"));
    assert!(text.contains("argmax (0, 5)"));
}

#[test]
fn optimize_fp_fp_pair_reports_selection() {
    let out = rtctimes(&["optimize", &fixture("fp_pair.json"), "--weights", "1,0", "--points", "reduced"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("optimum 3\n"));
    assert!(text.contains("binding fp:task=1:t=3"));
    assert!(text.contains("selection 3 "));
}

#[test]
fn optimize_accepts_negative_and_fractional_weights() {
    let out = rtctimes(&["optimize", &fixture("fp_pair.json"), "-w", "-1,1/2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("optimum 5/2"));
}

#[test]
fn region_fp_fp_pair() {
    let svg = scratch("fp_pair.svg");
    let out = rtctimes(&["region", &fixture("fp_pair.json"), "--policy", "fp", "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("3 rows in 2 groups"));
    assert_eq!(
        stdout(&out),
        "label,c1,c2,bound\nfp:task=1:t=3,1,0,3\nfp:task=2:t=4,1,1,4\nfp:task=2:t=5,2,1,5\n"
    );
    let drawing = std::fs::read_to_string(svg).unwrap();
    assert!(drawing.starts_with("<svg"));
    assert_eq!(drawing.matches("<circle").count(), 5);
}

#[test]
fn region_edf_to_file() {
    let csv = scratch("edf_pair_edf.csv");
    let out = rtctimes(&["region", &fixture("edf_pair.json"), "--policy", "edf", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 11);
    assert!(text.contains("edf:t=15,4/15,1/5,1"));
}

#[test]
fn svg_needs_two_tasks() {
    let svg = scratch("arbitrary_trio.svg");
    let out = rtctimes(&["minimize", &fixture("arbitrary_trio.json"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_trace() {
    let trace = scratch("fp_pair_trace.csv");
    let out = rtctimes(&[
        "simulate",
        &fixture("fp_pair.json"),
        "--horizon",
        "20",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no deadline miss"));
    let csv = std::fs::read_to_string(trace).unwrap();
    assert!(csv.starts_with("start,end,task,job\n0,1,1,0\n1,4,2,0\n4,5,1,1\n"));
}

#[test]
fn simulate_reports_miss() {
    let out = rtctimes(&["simulate", &fixture("fp_pair_overload.json"), "--policy", "fp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("miss: task 2, job 0"));
    let out = rtctimes(&["simulate", &fixture("fp_pair.json"), "--horizon", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_is_reproducible() {
    let a = scratch("exp_a.csv");
    let b = scratch("exp_b.csv");
    for path in [&a, &b] {
        let out = rtctimes(&[
            "experiment",
            "--samples",
            "200",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stderr(&out).contains("fitted c"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next(), Some("id,periods,deadlines,H,D_count,Dmin_count"));
    assert_eq!(text.lines().count(), 201);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let d: usize = fields[4].parse().unwrap();
        let dmin: usize = fields[5].parse().unwrap();
        assert!(dmin <= d, "{line}");
    }
    let envelope = std::fs::read_to_string(scratch("exp_a.envelope.csv")).unwrap();
    let prefix: Vec<usize> = envelope
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert!(prefix.windows(2).all(|w| w[0] <= w[1]));
    let meta = std::fs::read_to_string(scratch("exp_a.meta.txt")).unwrap();
    assert!(meta.contains("uniform integers in [2, 50]"));
}

#[test]
fn experiment_rejects_empty_range() {
    let out = rtctimes(&["experiment", "--lo", "30", "--hi", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
