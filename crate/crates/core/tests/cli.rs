use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mvdisagree::dataset::load_dataset;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvdisagree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn generate_writes_requested_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "data.jsonl");
    let out = run(&["generate", "--classes", "2", "--per-class", "150", "--disagreement", "0.4", "--seed", "7", "-o", &data]);
    assert!(out.status.success(), "{}", stderr(&out));

    let first = fs::read_to_string(&data).unwrap().lines().next().unwrap().to_string();
    let header: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(header["V"], 2);

    let ds = load_dataset(&data).unwrap();
    // 300 foreground training samples, 40% corrupted; the seeds are clean.
    assert_eq!(ds.disagreement_count(), 120);
    assert!(ds.seeds.iter().all(|s| !s.has_disagreement()));
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("120 of"), "{summary}");
}

#[test]
fn missing_output_is_a_usage_error() {
    let out = run(&["generate", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--output"));
}

#[test]
fn out_of_range_disagreement_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["generate", "--disagreement", "1.5", "-o", &path(dir.path(), "d.jsonl")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--disagreement"), "{}", stderr(&out));
    assert!(!dir.path().join("d.jsonl").exists());
}

#[test]
fn sweep_rejects_zero_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--trials", "0", "-o", &path(dir.path(), "s")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("trials"));
}

#[test]
fn sweep_rejects_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--methods", "baseline,cotrain", "-o", &path(dir.path(), "s")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cotrain"));
}

#[test]
fn detect_reports_missing_file_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "nope.jsonl");
    let out = run(&["detect", "--data", &missing, "-o", &path(dir.path(), "det")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nope.jsonl"));
}

#[test]
fn detect_without_background_flags_curve_undefined() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "fg.jsonl");
    let out = run(&["generate", "--no-redundant-background", "--disagreement", "0.3", "--seed", "2", "-o", &data]);
    assert!(out.status.success(), "{}", stderr(&out));
    let det = dir.path().join("det");
    let out = run(&["detect", "--data", &data, "-o", det.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let roc = fs::read_to_string(det.join("roc.csv")).unwrap();
    assert!(roc.starts_with("curve_name,threshold_quantile,fpr,tpr\n"));
    assert!(roc.lines().any(|l| l.starts_with("background,undefined")), "{roc}");
    assert!(roc.lines().any(|l| l.starts_with("foreground,auc")));
    assert!(fs::read_to_string(det.join("roc.svg")).unwrap().contains("background (undefined)"));

    let verdicts = fs::read_to_string(det.join("verdicts.csv")).unwrap();
    let mut lines = verdicts.lines();
    assert_eq!(lines.next().unwrap(), "sample,verdict,truth,m_0_1,m_1_0,h_0_1,h_1_0");
    let ds = load_dataset(&data).unwrap();
    assert_eq!(lines.count(), ds.unlabeled.len());
}

#[test]
fn bootstrap_trace_has_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "d.jsonl");
    assert!(run(&["generate", "--disagreement", "0.5", "--seed", "4", "-o", &data]).status.success());
    let trace = path(dir.path(), "trace.csv");
    let out = run(&["bootstrap", "--data", &data, "--method", "filtered", "--t", "3", "-o", &trace]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "iteration,view,labeled_size,unlabeled_size,test_ccr,pairs_filtered");
    // three iterations, two views each
    assert_eq!(lines.count(), 6);

    let report = path(dir.path(), "cm.csv");
    let out = run(&["bootstrap", "--data", &data, "--method", "crossmodal-unfiltered", "-o", &report]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("sample,label,h_label,h_view,m_label,m_view,kept\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1")));
}

#[test]
fn sweep_writes_summary_trials_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(&cfg, "methods = [\"baseline\", \"filtered\"]\nrates = \"0:0.4:0.2\"\ntrials = 2\nseed = 5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--jobs", "1", "-o", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let summary = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), "method,rate,view,mean_ccr,std_ccr,trials");
    // 2 methods x 3 rates x 2 views
    assert_eq!(lines.clone().count(), 12);
    assert!(lines.all(|l| l.ends_with(",2")));

    let trials = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert!(trials.starts_with("method,rate,trial,seed,view,ccr,fg_auc,bg_auc,failure\n"));
    assert!(trials.lines().skip(1).all(|l| l.ends_with(',')));
    let svg = fs::read_to_string(out_dir.join("sweep.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
}

#[test]
fn failed_trials_exit_non_zero_but_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    // full disagreement leaves no clean samples to seed from
    let out = run(&["sweep", "--methods", "baseline", "--rates", "0.0,1.0", "--trials", "1", "-o", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("1 of 2 trials failed"));
    let trials = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert!(trials.contains("not enough clean samples"));
    let summary = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}
