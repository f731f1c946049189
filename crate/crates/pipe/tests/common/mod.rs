#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use valence_pipe::formats::*;

pub const BIN: &str = env!("CARGO_BIN_EXE_valence-pipe");

pub fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("VALENCE_PIPE_THREADS", t),
        None => cmd.env_remove("VALENCE_PIPE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

pub fn run_ok(args: &[&str], threads: Option<&str>) -> serde_json::Value {
    let out = run(args, threads);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

pub fn error_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a record");
    serde_json::from_str(line).expect("error record is JSON")
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Paths of one full run below a root directory.
pub struct Layout {
    pub cohort: PathBuf,
    pub features: PathBuf,
    pub correlate: PathBuf,
    pub classify: PathBuf,
    pub report: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Layout {
        Layout {
            cohort: root.join("cohort"),
            features: root.join("features"),
            correlate: root.join("correlate"),
            classify: root.join("classify"),
            report: root.join("report"),
        }
    }

    pub fn surveys(&self) -> PathBuf {
        self.cohort.join("surveys.csv")
    }

    pub fn signals(&self) -> PathBuf {
        self.cohort.join("signals")
    }

    pub fn features_csv(&self) -> PathBuf {
        self.features.join("features.csv")
    }
}

pub fn synth(layout: &Layout, extra: &[&str], threads: Option<&str>) -> serde_json::Value {
    let mut args = vec!["synth", "--out", s(&layout.cohort)];
    args.extend_from_slice(extra);
    run_ok(&args, threads)
}

pub fn extract(layout: &Layout, threads: Option<&str>) -> serde_json::Value {
    let surveys = layout.surveys();
    let signals = layout.signals();
    run_ok(
        &["extract", "--signals", s(&signals), "--surveys", s(&surveys), "--out", s(&layout.features)],
        threads,
    )
}

pub fn correlate(layout: &Layout, threads: Option<&str>) -> serde_json::Value {
    let surveys = layout.surveys();
    let features = layout.features_csv();
    run_ok(
        &["correlate", "--surveys", s(&surveys), "--features", s(&features), "--out", s(&layout.correlate)],
        threads,
    )
}

pub fn classify(layout: &Layout, extra: &[&str], threads: Option<&str>) -> serde_json::Value {
    let surveys = layout.surveys();
    let features = layout.features_csv();
    let mut args =
        vec!["classify", "--surveys", s(&surveys), "--features", s(&features), "--out", s(&layout.classify)];
    args.extend_from_slice(extra);
    run_ok(&args, threads)
}

pub fn report(layout: &Layout, threads: Option<&str>) -> serde_json::Value {
    let surveys = layout.surveys();
    run_ok(&["report", "--surveys", s(&surveys), "--out", s(&layout.report)], threads)
}

/// Runs every subcommand on a fresh synthetic cohort.
pub fn full_run(root: &Path, synth_args: &[&str], threads: Option<&str>) -> Layout {
    let layout = Layout::new(root);
    synth(&layout, synth_args, threads);
    extract(&layout, threads);
    correlate(&layout, threads);
    classify(&layout, &[], threads);
    report(&layout, threads);
    layout
}

/// Every file below `dir`, keyed by its path relative to `dir`.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).expect("below base").to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub const SMALL: [&str; 4] = ["--participants", "3", "--responses", "6"];

/// Rewrites a generated file from its parsed form.
pub fn rewrite(name: &str, text: &str, dir: &BTreeMap<String, Vec<u8>>) -> String {
    let h = config_hash_of(text);
    let h = h.as_deref();
    let base = name.rsplit('/').next().unwrap();
    if name.starts_with("signals/") {
        return write_signal_csv(&parse_signal_csv(text).unwrap(), h);
    }
    match base {
        "surveys.csv" => write_survey_csv(&parse_survey_csv(text).unwrap(), h),
        "features.csv" => write_features_csv(&parse_features_csv(text).unwrap(), h),
        "attrition.csv" => write_attrition_csv(&parse_attrition_csv(text).unwrap(), h),
        "metrics.csv" => write_metrics_csv(&parse_metrics_csv(text).unwrap(), h),
        CORRELATION_R | CORRELATION_P | CORRELATION_MASK | CORRELATION_N => {
            let get = |n: &str| String::from_utf8(dir[n].clone()).unwrap();
            let m = parse_correlation_files(&get(CORRELATION_R), &get(CORRELATION_P), &get(CORRELATION_N))
                .unwrap();
            let files: BTreeMap<&str, String> = write_correlation_files(&m, h).into_iter().collect();
            files[base].clone()
        }
        b if b.starts_with("histogram_") => write_histograms_csv(&parse_histograms_csv(text).unwrap(), h),
        other => panic!("unexpected output {other}"),
    }
}
