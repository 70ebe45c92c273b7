// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bbq(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbq"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().expect("summary line");
    serde_json::from_str(line).expect("summary is JSON")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn bbq_device() -> Value {
    json!({
        "modes": [
            {"label": "Q1", "frequency_ghz": 5.0, "anharmonicity_ghz": -0.24, "levels": 4},
            {"label": "Q2", "frequency_ghz": 4.91, "anharmonicity_ghz": -0.24, "levels": 4},
            {"label": "BUS", "frequency_ghz": 3.0, "anharmonicity_ghz": -0.14, "levels": 4}
        ],
        "couplings": [
            {"pair": ["Q1", "BUS"], "strength_ghz": 0.11},
            {"pair": ["Q2", "BUS"], "strength_ghz": 0.11},
            {"pair": ["Q1", "Q2"], "strength_ghz": -0.006}
        ]
    })
}

#[test]
fn find_zero_reports_root_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"device": bbq_device(), "find_zero": {"bracket_ghz": [2.0, 4.0]}, "output": {"path": "z.csv"}}),
    );
    let a = bbq(&["find-zero", "-c", cfg.to_str().unwrap()], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let s = summary(&a);
    let root = s["root_ghz"].as_f64().unwrap();
    assert!((2.5..3.5).contains(&root), "{root}");
    let first = std::fs::read(dir.path().join("z.csv")).unwrap();
    let b = bbq(&["find-zero", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, std::fs::read(dir.path().join("z.csv")).unwrap());
}

#[test]
fn clifford_stats_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbq(&["clifford-stats"], dir.path());
    assert!(out.status.success());
    let s = summary(&out);
    assert_eq!(s["avg_cz"], json!(1.5));
    assert_eq!(s["elements"], json!(11520));
}

#[test]
fn unknown_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"device": bbq_device(), "find_zeros": {}}),
    );
    let out = bbq(&["find-zero", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let s = summary(&out);
    assert_eq!(s["status"], json!("error"));
    assert!(s["message"].as_str().unwrap().contains("find_zeros"));
}

#[test]
fn missing_block_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &json!({"device": bbq_device()}));
    let out = bbq(&["find-zero", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(summary(&out)["message"]
        .as_str()
        .unwrap()
        .starts_with("find_zero"));
}

#[test]
fn invalid_device_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"device": bbq_device(), "find_zero": {"bracket_ghz": [2.0, 4.0]}}),
    );
    let out = bbq(
        &[
            "find-zero",
            "-c",
            cfg.to_str().unwrap(),
            "--set",
            "device.modes.0.levels=1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(summary(&out)["message"]
        .as_str()
        .unwrap()
        .contains("levels"));
}

#[test]
fn numerical_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // ZZ keeps one sign far below the qubits
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"device": bbq_device(), "find_zero": {"bracket_ghz": [1.0, 1.5]}}),
    );
    let out = bbq(&["find-zero", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let pulse = json!({"delta1_ghz": 2.8, "delta2_ghz": 0.53, "g_eff_ghz": 0.156,
        "turn_rate_per_ns": 0.3, "half_length_ns": 10.0, "sample_dt_ns": 0.1});
    let cfg = write(dir.path(), "c.json", &json!({"pulse": pulse}));
    let c = cfg.to_str().unwrap();
    let a = summary(&bbq(&["pulse", "-c", c], dir.path()));
    let b = summary(&bbq(
        &["pulse", "-c", c, "--set", "pulse.half_length_ns=20"],
        dir.path(),
    ));
    assert_eq!(a["duration_ns"], json!(20.0));
    assert_eq!(b["duration_ns"], json!(40.0));
}

#[test]
fn dumped_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"seed": 5, "rb": {"depths": [1, 5, 10, 20], "sequences_per_depth": 4,
            "noise": {"kind": "depolarizing_after_cz", "epsilon": 0.01}}}),
    );
    let a = bbq(
        &[
            "rb",
            "-c",
            cfg.to_str().unwrap(),
            "-o",
            "a.csv",
            "--dump-config",
            "eff.json",
        ],
        dir.path(),
    );
    assert!(a.status.success());
    let b = bbq(&["rb", "-c", "eff.json", "-o", "b.csv"], dir.path());
    assert!(b.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn inputs_are_not_modified() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"device": bbq_device(), "find_zero": {"bracket_ghz": [2.0, 4.0]}, "output": {"path": "o.json", "format": "json"}}),
    );
    let before = std::fs::read(&cfg).unwrap();
    let out = bbq(
        &[
            "find-zero",
            "-c",
            cfg.to_str().unwrap(),
            "--set",
            "find_zero.all=true",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(before, std::fs::read(&cfg).unwrap());
}

#[test]
fn rb_outputs_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"seed": 1, "rb": {"depths": [1, 10, 50], "sequences_per_depth": 10,
            "noise": {"kind": "depolarizing_after_cz", "epsilon": 0.005}},
            "output": {"format": "json"}}),
    );
    let c = cfg.to_str().unwrap();
    bbq(
        &["rb", "-c", c, "-o", "t1.json", "--threads", "1"],
        dir.path(),
    );
    bbq(
        &["rb", "-c", c, "-o", "t8.json", "--threads", "8"],
        dir.path(),
    );
    bbq(&["rb", "-c", c, "-o", "again.json"], dir.path());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("t1.json"), read("t8.json"));
    assert_eq!(read("t1.json"), read("again.json"));
}

#[test]
fn zz_curve_feeds_zz_fit() {
    let dir = tempfile::tempdir().unwrap();
    let mut device = bbq_device();
    device["squid"] = json!({"f_max_ghz": 4.55, "asymmetry": 0.2, "flux_offset": 0.0});
    let curve = write(
        dir.path(),
        "curve.json",
        &json!({"device": device, "zz_curve": {"flux_phi0": {"start": 0.0, "stop": 0.4, "count": 21}},
            "output": {"path": "curve.csv"}}),
    );
    assert!(
        bbq(&["zz-curve", "-c", curve.to_str().unwrap()], dir.path())
            .status
            .success()
    );
    let mut start = device.clone();
    start["couplings"][0]["strength_ghz"] = json!(0.1);
    start["couplings"][2]["strength_ghz"] = json!(-0.004);
    let fit = write(
        dir.path(),
        "fit.json",
        &json!({"device": start, "fit": {"data_path": "curve.csv"}}),
    );
    let out = bbq(&["zz-fit", "-c", fit.to_str().unwrap()], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(&out);
    assert!((s["g_q1_bus_ghz"].as_f64().unwrap() - 0.11).abs() < 1e-6);
    assert!((s["g_q1_q2_ghz"].as_f64().unwrap() + 0.006).abs() < 1e-6);
}

#[test]
fn output_may_not_overwrite_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"device": bbq_device(), "find_zero": {"bracket_ghz": [2.0, 4.0]}, "output": {"path": "c.json", "format": "json"}}),
    );
    let before = std::fs::read(&cfg).unwrap();
    let out = bbq(&["find-zero", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(summary(&out)["message"]
        .as_str()
        .unwrap()
        .starts_with("output.path"));
    assert_eq!(before, std::fs::read(&cfg).unwrap());
}
