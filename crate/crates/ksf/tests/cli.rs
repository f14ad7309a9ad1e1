//! End-to-end tests of the `ksf` binary: exit codes, file round trips,
//! report schemas and the `KSF_THREADS` determinism contract.

use ksf::canon::to_canonical_json;
use ksf::cli::parse_ks_file;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn ksf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ksf_in(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ksf"));
    cmd.current_dir(dir).args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn generate_parse_generate_round_trips_canonically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("peres-completed.json");
    let out = ksf(&["generate", "--complete", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());

    let emitted = std::fs::read_to_string(&path).unwrap();
    let reparsed = parse_ks_file(&path).expect("generated file parses");
    let reserialized = format!("{}\n", to_canonical_json(&reparsed).unwrap());
    assert_eq!(emitted, reserialized, "generate -> parse -> generate must be byte-identical");

    let doc: Value = serde_json::from_str(&emitted).unwrap();
    assert_eq!(doc["name"], "peres33-completed");
    assert_eq!(doc["directions"].as_array().unwrap().len(), 57);
    assert_eq!(doc["triads"].as_array().unwrap().len(), 40);
}

#[test]
fn generate_without_completion_emits_the_33_ray_set() {
    let out = ksf(&["generate"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["name"], "peres33");
    assert_eq!(doc["directions"].as_array().unwrap().len(), 33);
    assert_eq!(doc["triads"].as_array().unwrap().len(), 16);
}

#[test]
fn verify_reports_uncolorable_with_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.json");
    assert!(ksf(&["generate", "--complete", "--out", path.to_str().unwrap()])
        .status
        .success());
    let out = ksf(&["verify", "--set", path.to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert_eq!(doc["status"], "uncolorable");
    assert_eq!(doc["threshold"], 0.025);
    assert_eq!(doc["clause_check_agrees"], true);
    assert_eq!(doc["manifest"]["subcommand"], "verify");
    assert!(doc.get("witness").is_none());
}

#[test]
fn verify_complete_flag_matches_pregenerated_completion() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.json");
    assert!(ksf(&["generate", "--out", raw.to_str().unwrap()]).status.success());
    // The 16 bare triads are colorable; completion flips the verdict.
    let colorable = stdout_json(&ksf(&["verify", "--set", raw.to_str().unwrap()]));
    assert_eq!(colorable["status"], "colorable");
    assert!(colorable["witness"].is_array());
    let completed = stdout_json(&ksf(&["verify", "--set", raw.to_str().unwrap(), "--complete"]));
    assert_eq!(completed["status"], "uncolorable");
    assert_eq!(completed["n_triads"], 40);
}

#[test]
fn verify_missing_file_exits_2() {
    let out = ksf(&["verify", "--set", "/nonexistent/set.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn verify_rejects_non_orthogonal_declared_triad() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name":"bad","tolerance":1e-9,
            "directions":[[1,0,0],[0,1,0],[1,1,1]],
            "triads":[[0,1,2]]}"#,
    )
    .unwrap();
    let out = ksf(&["verify", "--set", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("[0, 1, 2]"), "stderr must name the triad: {stderr}");
}

#[test]
fn simulate_zero_noise_excludes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"trials_per_triad":400,"seed":5,"alpha":0.01}"#).unwrap();
    let out = ksf(&["simulate", "--config", config.to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "excluded");
    assert_eq!(doc["mode"], "ks");
    assert_eq!(doc["n_triads"], 40);
    assert_eq!(doc["seed"], 5);
    assert_eq!(doc["epsilon_max"], 0.0);
    assert_eq!(doc["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(doc["manifest"]["subcommand"], "simulate");
    assert_eq!(doc["per_triad"].as_array().unwrap().len(), 40);
}

#[test]
fn simulate_flag_overrides_and_digest_tracking() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    // 400 > the 328-trial exclusion minimum for N = 40 at alpha 0.01.
    std::fs::write(&config, r#"{"trials_per_triad":400,"seed":5,"alpha":0.01}"#).unwrap();
    let base = stdout_json(&ksf(&["simulate", "--config", config.to_str().unwrap()]));
    let reseeded = stdout_json(&ksf(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "99",
    ]));
    assert_eq!(reseeded["seed"], 99);
    assert_ne!(
        base["config_digest"], reseeded["config_digest"],
        "digest must track the resolved config"
    );
    let joint = stdout_json(&ksf(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--mode",
        "joint",
    ]));
    assert_eq!(joint["verdict"], "excluded");
    assert_ne!(base["config_digest"], joint["config_digest"]);
}

#[test]
fn simulate_reports_identical_under_ksf_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"trials_per_triad":600,"seed":12,"alpha":0.01,
            "noise":{"jitter_sigma":0.05,"detection_efficiency":0.9}}"#,
    )
    .unwrap();
    let strip_manifest = |mut doc: Value| {
        doc.as_object_mut().unwrap().remove("manifest");
        doc
    };
    let one = strip_manifest(stdout_json(&ksf_in(
        dir.path(),
        &["simulate", "--config", "config.json"],
        &[("KSF_THREADS", "1")],
    )));
    for threads in ["4", "8"] {
        let other = strip_manifest(stdout_json(&ksf_in(
            dir.path(),
            &["simulate", "--config", "config.json"],
            &[("KSF_THREADS", threads)],
        )));
        assert_eq!(
            to_canonical_json(&one).unwrap(),
            to_canonical_json(&other).unwrap(),
            "KSF_THREADS={threads} changed the report"
        );
    }
}

#[test]
fn simulate_rejects_mode_flag_for_hidden_variable_source() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("axes.json");
    std::fs::write(
        &set,
        r#"{"name":"axes","tolerance":1e-9,"directions":[[1,0,0],[0,1,0],[0,0,1]]}"#,
    )
    .unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"trials_per_triad":10,"seed":1,"alpha":0.5,
            "source":{"hidden_variable":{"model":[{"weight":1.0,"values":[0,1,1]}]}}}"#,
    )
    .unwrap();
    let out = ksf(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--set",
        set.to_str().unwrap(),
        "--mode",
        "joint",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_colorable_set_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("axes.json");
    std::fs::write(
        &set,
        r#"{"name":"axes","tolerance":1e-9,"directions":[[1,0,0],[0,1,0],[0,0,1]]}"#,
    )
    .unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"trials_per_triad":10,"seed":1,"alpha":0.5}"#).unwrap();
    let out = ksf(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--set",
        set.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colorable"));
}

#[test]
fn simulate_bad_config_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, "{\"trials_per_triad\": }\n").unwrap();
    let out = ksf(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn analyze_computes_report_and_flags_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("axes.json");
    std::fs::write(
        &set,
        r#"{"name":"axes","tolerance":1e-9,"directions":[[1,0,0],[0,1,0],[0,0,1]]}"#,
    )
    .unwrap();
    let counts = dir.path().join("counts.csv");
    let mut csv = String::from("trial,triad,r1,r2,r3\n");
    for t in 0..100 {
        csv.push_str(&format!("{t},0,1,1,0\n"));
    }
    csv.push_str("100,0,1,1,1\n");
    std::fs::write(&counts, &csv).unwrap();
    let doc = stdout_json(&ksf(&[
        "analyze",
        "--set",
        set.to_str().unwrap(),
        "--counts",
        counts.to_str().unwrap(),
    ]));
    assert_eq!(doc["per_triad"][0]["failures"], 1);
    assert_eq!(doc["per_triad"][0]["trials"], 101);
    assert_eq!(doc["mode"], "ks");
    assert!(doc.get("seed").is_none());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "trial,triad,r1,r2,r3\n0,0,1,oops,0\n").unwrap();
    let out = ksf(&[
        "analyze",
        "--set",
        set.to_str().unwrap(),
        "--counts",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 2"),
        "stderr must name the offending line"
    );
}

#[test]
fn ghz_subcommand_emits_mode_ghz_report() {
    let doc = stdout_json(&ksf(&["ghz", "--trials", "2000", "--seed", "3"]));
    assert_eq!(doc["mode"], "ghz");
    assert_eq!(doc["threshold"], 0.25);
    assert_eq!(doc["verdict"], "excluded");
    assert_eq!(doc["lhv"]["max_satisfiable"], 3);
    assert_eq!(doc["per_triad"].as_array().unwrap().len(), 4);
    let contexts: Vec<&str> = doc["per_triad"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["context"].as_str().unwrap())
        .collect();
    assert_eq!(contexts, ["XXX", "XYY", "YXY", "YYX"]);
}

#[test]
fn reports_embed_manifest_with_tool_version() {
    let doc = stdout_json(&ksf(&["ghz", "--trials", "50"]));
    let manifest = &doc["manifest"];
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["subcommand"], "ghz");
    assert!(manifest["started"].as_str().unwrap().ends_with('Z'));
    assert!(manifest["resolved_config"]["trials_per_context"].is_u64());
}

