use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;

use tqd::config::ExperimentConfig;

fn tqd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tqd"));
    c.env_remove("TQD_JOBS");
    c
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    tqd().args(args).output().unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const SYMMETRIC_N50: &str = r#"{
    "model": "lmg",
    "schedules": [{"name": "lmg_fp_symmetric", "c": 0.5}],
    "driver_mode": "bare",
    "sizes": [50]
}"#;

#[test]
fn trace_writes_one_row_per_output_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", SYMMETRIC_N50);
    let out = dir.path().join("out.csv");
    let o = run(&["trace", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,fidelity,min_gap,adiabaticity,norm_drift,N,protocol,mode\n"));
    assert!(!text.contains('\r'));
    let rows = rows(&text);
    assert_eq!(rows.len(), 200);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "1");
    let f: f64 = last[1].parse().unwrap();
    assert!(f > 0.9 && f <= 1.0 + 1e-9);
    assert_eq!(&last[5..], ["50", "lmg_fp_symmetric", "bare"]);
}

#[test]
fn static_driver_rows_have_unit_fidelity() {
    let cfg = configs_dir().join("two_level_static_driver.json");
    let o = run(&["trace", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 100);
    for r in rows {
        let f: f64 = r[1].parse().unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn missing_model_is_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"schedules": [{"name": "lmg_fp_broken"}], "driver_mode": "bare", "sizes": [4]}"#);
    let o = run(&["trace", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("`model`"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_json_names_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", "{\n  \"model\": \"lmg\",\n  \"sizes\": [1,,2]\n}");
    let o = run(&["trace", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 3"));
}

const SWEEP: &str = r#"{
    "model": "lmg",
    "schedules": [
        {"label": "fp", "name": "lmg_fp_symmetric", "c": 0.5},
        {"label": "gaussian", "name": "matched_comparison", "kind": "gaussian", "h_start": 20.0, "h_end": 5.0}
    ],
    "driver_mode": "bare",
    "sizes": [20, 50, 100, 200],
    "integrator": {"step": 1e-3},
    "output_points": 10
}"#;

#[test]
fn sweep_has_one_row_per_size_and_protocol() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", SWEEP);
    let o = run(&["sweep", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&String::from_utf8(o.stdout).unwrap());
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[6].as_str(), r[5].as_str())).collect();
    let mut expected = Vec::new();
    for p in ["fp", "gaussian"] {
        for n in ["20", "50", "100", "200"] {
            expected.push((p, n));
        }
    }
    assert_eq!(keys, expected);
    assert!(rows.iter().all(|r| r[0] == "1"));
}

#[test]
fn sweep_marks_failed_entries() {
    // The collective driver diverges at the critical endpoint of this protocol.
    let dir = TempDir::new().unwrap();
    let text = r#"{
        "model": "lmg",
        "schedules": [
            {"name": "matched_comparison", "kind": "gaussian", "h_start": 20.0, "h_end": 5.0},
            {"name": "lmg_fp_symmetric", "c": 0.5}
        ],
        "driver_mode": "analytic_cd",
        "sizes": [10, 20],
        "on_divergence": "fail",
        "integrator": {"step": 1e-3},
        "output_points": 5
    }"#;
    let cfg = write_config(&dir, "c.json", text);
    let o = run(&["sweep", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rows = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 4);
    for r in &rows[..2] {
        assert_eq!(r[1], "error");
        assert!(r[2..5].iter().all(String::is_empty));
    }
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("N=10") && stderr.contains("N=20"), "{stderr}");
}

#[test]
fn duplicate_sizes_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &SWEEP.replace("[20, 50, 100, 200]", "[20, 50, 50]"));
    let o = run(&["sweep", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("sizes"));
}

#[test]
fn divergence_with_continue_exits_two() {
    let dir = TempDir::new().unwrap();
    let text = r#"{
        "model": "lmg",
        "schedules": [{"name": "matched_comparison", "kind": "gaussian", "h_start": 20.0, "h_end": 5.0}],
        "driver_mode": "analytic_cd",
        "sizes": [20],
        "integrator": {"step": 1e-3},
        "output_points": 20
    }"#;
    let cfg = write_config(&dir, "c.json", text);
    let o = run(&["trace", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(rows(&String::from_utf8(o.stdout).unwrap()).len(), 20);
    assert!(String::from_utf8(o.stderr).unwrap().contains("diverged"));

    let cfg = write_config(&dir, "f.json", &text.replace("\"sizes\"", "\"on_divergence\": \"fail\", \"sizes\""));
    let o = run(&["trace", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_deterministic_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &SWEEP.replace("[20, 50, 100, 200]", "[10, 20]"));
    let cfg = cfg.to_str().unwrap();
    let a = run(&["trace", "-c", cfg]).stdout;
    let b = run(&["trace", "-c", cfg]).stdout;
    let c = run(&["trace", "-c", cfg, "--jobs", "2"]).stdout;
    let d = tqd().args(["trace", "-c", cfg]).env("TQD_JOBS", "3").output().unwrap().stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a, d);
}

#[test]
fn invalid_jobs_env_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", SYMMETRIC_N50);
    let o = tqd().args(["trace", "-c", cfg.to_str().unwrap()]).env("TQD_JOBS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_path_from_config() {
    let dir = TempDir::new().unwrap();
    let dest = dir.path().join("from_config.csv");
    let text = SYMMETRIC_N50.replace("\"sizes\"", &format!("\"output\": {:?}, \"sizes\"", dest.to_str().unwrap()));
    let cfg = write_config(&dir, "c.json", &text.replace("[50]", "[4]"));
    let o = run(&["trace", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(dest).unwrap().lines().count(), 201);
}

#[test]
fn verify_passes_and_is_reproducible() {
    let a = run(&["verify", "--seed", "7", "--samples", "20"]);
    let b = run(&["verify", "--seed", "7", "--samples", "20"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains("10 of 10 checks passed"));
}

#[test]
fn verify_rejects_zero_samples() {
    let o = run(&["verify", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("samples"));
}

#[test]
fn committed_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 4);
}

fn profile() -> impl Strategy<Value = String> {
    prop_oneof![
        (-5.0f64..5.0).prop_map(|v| format!(r#"{{"constant": {v}}}"#)),
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(s, k)| format!(r#"{{"linear": {{"start": {s}, "slope": {k}}}}}"#)),
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| format!(r#"{{"gaussian": {{"a": {a}, "b": {b}}}}}"#)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(
        jx in profile(),
        jy in profile(),
        h in profile(),
        sizes in prop::collection::btree_set(1usize..300, 1..5),
        points in 2usize..500,
        step in prop::option::of(1e-6f64..1e-2),
        duration in prop::option::of(0.01f64..100.0),
        mode in prop::sample::select(vec!["bare", "analytic_cd", "engine_cd", "state_cd"]),
        on_div in prop::sample::select(vec!["fail", "continue"]),
    ) {
        let sizes: Vec<String> = sizes.iter().map(|n| n.to_string()).collect();
        let step = step.map_or(String::new(), |s| format!(r#""step": {s}"#));
        let duration = duration.map_or(String::new(), |d| format!(r#""duration": {d}, "#));
        let text = format!(
            r#"{{"model": "lmg", "schedules": [{{"label": "p", {duration}"name": "couplings", "jx": {jx}, "jy": {jy}, "h": {h}}},
                {{"name": "lmg_fp_symmetric", "c": 0.25}}],
              "driver_mode": "{mode}", "sizes": [{}], "integrator": {{{step}}}, "output_points": {points},
              "on_divergence": "{on_div}", "seed": 9}}"#,
            sizes.join(", ")
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
