//! End-to-end tests of the command-line interface: config validation, exit
//! codes, reproducible data products and manifest integrity.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_zerostat")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zerostat-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary launches")
}

#[test]
fn list_experiments_names_every_kind() {
    let out = run_cli(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "pair-corr",
        "kappa-analytic",
        "density-map",
        "polytope-density",
        "bk-count",
        "kernel-scaling",
        "norms-growth",
        "poisson-selftest",
        "min-gap",
    ] {
        assert!(text.contains(name), "missing {name} in listing");
    }
}

#[test]
fn validate_accepts_well_formed_config() {
    let dir = tmp_dir("validate-ok");
    let cfg = write_config(
        &dir,
        "ok.json",
        r#"{"experiment":"pair-corr","master_seed":1,
            "params":{"n":20,"trials":100,"rmax":2.0,"bins":10}}"#,
    );
    let out = run_cli(&["validate", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{:?}", out);
}

#[test]
fn validate_rejects_negative_rmax() {
    let dir = tmp_dir("validate-rmax");
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"experiment":"pair-corr","master_seed":1,
            "params":{"n":20,"trials":100,"rmax":-1.0,"bins":10}}"#,
    );
    let out = run_cli(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rmax"), "stderr: {err}");
}

#[test]
fn validate_rejects_non_convex_polytope() {
    let dir = tmp_dir("validate-poly");
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"experiment":"bk-count","master_seed":1,
            "params":{"polytope":[[0,0],[1,0],[2,0]],"degree":3,"trials":10}}"#,
    );
    let out = run_cli(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("polytope"), "stderr: {err}");
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let dir = tmp_dir("validate-unknown");
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"experiment":"mystery","master_seed":1,"params":{}}"#,
    );
    let out = run_cli(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn poisson_selftest_passes_and_writes_manifest() {
    let dir = tmp_dir("poisson");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"experiment":"poisson-selftest","master_seed":5,
            "params":{"trials":3000,"intensity":0.5,"rmax":2.0,"bins":8,"window_radius":4.0}}"#,
    );
    let out_dir = dir.join("out");
    let out = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    // verdict file
    let verdict = std::fs::read_to_string(out_dir.join("verdict.txt")).unwrap();
    assert!(verdict.starts_with("PASS"));
    // manifest lists every data file with a correct hash
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["verdict"], "PASS");
    let files = manifest["data_files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let name = f["name"].as_str().unwrap();
        let contents = std::fs::read_to_string(out_dir.join(name)).unwrap();
        let mut hasher = <sha2::Sha256 as sha2::Digest>::new();
        sha2::Digest::update(&mut hasher, contents.as_bytes());
        let digest: String = sha2::Digest::finalize(hasher)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        assert_eq!(digest, f["sha256"].as_str().unwrap(), "hash of {name}");
        assert_eq!(contents.len() as u64, f["bytes"].as_u64().unwrap());
    }
    // config echo preserved
    assert_eq!(manifest["config"]["experiment"], "poisson-selftest");
    assert_eq!(manifest["config"]["master_seed"], 5);
}

#[test]
fn reruns_reproduce_identical_csv_bytes() {
    let dir = tmp_dir("repro");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"experiment":"pair-corr","master_seed":41,
            "params":{"n":30,"trials":300,"rmax":2.0,"bins":10}}"#,
    );
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out_dir in [&out1, &out2] {
        let out = run_cli(&[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{:?}", out);
    }
    let a = std::fs::read(out1.join("curve.csv")).unwrap();
    let b = std::fs::read(out2.join("curve.csv")).unwrap();
    assert_eq!(a, b, "rerun produced different bytes");
    // a different seed changes the data
    let cfg2 = write_config(
        &dir,
        "cfg2.json",
        r#"{"experiment":"pair-corr","master_seed":42,
            "params":{"n":30,"trials":300,"rmax":2.0,"bins":10}}"#,
    );
    let out3 = dir.join("c");
    run_cli(&[
        "run",
        cfg2.to_str().unwrap(),
        "--out",
        out3.to_str().unwrap(),
    ]);
    let c = std::fs::read(out3.join("curve.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn bk_count_verdict_passes_on_small_triangle() {
    let dir = tmp_dir("bk");
    // legs-2 triangle: 2 * Vol = 4 torus zeros expected
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"experiment":"bk-count","master_seed":8,
            "params":{"polytope":[[0,0],[2,0],[0,2]],"degree":2,"trials":40}}"#,
    );
    let out_dir = dir.join("out");
    let out = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let counts = std::fs::read_to_string(out_dir.join("counts.csv")).unwrap();
    assert!(counts.starts_with("trial,status,torus_count,chart_count"));
    assert_eq!(counts.trim().lines().count(), 41);
    let verdict = std::fs::read_to_string(out_dir.join("verdict.txt")).unwrap();
    assert!(verdict.starts_with("PASS"), "{verdict}");
    assert!(verdict.contains("exactly 4"));
}

#[test]
fn kernel_scaling_runs_without_verdict() {
    let dir = tmp_dir("scaling");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"experiment":"kernel-scaling","master_seed":0,
            "params":{"m":1,"u":[0.5,0.0],"v":[0.0,0.3],"degrees":[25,50,100]}}"#,
    );
    let out_dir = dir.join("out");
    let out = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(!out_dir.join("verdict.txt").exists());
    let csv = std::fs::read_to_string(out_dir.join("scaling.csv")).unwrap();
    assert!(csv.starts_with("N,error,ratio_to_previous"));
    assert_eq!(csv.trim().lines().count(), 4);
}

#[test]
fn repo_sample_configs_validate() {
    // keep the shipped configs in configs/ well-formed
    let repo_configs = Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(repo_configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = run_cli(&["validate", path.to_str().unwrap()]);
            assert!(
                out.status.success(),
                "config {} failed validation: {:?}",
                path.display(),
                out
            );
            seen += 1;
        }
    }
    assert!(seen >= 10, "expected the shipped config set, saw {seen}");
}
