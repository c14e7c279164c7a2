//! Command-line front end: named, reproducible experiments on zeros of
//! random polynomials. A run is fully described by one JSON config; the
//! output directory receives the data products, a manifest with content
//! hashes, and a verdict file when the experiment carries a built-in bound.
//!
//! Exit codes: 0 success (and PASS where a verdict exists), 2 config error,
//! 3 solver-failure budget exceeded, 4 verdict FAIL.

mod config;
mod experiments;
mod manifest;

use config::{ExperimentConfig, ExperimentKind};
use experiments::{run, RunError, RunOutput};
use manifest::{hash_contents, manifest_json, FileRecord};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const USAGE: &str = "\
zerostat — Monte Carlo experiments on zeros of random polynomials

USAGE:
    zerostat run <config.json> [--out DIR] [--workers K]
    zerostat validate <config.json>
    zerostat list-experiments

A config file looks like:
    {
      \"experiment\": \"pair-corr\",
      \"master_seed\": 7,
      \"output_dir\": \"out/pair-corr\",
      \"params\": { \"n\": 100, \"trials\": 20000, \"rmax\": 3.5, \"bins\": 70 }
    }
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") => cmd_run(&args[1..]),
        Some("validate") => cmd_validate(&args[1..]),
        Some("list-experiments") => {
            for kind in ExperimentKind::ALL {
                println!("{:<18} {}", kind.name(), kind.description());
            }
            ExitCode::SUCCESS
        }
        Some("--help") | Some("-h") | None => {
            print!("{USAGE}");
            ExitCode::SUCCESS
        }
        Some(other) => {
            eprintln!("unknown command '{other}'\n\n{USAGE}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &str) -> Result<ExperimentConfig, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read {path}: {e}")])?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| vec![format!("invalid JSON: {e}")])?;
    ExperimentConfig::from_json(raw)
}

fn cmd_validate(args: &[String]) -> ExitCode {
    let Some(path) = args.first() else {
        eprintln!("validate needs a config path\n\n{USAGE}");
        return ExitCode::from(2);
    };
    match load_config(path) {
        Ok(config) => {
            println!("ok: {} experiment config is valid", config.kind);
            ExitCode::SUCCESS
        }
        Err(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(2)
        }
    }
}

fn cmd_run(args: &[String]) -> ExitCode {
    let mut config_path: Option<&str> = None;
    let mut out_override: Option<PathBuf> = None;
    let mut workers: Option<usize> = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => match it.next() {
                Some(dir) => out_override = Some(PathBuf::from(dir)),
                None => {
                    eprintln!("--out needs a directory");
                    return ExitCode::from(2);
                }
            },
            "--workers" => match it.next().and_then(|w| w.parse::<usize>().ok()) {
                Some(k) if k >= 1 => workers = Some(k),
                _ => {
                    eprintln!("--workers needs a positive integer");
                    return ExitCode::from(2);
                }
            },
            other if config_path.is_none() => config_path = Some(other),
            other => {
                eprintln!("unexpected argument '{other}'\n\n{USAGE}");
                return ExitCode::from(2);
            }
        }
    }
    let Some(path) = config_path else {
        eprintln!("run needs a config path\n\n{USAGE}");
        return ExitCode::from(2);
    };
    let config = match load_config(path) {
        Ok(c) => c,
        Err(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            return ExitCode::from(2);
        }
    };
    if let Some(k) = workers {
        // ignore the error if a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let out_dir = out_override
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("out/{}", config.kind.name())));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("cannot create output directory {}: {e}", out_dir.display());
        return ExitCode::from(2);
    }

    let start = Instant::now();
    let outcome = run(&config);
    let wall = start.elapsed().as_secs_f64();
    match outcome {
        Ok(output) => {
            let code = if let Some(v) = &output.verdict {
                if v.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(4)
                }
            } else {
                ExitCode::SUCCESS
            };
            if write_outputs(&config, &out_dir, &output, wall).is_err() {
                return ExitCode::from(2);
            }
            match &output.verdict {
                Some(v) if v.pass => println!("PASS: {}", v.details),
                Some(v) => println!("FAIL: {}", v.details),
                None => println!(
                    "done: {} data file(s) in {}",
                    output.files.len(),
                    out_dir.display()
                ),
            }
            code
        }
        Err(RunError::FailureBudget(msg, partial)) => {
            eprintln!("solver-failure budget exceeded: {msg}");
            let _ = write_outputs(&config, &out_dir, &partial, wall);
            ExitCode::from(3)
        }
        Err(RunError::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_outputs(
    config: &ExperimentConfig,
    out_dir: &Path,
    output: &RunOutput,
    wall: f64,
) -> std::io::Result<()> {
    let mut records = Vec::new();
    for (name, contents) in &output.files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)?;
        records.push(FileRecord {
            name: name.clone(),
            sha256: hash_contents(contents),
            bytes: contents.len(),
        });
    }
    let verdict_str = output
        .verdict
        .as_ref()
        .map(|v| if v.pass { "PASS" } else { "FAIL" });
    if let Some(v) = &output.verdict {
        let body = format!(
            "{}\n{}\n",
            if v.pass { "PASS" } else { "FAIL" },
            v.details
        );
        std::fs::write(out_dir.join("verdict.txt"), body)?;
    }
    let manifest = manifest_json(
        &config.raw,
        &records,
        wall,
        output.trials_requested,
        output.trials_failed,
        output.counting_domain,
        verdict_str,
    );
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(())
}
