//! Declarative run configuration: one JSON file fully describes an
//! experiment, and the manifest echoes it back.

use serde_json::Value;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    PairCorr,
    KappaAnalytic,
    DensityMap,
    PolytopeDensity,
    BkCount,
    KernelScaling,
    NormsGrowth,
    PoissonSelftest,
    /// Exploratory: minimum root gap against degree. No acceptance bound is
    /// attached to this experiment.
    MinGap,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::PairCorr,
        ExperimentKind::KappaAnalytic,
        ExperimentKind::DensityMap,
        ExperimentKind::PolytopeDensity,
        ExperimentKind::BkCount,
        ExperimentKind::KernelScaling,
        ExperimentKind::NormsGrowth,
        ExperimentKind::PoissonSelftest,
        ExperimentKind::MinGap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::PairCorr => "pair-corr",
            ExperimentKind::KappaAnalytic => "kappa-analytic",
            ExperimentKind::DensityMap => "density-map",
            ExperimentKind::PolytopeDensity => "polytope-density",
            ExperimentKind::BkCount => "bk-count",
            ExperimentKind::KernelScaling => "kernel-scaling",
            ExperimentKind::NormsGrowth => "norms-growth",
            ExperimentKind::PoissonSelftest => "poisson-selftest",
            ExperimentKind::MinGap => "min-gap",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentKind::PairCorr => {
                "rescaled pair correlation of zeros of the full ensemble (m = 1)"
            }
            ExperimentKind::KappaAnalytic => {
                "universal two-point function from the conditional Gaussian field"
            }
            ExperimentKind::DensityMap => "Monte Carlo zero density over a chart grid",
            ExperimentKind::PolytopeDensity => {
                "zero density of a polytope-constrained ensemble with region labels"
            }
            ExperimentKind::BkCount => {
                "simultaneous zero counts of bivariate pairs against the lattice volume"
            }
            ExperimentKind::KernelScaling => {
                "deviation of the rescaled kernel from its translation-invariant limit"
            }
            ExperimentKind::NormsGrowth => "L^p norm growth of normalized sections",
            ExperimentKind::PoissonSelftest => {
                "estimator self-test on synthetic Poisson configurations"
            }
            ExperimentKind::MinGap => {
                "exploratory: minimum root separation against degree (no bound attached)"
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub params: Value,
    /// Full original document, echoed into the manifest.
    pub raw: Value,
}

impl ExperimentConfig {
    pub fn from_json(raw: Value) -> Result<Self, Vec<String>> {
        let mut violations = Vec::new();
        let kind = match raw.get("experiment").and_then(Value::as_str) {
            Some(name) => match ExperimentKind::from_name(name) {
                Some(k) => Some(k),
                None => {
                    violations.push(format!(
                        "unknown experiment '{name}'; see list-experiments"
                    ));
                    None
                }
            },
            None => {
                violations.push("missing string field 'experiment'".into());
                None
            }
        };
        let master_seed = match raw.get("master_seed").and_then(Value::as_u64) {
            Some(s) => Some(s),
            None => {
                violations.push("missing unsigned integer field 'master_seed'".into());
                None
            }
        };
        let output_dir = raw
            .get("output_dir")
            .and_then(Value::as_str)
            .map(PathBuf::from);
        let params = raw.get("params").cloned().unwrap_or(Value::Null);
        if !params.is_object() {
            violations.push("missing object field 'params'".into());
        }
        if let (Some(kind), Some(seed), true) = (kind, master_seed, params.is_object()) {
            let config = ExperimentConfig {
                kind,
                master_seed: seed,
                output_dir,
                params,
                raw,
            };
            let schema_violations = config.validate_params();
            if schema_violations.is_empty() {
                Ok(config)
            } else {
                Err(schema_violations)
            }
        } else {
            Err(violations)
        }
    }

    /// Schema validation of the per-experiment parameters; pure, no
    /// computation is started.
    pub fn validate_params(&self) -> Vec<String> {
        let mut v = Vec::new();
        let p = &self.params;
        let need_u64 = |v: &mut Vec<String>, key: &str, lo: u64, hi: u64| -> Option<u64> {
            match p.get(key).and_then(Value::as_u64) {
                Some(x) if (lo..=hi).contains(&x) => Some(x),
                Some(x) => {
                    v.push(format!("{key} = {x} outside [{lo}, {hi}]"));
                    None
                }
                None => {
                    v.push(format!("missing unsigned integer '{key}'"));
                    None
                }
            }
        };
        let need_f64 = |v: &mut Vec<String>, key: &str, lo: f64, hi: f64| -> Option<f64> {
            match p.get(key).and_then(Value::as_f64) {
                Some(x) if x >= lo && x <= hi => Some(x),
                Some(x) => {
                    v.push(format!("{key} = {x} outside [{lo}, {hi}]"));
                    None
                }
                None => {
                    v.push(format!("missing number '{key}'"));
                    None
                }
            }
        };
        let need_polytope = |v: &mut Vec<String>, key: &str| {
            match p.get(key) {
                Some(val) => {
                    if let Err(e) = zerostat_core::polytopes::parse_polytope(val) {
                        v.push(format!("{key}: {e}"));
                    }
                }
                None => v.push(format!("missing polytope literal '{key}'")),
            }
        };
        let need_degree_list = |v: &mut Vec<String>, key: &str, lo: u64, hi: u64| {
            match p.get(key).and_then(Value::as_array) {
                Some(arr) if !arr.is_empty() => {
                    let mut prev = 0u64;
                    for x in arr {
                        match x.as_u64() {
                            Some(n) if (lo..=hi).contains(&n) && n > prev => prev = n,
                            Some(n) => {
                                v.push(format!(
                                    "{key}: entry {n} not strictly increasing within [{lo}, {hi}]"
                                ));
                                return;
                            }
                            None => {
                                v.push(format!("{key}: non-integer entry"));
                                return;
                            }
                        }
                    }
                }
                _ => v.push(format!("missing non-empty integer array '{key}'")),
            }
        };

        match self.kind {
            ExperimentKind::PairCorr => {
                need_u64(&mut v, "n", 2, 1024);
                need_u64(&mut v, "trials", 2, 10_000_000);
                let rmax = need_f64(&mut v, "rmax", 1e-6, 5.0);
                need_u64(&mut v, "bins", 1, 100_000);
                if let Some(w) = p.get("window_radius").and_then(Value::as_f64) {
                    if let Some(r) = rmax {
                        if w <= r {
                            v.push(format!("window_radius = {w} must exceed rmax = {r}"));
                        }
                    }
                }
            }
            ExperimentKind::KappaAnalytic => {
                need_u64(&mut v, "m", 1, 3);
                need_u64(&mut v, "mc_samples", 0, 1_000_000_000);
                match p.get("r_values").and_then(Value::as_array) {
                    Some(arr) if !arr.is_empty() => {
                        for x in arr {
                            match x.as_f64() {
                                Some(r) if r >= 1e-3 => {}
                                _ => {
                                    v.push("r_values entries must be numbers >= 1e-3".into());
                                    break;
                                }
                            }
                        }
                    }
                    _ => v.push("missing non-empty array 'r_values'".into()),
                }
            }
            ExperimentKind::DensityMap => {
                need_u64(&mut v, "n", 1, 1024);
                need_u64(&mut v, "trials", 1, 10_000_000);
                validate_grid(&mut v, p.get("grid"));
            }
            ExperimentKind::PolytopeDensity => {
                need_polytope(&mut v, "polytope");
                need_u64(&mut v, "degree_scale", 1, 64);
                need_u64(&mut v, "dilation", 1, 512);
                need_u64(&mut v, "trials", 1, 10_000_000);
                validate_grid(&mut v, p.get("grid"));
            }
            ExperimentKind::BkCount => {
                need_polytope(&mut v, "polytope");
                need_u64(&mut v, "degree", 1, 12);
                need_u64(&mut v, "trials", 1, 1_000_000);
            }
            ExperimentKind::KernelScaling => {
                need_u64(&mut v, "m", 1, 3);
                need_degree_list(&mut v, "degrees", 1, 100_000);
                for key in ["u", "v"] {
                    match p.get(key).and_then(Value::as_array) {
                        Some(arr) if arr.len() % 2 == 0 && !arr.is_empty() => {
                            if arr.iter().any(|x| x.as_f64().is_none()) {
                                v.push(format!("{key}: non-numeric entry"));
                            }
                        }
                        _ => v.push(format!(
                            "missing '{key}' as flat [re, im, ...] with one pair per coordinate"
                        )),
                    }
                }
            }
            ExperimentKind::NormsGrowth => {
                need_degree_list(&mut v, "degrees", 16, 1024);
                need_u64(&mut v, "trials", 1, 1_000_000);
                match p.get("p") {
                    Some(Value::String(s)) if s == "inf" => {}
                    Some(Value::Number(x)) if x.as_f64().is_some_and(|p| p >= 2.0) => {}
                    _ => v.push("'p' must be a number >= 2 or the string \"inf\"".into()),
                }
            }
            ExperimentKind::PoissonSelftest => {
                need_u64(&mut v, "trials", 2, 10_000_000);
                need_f64(&mut v, "intensity", 1e-6, 1e6);
                need_f64(&mut v, "rmax", 1e-6, 100.0);
                need_u64(&mut v, "bins", 1, 100_000);
            }
            ExperimentKind::MinGap => {
                need_degree_list(&mut v, "degrees", 2, 1024);
                need_u64(&mut v, "trials", 1, 1_000_000);
            }
        }
        v
    }
}

fn validate_grid(v: &mut Vec<String>, grid: Option<&Value>) {
    let Some(g) = grid else {
        v.push("missing object 'grid'".into());
        return;
    };
    let nums = ["x_min", "x_max", "y_min", "y_max"];
    for key in nums {
        if g.get(key).and_then(Value::as_f64).is_none() {
            v.push(format!("grid.{key} missing or not a number"));
        }
    }
    for key in ["nx", "ny"] {
        match g.get(key).and_then(Value::as_u64) {
            Some(n) if n >= 1 && n <= 4096 => {}
            _ => v.push(format!("grid.{key} missing or outside [1, 4096]")),
        }
    }
    if let (Some(a), Some(b)) = (
        g.get("x_min").and_then(Value::as_f64),
        g.get("x_max").and_then(Value::as_f64),
    ) {
        if a >= b {
            v.push("grid.x_min must be below grid.x_max".into());
        }
    }
    if let (Some(a), Some(b)) = (
        g.get("y_min").and_then(Value::as_f64),
        g.get("y_max").and_then(Value::as_f64),
    ) {
        if a >= b {
            v.push("grid.y_min must be below grid.y_max".into());
        }
    }
}

pub fn parse_grid(g: &Value) -> zerostat_core::statistics::GridSpec {
    zerostat_core::statistics::GridSpec {
        x_min: g["x_min"].as_f64().unwrap(),
        x_max: g["x_max"].as_f64().unwrap(),
        y_min: g["y_min"].as_f64().unwrap(),
        y_max: g["y_max"].as_f64().unwrap(),
        nx: g["nx"].as_u64().unwrap() as usize,
        ny: g["ny"].as_u64().unwrap() as usize,
    }
}
