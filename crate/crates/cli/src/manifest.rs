//! Run manifest: config echo, environment, timing, failure accounting and a
//! content hash for every data file written.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn hash_contents(contents: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(contents.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn manifest_json(
    config_echo: &Value,
    files: &[FileRecord],
    wall_seconds: f64,
    trials_requested: u64,
    trials_failed: u64,
    counting_domain: &str,
    verdict: Option<&str>,
) -> Value {
    json!({
        "config": config_echo,
        "software": {
            "name": "zerostat",
            "version": env!("CARGO_PKG_VERSION"),
        },
        "wall_time_seconds": wall_seconds,
        "trials_requested": trials_requested,
        "trials_failed": trials_failed,
        "zero_counting_domain": counting_domain,
        "data_files": files.iter().map(|f| json!({
            "name": f.name,
            "sha256": f.sha256,
            "bytes": f.bytes,
        })).collect::<Vec<_>>(),
        "verdict": verdict,
    })
}
