//! Run manifests: everything needed to repeat a command exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;

/// The command a manifest records, with every input that affects outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Train {
        steps: u64,
        epsilon: f64,
        out: PathBuf,
    },
    Eval {
        policy: String,
        qtable: Option<PathBuf>,
        episodes: usize,
        out_dir: PathBuf,
        trace: bool,
    },
    Compare {
        qtable: PathBuf,
        episodes: usize,
        out_dir: PathBuf,
        trace: bool,
    },
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Train { .. } => "train",
            Job::Eval { .. } => "eval",
            Job::Compare { .. } => "compare",
        }
    }

    /// Same job, writing its artifacts under `dir` instead.
    pub fn relocated(&self, dir: &Path) -> Job {
        let mut job = self.clone();
        match &mut job {
            Job::Train { out, .. } => {
                let name = out.file_name().map(PathBuf::from).unwrap_or_else(|| "qtable.json".into());
                *out = dir.join(name);
            }
            Job::Eval { out_dir, .. } | Job::Compare { out_dir, .. } => *out_dir = dir.to_path_buf(),
        }
        job
    }

    /// Where this job's manifest goes.
    pub fn manifest_path(&self) -> PathBuf {
        match self {
            Job::Train { out, .. } => {
                let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("qtable");
                out.with_file_name(format!("{stem}.manifest.json"))
            }
            Job::Eval { out_dir, .. } | Job::Compare { out_dir, .. } => out_dir.join("manifest.json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub strict: bool,
    pub job: Job,
    /// Scenario name or path as given on the command line.
    pub scenario_ref: String,
    /// Fingerprint of the resolved deployment.
    pub deployment_hash: String,
    /// The scenario document itself, so a replay does not depend on the
    /// file still existing or being unchanged.
    pub scenario: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let m: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        if m.manifest_version != MANIFEST_VERSION {
            anyhow::bail!(beamho_core::Error::SchemaVersion {
                found: m.manifest_version,
                supported: MANIFEST_VERSION,
            });
        }
        Ok(m)
    }
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}
