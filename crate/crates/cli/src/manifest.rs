//! Run manifests: what was run, with which flags and seed, over which
//! inputs, producing which outputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use policy_overlap::pipeline::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<FileDigest>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn digest_file(path: &Path) -> CliResult<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input {
        context: path.display().to_string(),
        source: policy_overlap::Error::Invalid(e.to_string()),
    })?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Accumulates inputs and outputs while a command runs.
pub struct RunRecord {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunRecord {
    pub fn new(command: impl Into<String>) -> Self {
        RunRecord {
            command: command.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }
}

pub fn write_manifest(
    out_dir: &Path,
    name: &str,
    record: &RunRecord,
    args: &[String],
    seed: u64,
    config: Option<&Path>,
) -> CliResult<PathBuf> {
    let digests = |paths: &[PathBuf]| paths.iter().map(|p| digest_file(p)).collect::<CliResult<Vec<_>>>();
    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: record.command.clone(),
        args: args.to_vec(),
        seed,
        config: config.map(digest_file).transpose()?,
        inputs: digests(&record.inputs)?,
        outputs: digests(&record.outputs)?,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let path = out_dir.join(format!("manifest_{name}.json"));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Input {
        context: path.display().to_string(),
        source: policy_overlap::Error::Invalid(e.to_string()),
    })?;
    Ok(path)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Fails when `path` is missing, or when a manifest in `out_dir` recorded it
/// as an output with a different digest than it has now.
pub fn require_artifact(path: &Path, out_dir: &Path, hint: &str) -> CliResult<()> {
    if !path.is_file() {
        return Err(CliError::MissingArtifact {
            path: path.to_path_buf(),
            hint: hint.to_string(),
        });
    }
    let Ok(entries) = std::fs::read_dir(out_dir) else {
        return Ok(());
    };
    let mut manifests: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("manifest_") && n.ends_with(".json"))
        })
        .collect();
    manifests.sort();
    let current = digest_file(path)?;
    for m in manifests {
        let Ok(text) = std::fs::read_to_string(&m) else { continue };
        let Ok(manifest) = serde_json::from_str::<Manifest>(&text) else { continue };
        for out in &manifest.outputs {
            if same_file(Path::new(&out.path), path) && out.sha256 != current.sha256 {
                return Err(CliError::StaleArtifact {
                    path: path.to_path_buf(),
                    producer: manifest.command.clone(),
                    hint: format!("re-run `policy-overlap {}` to regenerate it", manifest.command),
                });
            }
        }
    }
    Ok(())
}
