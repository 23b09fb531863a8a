//! Report plumbing shared by the commands: deterministic CSV/JSON writers,
//! the run manifest, and loaders for generated-corpus directory layouts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use shredkit::corpus::TOKEN_FILE_SUFFIX;
use shredkit::stylelm::ConfigId;
use shredkit::tokens::{parse_stream, TokenStream};

use crate::CmdError;

/// Fixed-precision rendering used for every CSV number, so reruns are
/// byte-identical.
pub fn fmt_float(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value:.6}")
    }
}

pub fn ensure_dir(path: &Path) -> Result<(), CmdError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CmdError::Io(format!("cannot create {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    std::fs::write(path, text)
        .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CmdError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| CmdError::Io(e.to_string()))?;
    for row in rows {
        writer
            .write_record(&row)
            .map_err(|e| CmdError::Io(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CmdError::Io(e.to_string()))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CmdError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::Io(format!("serialize {}: {e}", path.display())))?;
    write_text(path, &(text + "\n"))
}

/// Snapshot of one command invocation; every output directory gets exactly
/// one. The timestamp is informational and excluded from reproducibility
/// comparisons.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub config: Value,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, inputs: &[&Path], config: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CmdError> {
        write_json(&out_dir.join("run_manifest.json"), self)
    }
}

/// Load a generated-corpus tree laid out as
/// `<root>/<artist>/<CONFIG>/*.tokens.txt` with CONFIG one of M-FP, M-EP,
/// S-FP, S-EP.
pub fn load_generated(
    root: &Path,
) -> Result<BTreeMap<(String, ConfigId), Vec<TokenStream>>, CmdError> {
    if !root.is_dir() {
        return Err(CmdError::Io(format!(
            "{} is not a directory",
            root.display()
        )));
    }
    let mut corpora: BTreeMap<(String, ConfigId), Vec<TokenStream>> = BTreeMap::new();
    let mut artist_dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| CmdError::Io(format!("read {}: {e}", root.display())))?
        .filter_map(Result::ok)
        .map(|entry| entry.path())
        .filter(|path| path.is_dir())
        .collect();
    artist_dirs.sort();

    for artist_dir in artist_dirs {
        let artist = artist_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for config in ConfigId::ALL {
            let config_dir = artist_dir.join(config.to_string());
            if !config_dir.is_dir() {
                continue;
            }
            let mut files: Vec<PathBuf> = std::fs::read_dir(&config_dir)
                .map_err(|e| CmdError::Io(format!("read {}: {e}", config_dir.display())))?
                .filter_map(Result::ok)
                .map(|entry| entry.path())
                .filter(|path| {
                    path.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.ends_with(TOKEN_FILE_SUFFIX))
                })
                .collect();
            files.sort();
            let mut streams = Vec::with_capacity(files.len());
            for file in files {
                let text = std::fs::read_to_string(&file)
                    .map_err(|e| CmdError::Io(format!("read {}: {e}", file.display())))?;
                streams.push(parse_stream(&text).stream);
            }
            if !streams.is_empty() {
                corpora.insert((artist.clone(), config), streams);
            }
        }
    }
    Ok(corpora)
}
