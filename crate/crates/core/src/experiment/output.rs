//! CSV and JSON writers sharing one header block.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, ExperimentError};

pub const TOOL_NAME: &str = "stl";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub seed: u64,
    /// SHA-256 of the tool name, version and serialized config.
    pub content_hash: String,
}

impl Header {
    pub fn new(config: &ExperimentConfig) -> Self {
        let inputs = serde_json::json!({
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "config": config,
        });
        let bytes = serde_json::to_vec(&inputs).expect("config serializes");
        Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            config: config.clone(),
            seed: config.seed,
            content_hash: format!("sha256:{}", hex::encode(Sha256::digest(&bytes))),
        }
    }

    fn comment_block(&self) -> String {
        let config = serde_json::to_string(&self.config).expect("config serializes");
        format!(
            "# tool: {}\n# version: {}\n# config: {config}\n# seed: {}\n# content_hash: {}\n",
            self.tool, self.version, self.seed, self.content_hash
        )
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty for `None`, so missing predictions are never mistaken for zero.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Column names plus pre-formatted rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn io_error(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn prepare_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// Renders the header block followed by the table.
pub fn render_csv(header: &Header, table: &Table) -> Vec<u8> {
    let mut out = header.comment_block().into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    out.extend(w.into_inner().expect("in-memory flush"));
    out
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &Header,
    table: &Table,
) -> Result<PathBuf, ExperimentError> {
    let path = dir.join(name);
    fs::write(&path, render_csv(header, table)).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    header: &Header,
    report: &T,
) -> Result<PathBuf, ExperimentError> {
    let path = dir.join(name);
    let doc = serde_json::json!({ "header": header, "report": report });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    Ok(path)
}
