use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolved parameters of one run; the hash covers everything that can
/// change the numbers, so thread count and output location are left out.
pub struct RunInfo {
    pub command: &'static str,
    pub config: Value,
    pub hash: String,
}

impl RunInfo {
    pub fn new(command: &'static str, config: Value) -> Self {
        let canonical = serde_json::to_string(&config).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hash = digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        RunInfo { command, config, hash }
    }

    fn header(&self) -> Value {
        json!({
            "tool": "kpotts",
            "version": VERSION,
            "command": self.command,
            "config_hash": format!("sha256:{}", self.hash),
            "config": self.config,
        })
    }
}

fn generated() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// 12 significant digits.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.11e}")
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub struct Writer {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn json(&mut self, info: &RunInfo, name: &str, result: Value) -> Result<(), CliError> {
        let mut header = info.header();
        header["generated_unix"] = json!(generated());
        let doc = json!({ "header": header, "result": result });
        let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
        self.write(name, &text)
    }

    pub fn csv(&mut self, info: &RunInfo, name: &str, table: &Table) -> Result<(), CliError> {
        let mut out = String::new();
        let _ = writeln!(out, "# kpotts {VERSION} {}", info.command);
        let _ = writeln!(out, "# config_hash: sha256:{}", info.hash);
        let _ = writeln!(out, "# config: {}", info.config);
        let _ = writeln!(out, "# generated_unix: {}", generated());
        let _ = writeln!(out, "{}", table.columns.join(","));
        for row in &table.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        self.write(name, &out)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}
