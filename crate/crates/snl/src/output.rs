//! CSV tables and run manifests.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{ExperimentConfig, Manifest, ManifestInfo};
use crate::error::{Error, Result};

/// Shortest round-trip formatting, so CSV bodies are reproducible.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem suffix: `<command>.csv` when empty, else `<command>_<name>.csv`.
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.into(), headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, command: &str) -> String {
        if self.name.is_empty() { format!("{command}.csv") } else { format!("{command}_{}.csv", self.name) }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Report(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.iter().map(String::from).collect();
        let rows = r.records().map(|rec| rec.map(|r| r.iter().map(String::from).collect())).collect::<Result<_, _>>()?;
        Ok(Self { name: String::new(), headers, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Binary artifacts (`.gfd` dumps) by file name.
    pub files: Vec<(String, Vec<u8>)>,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

/// Write tables, files and `<command>.manifest.toml` into `dir`.
/// Without a config (the `report` command) no manifest is written.
pub fn write_outcome(dir: &Path, command: &str, cfg: Option<&ExperimentConfig>, outcome: &Outcome) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for t in &outcome.tables {
        let name = t.file_name(command);
        let path = dir.join(&name);
        std::fs::write(&path, t.to_csv()?).map_err(|e| Error::io(&path, e))?;
        written.push(name);
    }
    for (name, bytes) in &outcome.files {
        crate::gfd::write(&dir.join(name), bytes)?;
        written.push(name.clone());
    }
    let Some(cfg) = cfg else { return Ok(written) };
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = Manifest {
        manifest: ManifestInfo {
            tool: "snl".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            created_unix,
            outputs: written.clone(),
        },
        config: cfg.clone(),
    };
    let path = dir.join(format!("{command}.manifest.toml"));
    std::fs::write(&path, manifest.to_toml()?).map_err(|e| Error::io(&path, e))?;
    Ok(written)
}
