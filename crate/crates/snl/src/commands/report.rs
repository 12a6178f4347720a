//! Merge the CSV outputs of finished runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::Manifest;
use crate::error::{Error, Result};
use crate::output::{Outcome, Table};

fn find_manifests(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            find_manifests(&path, out)?;
        } else if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".manifest.toml")) {
            out.push(path);
        }
    }
    Ok(())
}

/// One merged table per output file name, with `run`, `scenario` and
/// `seed` columns prepended; a summary of all runs; and a long-format table
/// (`run, ..., column, value`) for plotting.
pub fn report(dir: &Path) -> Result<Outcome> {
    let mut manifests = Vec::new();
    find_manifests(dir, &mut manifests)?;
    manifests.sort();
    if manifests.is_empty() {
        return Err(Error::Report(format!("no run manifests found in {}", dir.display())));
    }
    let mut summary = Table::new("", &["run", "scenario", "command", "seed", "file", "rows"]);
    let mut long = Table::new("long", &["run", "scenario", "command", "seed", "file", "row", "column", "value"]);
    let mut merged: BTreeMap<String, Table> = BTreeMap::new();
    for path in &manifests {
        let m = Manifest::load(path)?;
        let parent = path.parent().expect("file has a parent");
        let run = parent.strip_prefix(dir).unwrap_or(parent).display().to_string();
        let run = if run.is_empty() { ".".to_string() } else { run };
        let seed = m.config.sde.seed.to_string();
        let scenario = m.config.scenario.clone();
        for file in m.manifest.outputs.iter().filter(|f| f.ends_with(".csv")) {
            let csv = parent.join(file);
            if !csv.exists() {
                return Err(Error::Report(format!("{} lists {file}, which is missing", path.display())));
            }
            let t = Table::read(&csv).map_err(|e| e.context(csv.display().to_string()))?;
            summary.push(vec![
                run.clone(),
                scenario.clone(),
                m.manifest.command.clone(),
                seed.clone(),
                file.clone(),
                t.rows.len().to_string(),
            ]);
            let stem = file.trim_end_matches(".csv").to_string();
            let entry = merged.entry(stem.clone()).or_insert_with(|| {
                let mut headers = vec!["run".to_string(), "scenario".into(), "seed".into()];
                headers.extend(t.headers.iter().cloned());
                Table { name: stem.clone(), headers, rows: Vec::new() }
            });
            if entry.headers[3..] != t.headers[..] {
                return Err(Error::Report(format!("{}: columns differ from earlier runs of {file}", csv.display())));
            }
            for (i, row) in t.rows.iter().enumerate() {
                let mut r = vec![run.clone(), scenario.clone(), seed.clone()];
                r.extend(row.iter().cloned());
                entry.push(r);
                for (h, v) in t.headers.iter().zip(row) {
                    long.push(vec![
                        run.clone(),
                        scenario.clone(),
                        m.manifest.command.clone(),
                        seed.clone(),
                        file.clone(),
                        i.to_string(),
                        h.clone(),
                        v.clone(),
                    ]);
                }
            }
        }
    }
    let lines = vec![format!("merged {} manifest(s) into {} table(s)", manifests.len(), merged.len())];
    let mut tables = vec![summary, long];
    tables.extend(merged.into_values());
    Ok(Outcome { tables, summary: lines, ..Default::default() })
}
