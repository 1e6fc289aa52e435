//! Append-only result directory: a CSV table and a JSON summary per run.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Utc;
use thiserror::Error;

use crate::run::ResultRecord;

/// Hex digits of the configuration hash used in file names.
pub const HASH_PREFIX: usize = 16;

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError { path: path.to_path_buf(), source }
}

/// Files written for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub summary: PathBuf,
    pub table: Option<PathBuf>,
}

fn taken(dir: &Path, stem: &str) -> bool {
    dir.join(format!("{stem}.json")).exists() || dir.join(format!("{stem}.csv")).exists()
}

/// Writes `{kind}-{hash}.json` (and `.csv` when the record has a table).
/// An existing record for the same hash is never replaced; the new one
/// gets a timestamp suffix instead.
pub fn write_results(record: &ResultRecord, dir: &Path) -> Result<Written, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let base = format!("{}-{}", record.kind, &record.config_hash[..HASH_PREFIX]);
    let mut stem = base.clone();
    if taken(dir, &stem) {
        let stamp = Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
        stem = format!("{base}-{stamp}");
        let mut k = 1;
        while taken(dir, &stem) {
            stem = format!("{base}-{stamp}-{k}");
            k += 1;
        }
        log::warn!("results for {base} already exist; writing {stem}");
    }
    let create = |path: &Path, body: &str| -> Result<(), OutputError> {
        let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(io_err(path))?;
        f.write_all(body.as_bytes()).map_err(io_err(path))
    };
    let table = match &record.table {
        Some(t) => {
            let path = dir.join(format!("{stem}.csv"));
            create(&path, &t.to_csv())?;
            Some(path)
        }
        None => None,
    };
    let summary = dir.join(format!("{stem}.json"));
    let mut json = serde_json::to_string_pretty(record).expect("record serializes");
    json.push('\n');
    create(&summary, &json)?;
    Ok(Written { summary, table })
}
