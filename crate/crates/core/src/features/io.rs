//! Feature files: `<id>.csv` (header plus one row per frame) with a
//! `<id>.meta.json` sidecar describing the extraction.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExtractionConfig, FeatureSequence, FEATURE_NAMES, NUM_FEATURES};
use crate::ingest::Label;
use crate::windows::{WindowShape, WindowSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub id: String,
    pub label: Label,
    pub shape: Option<WindowShape>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub alpha: Option<f64>,
    pub hop: Option<usize>,
    pub bins: Option<usize>,
    pub rows: usize,
    pub normalized: bool,
    pub columns: Vec<String>,
}

impl FeatureMeta {
    fn of(seq: &FeatureSequence) -> Self {
        let cfg = seq.config;
        FeatureMeta {
            id: seq.id.clone(),
            label: seq.label,
            shape: cfg.map(|c| c.window.shape),
            l: cfg.map(|c| c.window.l()),
            alpha: cfg.map(|c| c.window.alpha),
            hop: cfg.map(|c| c.hop),
            bins: cfg.map(|c| c.bins),
            rows: seq.rows.len(),
            normalized: seq.normalized,
            columns: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn config(&self) -> Option<ExtractionConfig> {
        let window = WindowSpec::new(self.shape?, self.l?, self.alpha?).ok()?;
        Some(ExtractionConfig {
            window,
            hop: self.hop?,
            bins: self.bins?,
        })
    }
}

fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Writes `<dir>/<id>.csv` and its sidecar, returning the CSV path. Values are
/// written in shortest round-trip form so reading back is exact.
pub fn write_feature_file(dir: impl AsRef<Path>, seq: &FeatureSequence) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(format!("{}.csv", seq.id));
    let meta = meta_path(&csv);
    let json = serde_json::to_string_pretty(&FeatureMeta::of(seq)).expect("meta serializes");
    fs::write(&meta, json + "\n").map_err(|e| Error::io(&meta, e))?;

    let file = fs::File::create(&csv).map_err(|e| Error::io(&csv, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(&csv, e);
    writeln!(out, "{}", FEATURE_NAMES.join(",")).map_err(io)?;
    for row in &seq.rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(csv)
}

/// Reads a feature CSV and its sidecar.
pub fn read_feature_file(csv: impl AsRef<Path>) -> Result<FeatureSequence> {
    let csv = csv.as_ref();
    let meta_file = meta_path(csv);
    let meta_text = fs::read_to_string(&meta_file).map_err(|e| Error::io(&meta_file, e))?;
    let meta: FeatureMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::parse(&meta_file, e.to_string()))?;

    let text = fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let mut rows = Vec::with_capacity(meta.rows);
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; NUM_FEATURES];
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != NUM_FEATURES {
            return Err(Error::parse(csv, format!("line {}: expected {NUM_FEATURES} columns", i + 1)));
        }
        for (slot, f) in row.iter_mut().zip(fields) {
            *slot = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(csv, format!("line {}: bad number {f:?}", i + 1)))?;
        }
        rows.push(row);
    }
    if rows.len() != meta.rows {
        return Err(Error::parse(
            csv,
            format!("sidecar declares {} rows, file has {}", meta.rows, rows.len()),
        ));
    }
    Ok(FeatureSequence {
        id: meta.id.clone(),
        label: meta.label,
        config: meta.config(),
        rows,
        normalized: meta.normalized,
    })
}

/// Reads every feature file in `dir` (those with a sidecar), sorted by id.
pub fn read_feature_dir(dir: impl AsRef<Path>) -> Result<Vec<FeatureSequence>> {
    let dir = dir.as_ref();
    let mut csvs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv") && meta_path(p).exists())
        .collect();
    csvs.sort();
    let mut seqs = csvs.iter().map(read_feature_file).collect::<Result<Vec<_>>>()?;
    seqs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(seqs)
}
