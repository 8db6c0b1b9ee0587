//! CSV output of a grid run.
//!
//! * `results.csv`: one row per (cell, trial).
//! * `summary.csv`: one row per cell, means over trials.
//! * `figure5.csv`: one row per (shape, length), means over hidden sizes.
//!
//! Percentages are rounded half up to two decimals; an undefined value is
//! an empty field. `alpha` is empty for shapes that ignore it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{GridCell, GridOutput, Metrics};
use crate::windows::{WindowShape, WindowSpec};
use crate::{Error, Result};

pub const RESULTS_HEADER: &str = "shape,length_label,L,alpha,hidden,trial,sens,spec,accu";
pub const SUMMARY_HEADER: &str = "shape,length_label,L,alpha,hidden,trials,sens,spec,accu";
pub const SHAPE_MEANS_HEADER: &str = "shape,length_label,L,alpha,sens,spec,accu";

/// Rounds to `decimals` places, halves away from zero. Values within 1e-9
/// (relative) of a half are treated as exact halves, so that 89.085 stored
/// as 89.08499999... still rounds up.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let s = x.abs() * scale;
    let floor = s.floor();
    let frac = s - floor;
    let up = frac >= 0.5 || (0.5 - frac) <= 1e-9 * s.max(1.0);
    let r = if up { floor + 1.0 } else { floor };
    (r / scale).copysign(x)
}

pub fn format_metric(v: Option<f64>) -> String {
    v.map(|v| format!("{:.2}", round_half_up(v, 2))).unwrap_or_default()
}

fn window_columns(w: &WindowSpec, label: &str) -> String {
    let alpha = if w.shape == WindowShape::Gaussian {
        format!("{}", w.alpha)
    } else {
        String::new()
    };
    format!("{},{},{},{}", w.shape, label, w.l(), alpha)
}

fn metric_columns(m: &Metrics) -> String {
    format!(
        "{},{},{}",
        format_metric(m.sensitivity),
        format_metric(m.specificity),
        format_metric(m.accuracy)
    )
}

pub fn results_csv(cells: &[GridCell]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for c in cells {
        let w = window_columns(&c.window, &c.length_label);
        for (t, m) in c.trials.iter().enumerate() {
            writeln!(out, "{w},{},{t},{}", c.hidden, metric_columns(m)).unwrap();
        }
    }
    out
}

pub fn summary_csv(cells: &[GridCell]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for c in cells {
        let w = window_columns(&c.window, &c.length_label);
        writeln!(out, "{w},{},{},{}", c.hidden, c.trials.len(), metric_columns(&c.mean)).unwrap();
    }
    out
}

pub fn shape_means_csv(grid: &GridOutput) -> String {
    let mut out = format!("{SHAPE_MEANS_HEADER}\n");
    for s in &grid.shape_means {
        let w = window_columns(&s.window, &s.length_label);
        writeln!(out, "{w},{}", metric_columns(&s.mean)).unwrap();
    }
    out
}

/// Writes the three CSV files into `dir` (created if missing) and returns
/// their paths.
pub fn emit_results(dir: impl AsRef<Path>, grid: &GridOutput) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("results.csv", results_csv(&grid.cells)),
        ("summary.csv", summary_csv(&grid.cells)),
        ("figure5.csv", shape_means_csv(grid)),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        paths.push(p);
    }
    Ok(paths)
}

/// One parsed line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub shape: WindowShape,
    pub length_label: String,
    pub l: usize,
    pub hidden: usize,
    pub trials: usize,
    pub metrics: Metrics,
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SUMMARY_HEADER) {
        return Err(Error::parse(path, "unexpected header"));
    }
    let opt = |s: &str, line: usize| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|_| Error::parse(path, format!("line {line}: bad number {s:?}")))
    };
    lines
        .enumerate()
        .map(|(i, line)| {
            let n = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(Error::parse(path, format!("line {n}: expected 9 fields")));
            }
            let bad = |what: &str| Error::parse(path, format!("line {n}: bad {what}"));
            Ok(SummaryRow {
                shape: f[0].parse().map_err(|_| bad("shape"))?,
                length_label: f[1].to_string(),
                l: f[2].parse().map_err(|_| bad("L"))?,
                hidden: f[4].parse().map_err(|_| bad("hidden"))?,
                trials: f[5].parse().map_err(|_| bad("trials"))?,
                metrics: Metrics {
                    sensitivity: opt(f[6], n)?,
                    specificity: opt(f[7], n)?,
                    accuracy: opt(f[8], n)?,
                },
            })
        })
        .collect()
}
