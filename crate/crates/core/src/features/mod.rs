//! Ten statistical features per frame, assembled into per-signal sequences
//! and z-scored column by column.

mod io;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label;
use crate::windows::{Frame, WindowSpec};

pub use io::{read_feature_dir, read_feature_file, write_feature_file, FeatureMeta};
pub use stats::{
    frame_kurtosis, frame_mean, frame_median, frame_mode, frame_quantile_range, frame_shannon_energy,
    frame_shannon_entropy, frame_skewness, frame_variance, frame_zcr, DEFAULT_BINS,
};

pub const NUM_FEATURES: usize = 10;

/// Column names in storage order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "mean",
    "median",
    "mode",
    "variance",
    "skewness",
    "kurtosis",
    "shannon_energy",
    "shannon_entropy",
    "zcr",
    "quantile_range",
];

/// Columns that are not positively homogeneous in the signal amplitude.
pub const NON_HOMOGENEOUS_COLUMNS: [usize; 2] = [6, 7];

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("cannot compute features of an empty frame")]
    EmptyFrame,
    #[error("no frames to extract features from")]
    NoFrames,
    #[error("normalization needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("feature rows must have {NUM_FEATURES} columns, got {0}")]
    BadWidth(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub shannon_energy: f64,
    pub shannon_entropy: f64,
    pub zcr: f64,
    pub quantile_range: f64,
}

impl FeatureVector {
    pub fn from_frame(frame: &[f64], bins: usize) -> Result<Self, FeatureError> {
        if frame.is_empty() {
            return Err(FeatureError::EmptyFrame);
        }
        Ok(FeatureVector {
            mean: frame_mean(frame),
            median: frame_median(frame),
            mode: frame_mode(frame, bins),
            variance: frame_variance(frame),
            skewness: frame_skewness(frame),
            kurtosis: frame_kurtosis(frame),
            shannon_energy: frame_shannon_energy(frame),
            shannon_entropy: frame_shannon_entropy(frame, bins),
            zcr: frame_zcr(frame),
            quantile_range: frame_quantile_range(frame),
        })
    }

    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.mean,
            self.median,
            self.mode,
            self.variance,
            self.skewness,
            self.kurtosis,
            self.shannon_energy,
            self.shannon_entropy,
            self.zcr,
            self.quantile_range,
        ]
    }
}

/// Extraction settings recorded with a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub window: WindowSpec,
    pub hop: usize,
    pub bins: usize,
}

/// `T x 10` feature matrix of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub id: String,
    pub label: Label,
    pub config: Option<ExtractionConfig>,
    pub rows: Vec<[f64; NUM_FEATURES]>,
    pub normalized: bool,
}

impl FeatureSequence {
    pub fn from_rows(id: impl Into<String>, label: Label, rows: Vec<[f64; NUM_FEATURES]>) -> Self {
        FeatureSequence {
            id: id.into(),
            label,
            config: None,
            rows,
            normalized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[c]).collect()
    }
}

/// One row per frame, in frame order.
pub fn extract_sequence(frames: &[Frame], bins: usize) -> Result<Vec<[f64; NUM_FEATURES]>, FeatureError> {
    if frames.is_empty() {
        return Err(FeatureError::NoFrames);
    }
    frames
        .iter()
        .map(|f| FeatureVector::from_frame(&f.values, bins).map(|v| v.to_array()))
        .collect()
}

/// Frames `samples` with `config` and extracts the raw (unnormalized)
/// sequence.
pub fn extract_signal(
    id: impl Into<String>,
    label: Label,
    samples: &[f64],
    config: ExtractionConfig,
) -> crate::Result<FeatureSequence> {
    let frames = crate::windows::frame_signal(samples, &config.window, config.hop)?;
    let rows = extract_sequence(&frames, config.bins)?;
    Ok(FeatureSequence {
        id: id.into(),
        label,
        config: Some(config),
        rows,
        normalized: false,
    })
}

/// Relative threshold under which a column's standard deviation counts as
/// zero.
const CONSTANT_COLUMN_TOLERANCE: f64 = 1e-12;

/// Per-column z-score over the sequence's own rows, population standard
/// deviation. Constant columns become zeros.
pub fn normalize_sequence(seq: &FeatureSequence) -> Result<FeatureSequence, FeatureError> {
    let t = seq.rows.len();
    if t < 2 {
        return Err(FeatureError::TooFewRows(t));
    }
    let mut rows = seq.rows.clone();
    for c in 0..NUM_FEATURES {
        let n = t as f64;
        let mean = seq.rows.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = seq.rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        let scale = seq.rows.iter().fold(0.0f64, |m, r| m.max(r[c].abs()));
        let constant = !(std > CONSTANT_COLUMN_TOLERANCE * scale);
        for (out, src) in rows.iter_mut().zip(&seq.rows) {
            out[c] = if constant { 0.0 } else { (src[c] - mean) / std };
        }
    }
    Ok(FeatureSequence {
        rows,
        normalized: true,
        ..seq.clone()
    })
}
