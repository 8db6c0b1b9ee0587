//! Recording ingestion and preprocessing.
//!
//! Raw recordings (nominally 2000 Hz) are low-pass filtered at 250 Hz,
//! decimated to 500 Hz and fixed to 5000 samples (10 s) before framing.

mod filter;
mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{apply_filter, decimate, design_lowpass, fix_length, FirFilter};
pub use io::{read_corpus, read_csv, read_wav, write_csv, write_wav, MANIFEST_FILE};

/// Target rate after decimation.
pub const TARGET_RATE_HZ: u32 = 500;
/// Record length after fixing, 10 s at 500 Hz.
pub const TARGET_SAMPLES: usize = 5000;
/// Low-pass cutoff applied before decimation.
pub const CUTOFF_HZ: f64 = 250.0;
/// Tap count of the anti-aliasing filter.
pub const FILTER_TAPS: usize = 101;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),
    #[error("invalid cutoff {cutoff_hz} Hz for rate {rate_hz} Hz")]
    InvalidCutoff { cutoff_hz: f64, rate_hz: f64 },
    #[error("tap count must be odd, got {0}")]
    EvenTaps(usize),
    #[error("filter designed for {filter_hz} Hz applied to a {record_hz} Hz record")]
    RateMismatch { filter_hz: f64, record_hz: u32 },
    #[error("decimation factor must be at least 1")]
    InvalidFactor,
    #[error("record {0} has no samples")]
    EmptyRecord(String),
    #[error("sample rate {0} Hz is not an integer multiple of 500 Hz")]
    UnsupportedRate(u32),
}

impl IngestError {
    pub(crate) fn is_io(&self) -> bool {
        matches!(
            self,
            IngestError::UnsupportedFormat(_) | IngestError::CorruptHeader(_)
        )
    }
}

/// Class of a recording. Pathological is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Healthy,
    Pathological,
    Unlabeled,
}

impl Label {
    /// Class index used by the classifier: Healthy = 0, Pathological = 1.
    pub fn class_index(self) -> Option<usize> {
        match self {
            Label::Healthy => Some(0),
            Label::Pathological => Some(1),
            Label::Unlabeled => None,
        }
    }

    pub fn from_class_index(index: usize) -> Label {
        if index == 1 {
            Label::Pathological
        } else {
            Label::Healthy
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Healthy => "healthy",
            Label::Pathological => "pathological",
            Label::Unlabeled => "unlabeled",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    /// Accepts names as well as the PhysioNet convention (-1 normal, 1 abnormal).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "healthy" | "normal" | "-1" | "0" => Ok(Label::Healthy),
            "pathological" | "abnormal" | "1" => Ok(Label::Pathological),
            "unlabeled" | "" => Ok(Label::Unlabeled),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// A labeled, sampled waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioRecord {
    pub id: String,
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    pub label: Label,
}

impl AudioRecord {
    pub fn new(id: impl Into<String>, samples: Vec<f64>, sample_rate_hz: u32, label: Label) -> Self {
        AudioRecord {
            id: id.into(),
            samples,
            sample_rate_hz,
            label,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    fn with_samples(&self, samples: Vec<f64>, sample_rate_hz: u32) -> AudioRecord {
        AudioRecord {
            id: self.id.clone(),
            samples,
            sample_rate_hz,
            label: self.label,
        }
    }
}

/// Full preprocessing: 250 Hz low-pass at the source rate, decimation to
/// 500 Hz, then tile-or-truncate to 5000 samples.
///
/// A record already at 500 Hz is not filtered (its Nyquist frequency is the
/// cutoff).
pub fn preprocess(record: &AudioRecord) -> Result<AudioRecord, IngestError> {
    if record.is_empty() {
        return Err(IngestError::EmptyRecord(record.id.clone()));
    }
    let rate = record.sample_rate_hz;
    if rate == 0 || rate % TARGET_RATE_HZ != 0 {
        return Err(IngestError::UnsupportedRate(rate));
    }
    let factor = (rate / TARGET_RATE_HZ) as usize;
    let filtered = if factor > 1 {
        let fir = design_lowpass(CUTOFF_HZ, rate as f64, FILTER_TAPS)?;
        apply_filter(record, &fir)?
    } else {
        record.clone()
    };
    let decimated = decimate(&filtered, factor)?;
    fix_length(&decimated, TARGET_SAMPLES)
}
