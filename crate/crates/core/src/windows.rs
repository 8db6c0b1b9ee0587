//! Symmetric sliding windows, framing, and window spectra.
//!
//! A window of total length `L + 1` is indexed by `l = -L/2 ..= L/2`, with
//! `L` even. Frame `n` of a signal `x` is `y_n[l] = w[l] * x[n + l]` for each
//! valid center `n`; no padding is applied at the signal edges.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default Gaussian shape parameter.
pub const DEFAULT_ALPHA: f64 = 2.5;
/// Default DFT size for lobe measurements.
pub const DEFAULT_NFFT: usize = 4096;
/// Canonical `L` values, shown with the nominal labels 15/30/50.
pub const CANONICAL_LENGTHS: [usize; 3] = [14, 30, 50];

const DB_FLOOR: f64 = -400.0;
const FALLBACK_NULL_DB: f64 = -60.0;

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("window parameter L must be even and at least 2, got {0}")]
    InvalidLength(usize),
    #[error("Gaussian alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("window of length {window} does not fit a signal of {signal} samples")]
    WindowTooLong { window: usize, signal: usize },
    #[error("hop must be at least 1")]
    InvalidHop,
    #[error("nfft {nfft} is below 8x the window length {window}")]
    InvalidNfft { nfft: usize, window: usize },
    #[error("spectrum has no measurable side lobe")]
    NoSidelobe,
    #[error("unknown window shape {0:?}")]
    UnknownShape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowShape {
    Rectangular,
    Triangular,
    Gaussian,
}

impl WindowShape {
    pub const ALL: [WindowShape; 3] = [
        WindowShape::Rectangular,
        WindowShape::Triangular,
        WindowShape::Gaussian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WindowShape::Rectangular => "rectangular",
            WindowShape::Triangular => "triangular",
            WindowShape::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WindowShape {
    type Err = WindowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rectangular" | "rect" => Ok(WindowShape::Rectangular),
            "triangular" | "tri" => Ok(WindowShape::Triangular),
            "gaussian" | "gauss" => Ok(WindowShape::Gaussian),
            other => Err(WindowError::UnknownShape(other.to_string())),
        }
    }
}

/// Shape, half length and Gaussian parameter. Fully determines framing
/// together with the hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub shape: WindowShape,
    /// `L / 2`.
    pub half_length: usize,
    /// Only used by the Gaussian shape.
    pub alpha: f64,
}

impl WindowSpec {
    /// `l` is the even parameter `L`; the window has `L + 1` coefficients.
    pub fn new(shape: WindowShape, l: usize, alpha: f64) -> Result<Self, WindowError> {
        if l < 2 || l % 2 != 0 {
            return Err(WindowError::InvalidLength(l));
        }
        if shape == WindowShape::Gaussian && !(alpha > 0.0 && alpha.is_finite()) {
            return Err(WindowError::InvalidAlpha(alpha));
        }
        Ok(WindowSpec {
            shape,
            half_length: l / 2,
            alpha,
        })
    }

    pub fn rectangular(l: usize) -> Result<Self, WindowError> {
        Self::new(WindowShape::Rectangular, l, DEFAULT_ALPHA)
    }

    pub fn triangular(l: usize) -> Result<Self, WindowError> {
        Self::new(WindowShape::Triangular, l, DEFAULT_ALPHA)
    }

    pub fn gaussian(l: usize, alpha: f64) -> Result<Self, WindowError> {
        Self::new(WindowShape::Gaussian, l, alpha)
    }

    /// The parameter `L`.
    pub fn l(&self) -> usize {
        2 * self.half_length
    }

    /// Number of coefficients, `L + 1`.
    pub fn len(&self) -> usize {
        self.l() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length_label(&self) -> String {
        length_label(self.l())
    }
}

/// Display label for `L`: the canonical values 14/30/50 are shown as
/// 15/30/50, anything else as `L` itself.
pub fn length_label(l: usize) -> String {
    match l {
        14 => "15".to_string(),
        other => other.to_string(),
    }
}

/// Inverse of [`length_label`]: "15" maps to 14; other even values are taken
/// as `L` directly.
pub fn parse_length(label: &str) -> Result<usize, WindowError> {
    let v: usize = label
        .trim()
        .parse()
        .map_err(|_| WindowError::InvalidLength(0))?;
    let l = if v == 15 { 14 } else { v };
    if l < 2 || l % 2 != 0 {
        return Err(WindowError::InvalidLength(v));
    }
    Ok(l)
}

/// Window coefficients for `l = -L/2 ..= L/2`.
pub fn make_window(spec: &WindowSpec) -> Vec<f64> {
    let half = spec.half_length as isize;
    let l_param = spec.l() as f64;
    let mut w = vec![0.0; spec.len()];
    for l in 0..=half {
        let v = match spec.shape {
            WindowShape::Rectangular => 1.0,
            WindowShape::Triangular => 1.0 - (2 * l) as f64 / l_param,
            WindowShape::Gaussian => {
                let r = spec.alpha * l as f64 / half as f64;
                (-0.5 * r * r).exp()
            }
        };
        w[(half + l) as usize] = v;
        w[(half - l) as usize] = v;
    }
    w
}

/// One windowed segment of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub values: Vec<f64>,
    /// Index of the sample under `w[0]`.
    pub center: usize,
}

/// Number of valid frames for a signal of `n` samples.
pub fn frame_count(n: usize, spec: &WindowSpec, hop: usize) -> usize {
    if hop == 0 || spec.len() > n {
        0
    } else {
        (n - spec.len()) / hop + 1
    }
}

/// Frames centered at `L/2, L/2 + hop, ...` up to `N - 1 - L/2`.
pub fn frame_signal(samples: &[f64], spec: &WindowSpec, hop: usize) -> Result<Vec<Frame>, WindowError> {
    if hop == 0 {
        return Err(WindowError::InvalidHop);
    }
    if spec.len() > samples.len() {
        return Err(WindowError::WindowTooLong {
            window: spec.len(),
            signal: samples.len(),
        });
    }
    let w = make_window(spec);
    let frames = samples
        .windows(spec.len())
        .step_by(hop)
        .enumerate()
        .map(|(i, seg)| Frame {
            values: seg.iter().zip(&w).map(|(x, c)| c * x).collect(),
            center: i * hop + spec.half_length,
        })
        .collect();
    Ok(frames)
}

/// Magnitude spectrum on bins `0 ..= nfft/2`, in dB relative to bin 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpectrum {
    pub magnitudes_db: Vec<f64>,
    pub nfft: usize,
}

impl WindowSpectrum {
    /// Normalized frequency (cycles per sample) of bin `k`.
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 / self.nfft as f64
    }

    /// Index of the first local minimum past bin 0, if any.
    pub fn first_null(&self) -> Option<usize> {
        let m = &self.magnitudes_db;
        (1..m.len().saturating_sub(1)).find(|&k| m[k] <= m[k - 1] && m[k] <= m[k + 1])
    }
}

fn check_nfft(len: usize, nfft: usize) -> Result<(), WindowError> {
    if len == 0 || nfft < 8 * len {
        return Err(WindowError::InvalidNfft { nfft, window: len });
    }
    Ok(())
}

fn twiddles(nfft: usize) -> (Vec<f64>, Vec<f64>) {
    (0..nfft)
        .map(|m| {
            let a = 2.0 * PI * m as f64 / nfft as f64;
            (a.cos(), a.sin())
        })
        .unzip()
}

/// Zero-padded DFT magnitude of `w`, normalized so bin 0 is 0 dB.
pub fn window_spectrum(w: &[f64], nfft: usize) -> Result<WindowSpectrum, WindowError> {
    check_nfft(w.len(), nfft)?;
    let (cos, sin) = twiddles(nfft);
    let bins = nfft / 2 + 1;
    let mags: Vec<f64> = (0..bins)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &v) in w.iter().enumerate() {
                let m = (k * j) % nfft;
                re += v * cos[m];
                im -= v * sin[m];
            }
            re.hypot(im)
        })
        .collect();
    let peak = mags[0];
    let magnitudes_db = mags
        .iter()
        .map(|&m| {
            let db = 20.0 * (m / peak).log10();
            if db.is_nan() {
                DB_FLOOR
            } else {
                db.max(DB_FLOOR)
            }
        })
        .collect();
    Ok(WindowSpectrum { magnitudes_db, nfft })
}

/// Real-valued DFT of a symmetric window taken with its center at index 0,
/// `W(k) = sum_l w[l] cos(2 pi k l / nfft)`, on bins `0 ..= nfft/2`.
pub fn zero_phase_response(w: &[f64], nfft: usize) -> Result<Vec<f64>, WindowError> {
    check_nfft(w.len(), nfft)?;
    let (cos, _) = twiddles(nfft);
    let half = (w.len() / 2) as isize;
    Ok((0..=nfft / 2)
        .map(|k| {
            w.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let l = j as isize - half;
                    let m = (k as isize * l).rem_euclid(nfft as isize) as usize;
                    v * cos[m]
                })
                .sum()
        })
        .collect())
}

/// Highest level past the first spectral null, in dB relative to the main
/// lobe.
pub fn peak_sidelobe_db(spectrum: &WindowSpectrum) -> Result<f64, WindowError> {
    let null = spectrum.first_null().ok_or(WindowError::NoSidelobe)?;
    let peak = spectrum.magnitudes_db[null + 1..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() || peak <= DB_FLOOR {
        return Err(WindowError::NoSidelobe);
    }
    Ok(peak)
}

/// Full main-lobe width between the first nulls around bin 0, in normalized
/// frequency. Without a null the -60 dB crossing is used, and without either
/// the whole band (1.0).
pub fn mainlobe_width(spectrum: &WindowSpectrum) -> f64 {
    let edge = spectrum.first_null().or_else(|| {
        spectrum
            .magnitudes_db
            .iter()
            .position(|&db| db < FALLBACK_NULL_DB)
    });
    match edge {
        Some(k) => 2.0 * spectrum.frequency(k),
        None => 1.0,
    }
}

/// Lobe measurements for one window, as printed by `window-info`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowInfo {
    pub spec: WindowSpec,
    pub coefficients: Vec<f64>,
    pub mainlobe_width: f64,
    pub sidelobe_db: Option<f64>,
}

pub fn window_info(spec: &WindowSpec, nfft: usize) -> Result<WindowInfo, WindowError> {
    let coefficients = make_window(spec);
    let spectrum = window_spectrum(&coefficients, nfft)?;
    let sidelobe_db = match peak_sidelobe_db(&spectrum) {
        Ok(db) => Some(db),
        Err(WindowError::NoSidelobe) => None,
        Err(e) => return Err(e),
    };
    Ok(WindowInfo {
        spec: *spec,
        mainlobe_width: mainlobe_width(&spectrum),
        coefficients,
        sidelobe_db,
    })
}
