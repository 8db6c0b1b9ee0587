//! Synthetic PCG-like recordings.
//!
//! Every cardiac cycle holds an S1 burst at the cycle start, a systolic gap,
//! an S2 burst at 35% of the cycle and a diastolic gap. A burst is a sum of
//! sinusoids drawn inside its band under a Gaussian envelope that is cut at
//! +-3 sigma, so nothing leaks into the gaps. Pathological records add
//! band-limited noise over each systolic gap. White noise at `noise_floor`
//! covers the whole record.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{write_wav, AudioRecord, Label};
use crate::{seed, Error, Result};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synth configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub rate_hz: u32,
    pub heart_rate_bpm: (f64, f64),
    /// RMS of the systolic murmur relative to the S1 peak. Only used for
    /// pathological records.
    pub murmur_gain: f64,
    pub s1_band_hz: (f64, f64),
    pub s2_band_hz: (f64, f64),
    pub murmur_band_hz: (f64, f64),
    pub noise_floor: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            duration_s: 10.0,
            rate_hz: 2000,
            heart_rate_bpm: (55.0, 95.0),
            murmur_gain: 0.3,
            s1_band_hz: (10.0, 200.0),
            s2_band_hz: (20.0, 250.0),
            murmur_band_hz: (40.0, 220.0),
            noise_floor: 0.01,
        }
    }
}

const S1_AMPLITUDE: f64 = 1.0;
const S2_AMPLITUDE: f64 = 0.6;
const S1_WIDTH_S: f64 = 0.10;
const S2_WIDTH_S: f64 = 0.08;
const MAX_PEAK: f64 = 0.95;
const S2_ONSET: f64 = 0.35;
const TONES_PER_BURST: usize = 8;
const TONES_PER_MURMUR: usize = 40;

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        let nyquist = self.rate_hz as f64 / 2.0;
        if self.rate_hz == 0 {
            return bad("rate_hz must be positive".into());
        }
        for (name, (lo, hi)) in [
            ("s1_band_hz", self.s1_band_hz),
            ("s2_band_hz", self.s2_band_hz),
            ("murmur_band_hz", self.murmur_band_hz),
        ] {
            if !(lo > 0.0 && lo < hi && hi < nyquist) {
                return bad(format!("{name} ({lo}, {hi}) must lie inside (0, {nyquist})"));
            }
        }
        let (bpm_lo, bpm_hi) = self.heart_rate_bpm;
        if !(bpm_lo > 0.0 && bpm_lo <= bpm_hi && bpm_hi.is_finite()) {
            return bad(format!("heart_rate_bpm ({bpm_lo}, {bpm_hi}) is not a positive range"));
        }
        // The systolic gap must exist at the fastest rate.
        if S2_ONSET * 60.0 / bpm_hi <= S1_WIDTH_S || (1.0 - S2_ONSET) * 60.0 / bpm_hi <= S2_WIDTH_S {
            return bad(format!("heart rate {bpm_hi} bpm leaves no gap between sounds"));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= 2.0 * 60.0 / bpm_lo) {
            return bad(format!("duration {} s is shorter than two cardiac cycles", self.duration_s));
        }
        if !(self.murmur_gain >= 0.0 && self.noise_floor >= 0.0) {
            return bad("murmur_gain and noise_floor must be non-negative".into());
        }
        Ok(())
    }
}

/// Sample ranges of each interval type, clipped to the record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotation {
    pub heart_rate_bpm: f64,
    pub s1: Vec<Range<usize>>,
    pub s2: Vec<Range<usize>>,
    pub systole: Vec<Range<usize>>,
    pub diastole: Vec<Range<usize>>,
}

fn clip(start: f64, end: f64, n: usize) -> Option<Range<usize>> {
    let a = start.max(0.0).ceil() as usize;
    let b = (end.max(0.0).ceil() as usize).min(n);
    (a < b).then_some(a..b)
}

fn tones(rng: &mut ChaCha8Rng, count: usize, band: (f64, f64)) -> Vec<(f64, f64, f64)> {
    let amp = (2.0 / count as f64).sqrt();
    (0..count)
        .map(|_| {
            let f = rng.random_range(band.0..band.1);
            let phase = rng.random_range(0.0..2.0 * PI);
            let a = amp * rng.random_range(0.5..1.5);
            (f, phase, a)
        })
        .collect()
}

/// Adds a Gaussian-enveloped tone burst spanning `[start, start + width)`
/// seconds. The envelope peaks at `peak`.
fn add_burst(
    out: &mut [f64],
    rate: f64,
    start: f64,
    width: f64,
    peak: f64,
    band: (f64, f64),
    rng: &mut ChaCha8Rng,
) {
    let parts = tones(rng, TONES_PER_BURST, band);
    let center = start + width / 2.0;
    let sigma = width / 6.0;
    let Some(range) = clip(start * rate, (start + width) * rate, out.len()) else {
        return;
    };
    let carrier_peak: f64 = parts.iter().map(|p| p.2).sum();
    for i in range {
        let t = i as f64 / rate;
        let env = (-0.5 * ((t - center) / sigma).powi(2)).exp();
        let v: f64 = parts.iter().map(|&(f, ph, a)| a * (2.0 * PI * f * t + ph).sin()).sum();
        out[i] += peak * env * v / carrier_peak;
    }
}

/// Hann-tapered band-limited noise filling `range`, scaled to RMS `gain`.
fn add_murmur(out: &mut [f64], rate: f64, range: Range<usize>, gain: f64, band: (f64, f64), rng: &mut ChaCha8Rng) {
    let parts = tones(rng, TONES_PER_MURMUR, band);
    let len = range.len();
    if len < 2 {
        return;
    }
    let mut buf: Vec<f64> = range
        .clone()
        .enumerate()
        .map(|(k, i)| {
            let t = i as f64 / rate;
            let taper = 0.5 - 0.5 * (2.0 * PI * k as f64 / (len - 1) as f64).cos();
            taper * parts.iter().map(|&(f, ph, a)| a * (2.0 * PI * f * t + ph).sin()).sum::<f64>()
        })
        .collect();
    let rms = (buf.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    if rms > 0.0 {
        buf.iter_mut().for_each(|v| *v *= gain / rms);
    }
    for (o, v) in out[range].iter_mut().zip(buf) {
        *o += v;
    }
}

/// Generates one record and its interval bookkeeping. `config.seed` fixes
/// everything, including the heart rate.
pub fn generate_annotated(config: &SynthConfig, label: Label) -> Result<(AudioRecord, Annotation), SynthError> {
    config.validate()?;
    if label == Label::Unlabeled {
        return Err(SynthError::InvalidConfig("a synthetic record needs a class".into()));
    }
    let mut rng = seed::rng(config.seed);
    let rate = config.rate_hz as f64;
    let n = (config.duration_s * rate).round() as usize;
    let (bpm_lo, bpm_hi) = config.heart_rate_bpm;
    let bpm = if bpm_hi > bpm_lo { rng.random_range(bpm_lo..bpm_hi) } else { bpm_lo };
    let period = 60.0 / bpm;
    let offset = rng.random_range(0.0..period);
    let murmur = if label == Label::Pathological { config.murmur_gain } else { 0.0 };

    let mut out = vec![0.0; n];
    let mut ann = Annotation { heart_rate_bpm: bpm, ..Default::default() };
    let mut start = -offset;
    let end = n as f64 / rate;
    while start < end {
        let jitter = |rng: &mut ChaCha8Rng| rng.random_range(0.9..1.1);
        let s2_start = start + S2_ONSET * period;
        add_burst(&mut out, rate, start, S1_WIDTH_S, S1_AMPLITUDE * jitter(&mut rng), config.s1_band_hz, &mut rng);
        add_burst(&mut out, rate, s2_start, S2_WIDTH_S, S2_AMPLITUDE * jitter(&mut rng), config.s2_band_hz, &mut rng);
        let sections = [
            (start, start + S1_WIDTH_S),
            (start + S1_WIDTH_S, s2_start),
            (s2_start, s2_start + S2_WIDTH_S),
            (s2_start + S2_WIDTH_S, start + period),
        ];
        let [s1, sys, s2, dia] = sections.map(|(a, b)| clip(a * rate, b * rate, n));
        if let Some(sys) = sys.clone() {
            if murmur > 0.0 {
                add_murmur(&mut out, rate, sys, murmur, config.murmur_band_hz, &mut rng);
            }
        }
        ann.s1.extend(s1);
        ann.systole.extend(sys);
        ann.s2.extend(s2);
        ann.diastole.extend(dia);
        start += period;
    }
    if config.noise_floor > 0.0 {
        for v in out.iter_mut() {
            *v += config.noise_floor * rng.sample::<f64, _>(StandardNormal);
        }
    }
    // Keep the record inside 16-bit full scale so writing it never clips.
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > MAX_PEAK {
        let g = MAX_PEAK / peak;
        out.iter_mut().for_each(|v| *v *= g);
    }
    let id = format!("synth_{}_{:016x}", label.as_str(), config.seed);
    Ok((AudioRecord::new(id, out, config.rate_hz, label), ann))
}

pub fn generate(config: &SynthConfig, label: Label) -> Result<AudioRecord, SynthError> {
    generate_annotated(config, label).map(|(r, _)| r)
}

/// `n_healthy` healthy records followed by `n_pathological` pathological
/// ones. Record `i` uses seed `derive(base_seed, i)`.
pub fn generate_dataset(
    n_healthy: usize,
    n_pathological: usize,
    base_seed: u64,
    config: &SynthConfig,
) -> Result<Vec<AudioRecord>, SynthError> {
    config.validate()?;
    use rayon::prelude::*;
    (0..n_healthy + n_pathological)
        .into_par_iter()
        .map(|i| {
            let (label, k) = if i < n_healthy {
                (Label::Healthy, i)
            } else {
                (Label::Pathological, i - n_healthy)
            };
            let cfg = SynthConfig { seed: seed::derive(base_seed, i as u64), ..config.clone() };
            let mut r = generate(&cfg, label)?;
            r.id = format!("{}_{k:03}", label.as_str());
            Ok(r)
        })
        .collect()
}

/// Writes `<id>.wav` for each record plus `labels.csv` (filename,label).
pub fn write_corpus(dir: impl AsRef<Path>, records: &[AudioRecord]) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::from("filename,label\n");
    for r in records {
        let name = format!("{}.wav", r.id);
        write_wav(dir.join(&name), r)?;
        writeln!(manifest, "{name},{}", r.label.as_str()).unwrap();
    }
    let path = dir.join("labels.csv");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
