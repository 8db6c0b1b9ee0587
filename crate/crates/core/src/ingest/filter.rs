use std::f64::consts::PI;

use super::{AudioRecord, IngestError};

/// Linear-phase FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub cutoff_hz: f64,
    pub design_rate_hz: f64,
}

impl FirFilter {
    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    /// Delay in samples of the center tap.
    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }
}

/// Windowed-sinc low-pass design with a Hann (raised-cosine) taper and unity
/// DC gain.
///
/// `num_taps == 1` is accepted as the degenerate identity filter `[1.0]`.
pub fn design_lowpass(cutoff_hz: f64, rate_hz: f64, num_taps: usize) -> Result<FirFilter, IngestError> {
    if !(cutoff_hz > 0.0 && rate_hz > 0.0 && cutoff_hz < rate_hz / 2.0) {
        return Err(IngestError::InvalidCutoff { cutoff_hz, rate_hz });
    }
    if num_taps % 2 == 0 {
        return Err(IngestError::EvenTaps(num_taps));
    }
    if num_taps == 1 {
        return Ok(FirFilter {
            taps: vec![1.0],
            cutoff_hz,
            design_rate_hz: rate_hz,
        });
    }

    let center = (num_taps - 1) / 2;
    let fc = cutoff_hz / rate_hz;
    let mut taps = vec![0.0; num_taps];
    // Fill the left half and mirror so the taps are exactly symmetric.
    for k in 0..=center {
        let m = k as f64 - center as f64;
        let sinc = if k == center {
            2.0 * fc
        } else {
            (2.0 * PI * fc * m).sin() / (PI * m)
        };
        let taper = 0.5 - 0.5 * (2.0 * PI * k as f64 / (num_taps - 1) as f64).cos();
        taps[k] = sinc * taper;
        taps[num_taps - 1 - k] = sinc * taper;
    }
    let gain: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= gain;
    }
    Ok(FirFilter {
        taps,
        cutoff_hz,
        design_rate_hz: rate_hz,
    })
}

/// Linear convolution, shifted by the group delay and trimmed to the input
/// length so the output is time-aligned with the input. Samples outside the
/// record are taken as zero.
pub fn apply_filter(record: &AudioRecord, filter: &FirFilter) -> Result<AudioRecord, IngestError> {
    if (filter.design_rate_hz - record.sample_rate_hz as f64).abs() > 1e-9 {
        return Err(IngestError::RateMismatch {
            filter_hz: filter.design_rate_hz,
            record_hz: record.sample_rate_hz,
        });
    }
    let x = &record.samples;
    let n = x.len() as isize;
    let delay = filter.group_delay() as isize;
    let out = (0..n)
        .map(|i| {
            filter
                .taps
                .iter()
                .enumerate()
                .filter_map(|(k, &h)| {
                    let j = i + delay - k as isize;
                    (0..n).contains(&j).then(|| h * x[j as usize])
                })
                .sum()
        })
        .collect();
    Ok(record.with_samples(out, record.sample_rate_hz))
}

/// Keeps every `factor`-th sample starting at index 0.
pub fn decimate(record: &AudioRecord, factor: usize) -> Result<AudioRecord, IngestError> {
    if factor < 1 {
        return Err(IngestError::InvalidFactor);
    }
    let samples = record.samples.iter().step_by(factor).copied().collect();
    Ok(record.with_samples(samples, record.sample_rate_hz / factor as u32))
}

/// Truncates to `target_samples`, or tiles a shorter record end-to-end and
/// then truncates.
pub fn fix_length(record: &AudioRecord, target_samples: usize) -> Result<AudioRecord, IngestError> {
    if record.is_empty() {
        return Err(IngestError::EmptyRecord(record.id.clone()));
    }
    let samples = record
        .samples
        .iter()
        .cycle()
        .take(target_samples)
        .copied()
        .collect();
    Ok(record.with_samples(samples, record.sample_rate_hz))
}
