use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{AudioRecord, IngestError, Label};
use crate::{Error, Result};

const PCM16_SCALE: f64 = 32768.0;

fn record_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        // hound reports short headers as `Other`.
        hound::Error::IoError(e)
            if matches!(e.kind(), std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other) =>
        {
            IngestError::CorruptHeader(e.to_string()).into()
        }
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::FormatError(m) => IngestError::CorruptHeader(m.into()).into(),
        hound::Error::TooWide | hound::Error::UnfinishedSample => {
            IngestError::CorruptHeader(err.to_string()).into()
        }
        hound::Error::Unsupported | hound::Error::InvalidSampleFormat => {
            IngestError::UnsupportedFormat(err.to_string()).into()
        }
    }
}

/// Reads a mono 16-bit PCM WAV file. Samples are scaled by 1/32768; the label
/// is `Unlabeled` and the id is the file stem.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioRecord> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = hound::WavReader::new(BufReader::new(file)).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(IngestError::UnsupportedFormat(format!("{} channels", spec.channels)).into());
    }
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(IngestError::UnsupportedFormat("floating-point samples".into()).into());
    }
    if spec.bits_per_sample != 16 {
        return Err(
            IngestError::UnsupportedFormat(format!("{} bits per sample", spec.bits_per_sample)).into(),
        );
    }
    if spec.sample_rate == 0 {
        return Err(IngestError::CorruptHeader("zero sample rate".into()).into());
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| map_hound(path, e))?;
    if samples.is_empty() {
        return Err(IngestError::EmptyRecord(record_id(path)).into());
    }
    Ok(AudioRecord::new(record_id(path), samples, spec.sample_rate, Label::Unlabeled))
}

/// Writes a record as mono 16-bit PCM, clamping to the representable range.
pub fn write_wav(path: impl AsRef<Path>, record: &AudioRecord) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: record.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &x in &record.samples {
        let v = (x * PCM16_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        writer.write_sample(v).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

/// Reads a headerless CSV with one sample per line.
pub fn read_csv(path: impl AsRef<Path>, sample_rate_hz: u32, label: Label) -> Result<AudioRecord> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let v: f64 = field
            .parse()
            .map_err(|_| Error::parse(path, format!("line {}: not a number: {field:?}", lineno + 1)))?;
        samples.push(v);
    }
    if samples.is_empty() {
        return Err(IngestError::EmptyRecord(record_id(path)).into());
    }
    if sample_rate_hz == 0 {
        return Err(Error::Config("sample rate must be positive".into()));
    }
    Ok(AudioRecord::new(record_id(path), samples, sample_rate_hz, label))
}

/// Writes one sample per line, full precision.
pub fn write_csv(path: impl AsRef<Path>, record: &AudioRecord) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for x in &record.samples {
        writeln!(out, "{x}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Name of the manifest listing `filename,label` for a corpus directory.
pub const MANIFEST_FILE: &str = "labels.csv";

/// Reads every recording of a corpus directory. With a `labels.csv`
/// manifest the listed files are read in manifest order and labeled; without
/// one, all `*.wav` files are read in name order, unlabeled.
pub fn read_corpus(dir: impl AsRef<Path>) -> Result<Vec<AudioRecord>> {
    let dir = dir.as_ref();
    let manifest = dir.join(MANIFEST_FILE);
    if !manifest.exists() {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for entry in entries {
            let p = entry.map_err(|e| Error::io(dir, e))?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
                paths.push(p);
            }
        }
        paths.sort();
        return paths.iter().map(read_wav).collect();
    }
    let text = std::fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("filename")) {
            continue;
        }
        let (name, label) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(&manifest, format!("line {}: expected filename,label", i + 1)))?;
        let label: Label = label
            .trim()
            .parse()
            .map_err(|_| Error::parse(&manifest, format!("line {}: unknown label {label:?}", i + 1)))?;
        let mut r = read_wav(dir.join(name.trim()))?;
        r.label = label;
        records.push(r);
    }
    Ok(records)
}
