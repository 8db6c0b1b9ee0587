//! Evaluation protocol: stratified 70/30 splits, repeated trials, and the
//! grid over window shape, window length and hidden size.
//!
//! Seeds: trial `k` of a grid uses `seed::derive(base_seed, k)`. Inside a
//! trial the split uses `derive(trial_seed, 0)` and training uses
//! `derive(trial_seed, 1)`, so the same trial index sees the same split in
//! every grid cell.

mod metrics;
mod report;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{extract_signal, normalize_sequence, ExtractionConfig, FeatureSequence};
use crate::ingest::{AudioRecord, Label};
use crate::nnet::{predict, train, BiLstmModel, TrainConfig, TrainHistory};
use crate::windows::{WindowShape, WindowSpec};
use crate::{seed, Result};

pub use metrics::{confusion, mean_metrics, metrics, Confusion, Metrics};
pub use report::{emit_results, format_metric, read_summary, round_half_up, SummaryRow};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_TRIALS: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("dataset needs examples of both classes")]
    SingleClassDataset,
    #[error("train fraction {0} leaves an empty train or test set")]
    InvalidFraction(f64),
    #[error("grid axis {0} is empty")]
    EmptyAxis(&'static str),
    #[error("example {0} has no label")]
    Unlabeled(String),
}

/// Indices into the dataset, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified random split: each class is shuffled and its first
/// `floor(n * train_fraction)` members go to training.
pub fn split_indices(labels: &[Label], train_fraction: f64, seed: u64) -> Result<Split, EvalError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(train_fraction));
    }
    if let Some(i) = labels.iter().position(|l| *l == Label::Unlabeled) {
        return Err(EvalError::Unlabeled(format!("#{i}")));
    }
    let mut rng = seed::rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Healthy, Label::Pathological] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            return Err(EvalError::SingleClassDataset);
        }
        members.shuffle(&mut rng);
        let n_train = (members.len() as f64 * train_fraction).floor() as usize;
        if n_train >= members.len() {
            return Err(EvalError::InvalidFraction(train_fraction));
        }
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// [`split_indices`] applied to feature sequences.
pub fn split(
    dataset: &[FeatureSequence],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<FeatureSequence>, Vec<FeatureSequence>), EvalError> {
    let labels: Vec<Label> = dataset.iter().map(|s| s.label).collect();
    let s = split_indices(&labels, train_fraction, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset[i].clone()).collect();
    Ok((pick(&s.train), pick(&s.test)))
}

/// Predicts every sequence and scores against its label.
pub fn evaluate(model: &BiLstmModel, test: &[FeatureSequence]) -> Result<(Vec<usize>, Confusion, Metrics)> {
    let predictions = test
        .par_iter()
        .map(|s| predict(model, s))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = class_labels(test)?;
    let c = confusion(&predictions, &labels)?;
    Ok((predictions, c, metrics(&c)))
}

fn class_labels(seqs: &[FeatureSequence]) -> Result<Vec<usize>, EvalError> {
    seqs.iter()
        .map(|s| s.label.class_index().ok_or_else(|| EvalError::Unlabeled(s.id.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub split: Split,
    pub test_ids: Vec<String>,
    pub predictions: Vec<usize>,
    pub labels: Vec<usize>,
    pub confusion: Confusion,
    pub metrics: Metrics,
    #[serde(skip)]
    pub history: TrainHistory,
    #[serde(skip)]
    pub model: Option<BiLstmModel>,
}

/// Split, train, predict the held-out part, score.
pub fn run_trial(
    dataset: &[FeatureSequence],
    hidden: usize,
    train_config: &TrainConfig,
    trial_seed: u64,
    train_fraction: f64,
) -> Result<TrialResult> {
    let labels: Vec<Label> = dataset.iter().map(|s| s.label).collect();
    let split = split_indices(&labels, train_fraction, seed::derive(trial_seed, 0))?;
    let train_set: Vec<FeatureSequence> = split.train.iter().map(|&i| dataset[i].clone()).collect();
    let test_set: Vec<FeatureSequence> = split.test.iter().map(|&i| dataset[i].clone()).collect();
    let config = TrainConfig {
        seed: seed::derive(trial_seed, 1),
        ..train_config.clone()
    };
    let (model, history) = train(&train_set, hidden, &config)?;
    let (predictions, confusion, metrics) = evaluate(&model, &test_set)?;
    Ok(TrialResult {
        seed: trial_seed,
        test_ids: test_set.iter().map(|s| s.id.clone()).collect(),
        labels: class_labels(&test_set)?,
        split,
        predictions,
        confusion,
        metrics,
        history,
        model: Some(model),
    })
}

/// Extracts and z-scores the sequence of every record under one window
/// configuration.
pub fn extract_dataset(records: &[AudioRecord], config: ExtractionConfig) -> Result<Vec<FeatureSequence>> {
    records
        .par_iter()
        .map(|r| {
            let raw = extract_signal(r.id.clone(), r.label, &r.samples, config)?;
            Ok(normalize_sequence(&raw)?)
        })
        .collect()
}

/// Axes and settings of one grid run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub shapes: Vec<WindowShape>,
    /// Values of `L`.
    pub lengths: Vec<usize>,
    pub alpha: f64,
    pub hop: usize,
    pub bins: usize,
    pub hidden_sizes: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub train_fraction: f64,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub window: WindowSpec,
    pub length_label: String,
    pub hidden: usize,
    pub trials: Vec<Metrics>,
    pub mean: Metrics,
}

/// Per-(shape, length) means over hidden sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSummary {
    pub window: WindowSpec,
    pub length_label: String,
    pub mean: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutput {
    pub cells: Vec<GridCell>,
    pub shape_means: Vec<ShapeSummary>,
}

/// Runs every (shape, length, hidden) cell. Features are extracted once per
/// (shape, length); all trials of a configuration run in parallel, each with
/// its own derived seed. Cells come out ordered by shape, length, then hidden
/// size.
pub fn run_grid(records: &[AudioRecord], spec: &GridSpec) -> Result<GridOutput> {
    if spec.shapes.is_empty() {
        return Err(EvalError::EmptyAxis("shapes").into());
    }
    if spec.lengths.is_empty() {
        return Err(EvalError::EmptyAxis("lengths").into());
    }
    if spec.hidden_sizes.is_empty() {
        return Err(EvalError::EmptyAxis("hidden sizes").into());
    }
    if spec.trials == 0 {
        return Err(EvalError::EmptyAxis("trials").into());
    }
    let mut shapes = spec.shapes.clone();
    shapes.sort();
    shapes.dedup();
    let mut lengths = spec.lengths.clone();
    lengths.sort_unstable();
    lengths.dedup();
    let mut hidden_sizes = spec.hidden_sizes.clone();
    hidden_sizes.sort_unstable();
    hidden_sizes.dedup();

    let mut cells = Vec::new();
    let mut shape_means = Vec::new();
    for &shape in &shapes {
        for &l in &lengths {
            let window = WindowSpec::new(shape, l, spec.alpha)?;
            let dataset = extract_dataset(
                records,
                ExtractionConfig {
                    window,
                    hop: spec.hop,
                    bins: spec.bins,
                },
            )?;
            let jobs: Vec<(usize, usize)> = hidden_sizes
                .iter()
                .flat_map(|&h| (0..spec.trials).map(move |t| (h, t)))
                .collect();
            let results: Vec<Metrics> = jobs
                .par_iter()
                .map(|&(h, t)| {
                    let trial_seed = seed::derive(spec.base_seed, t as u64);
                    run_trial(&dataset, h, &spec.train, trial_seed, spec.train_fraction).map(|r| r.metrics)
                })
                .collect::<Result<_>>()?;
            let base = cells.len();
            for (hi, &h) in hidden_sizes.iter().enumerate() {
                let trials = results[hi * spec.trials..(hi + 1) * spec.trials].to_vec();
                cells.push(GridCell {
                    window,
                    length_label: window.length_label(),
                    hidden: h,
                    mean: mean_metrics(&trials),
                    trials,
                });
            }
            shape_means.push(ShapeSummary {
                window,
                length_label: window.length_label(),
                mean: mean_metrics(cells[base..].iter().map(|c| &c.mean)),
            });
        }
    }
    Ok(GridOutput { cells, shape_means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::NUM_FEATURES;

    fn labels(h: usize, p: usize) -> Vec<Label> {
        let mut v = vec![Label::Healthy; h];
        v.extend(vec![Label::Pathological; p]);
        v
    }

    #[test]
    fn hundred_fifty_record_split() {
        let l = labels(150, 150);
        let s = split_indices(&l, 0.7, 1).unwrap();
        let count = |idx: &[usize], c| idx.iter().filter(|&&i| l[i] == c).count();
        assert_eq!(count(&s.train, Label::Healthy), 105);
        assert_eq!(count(&s.train, Label::Pathological), 105);
        assert_eq!(count(&s.test, Label::Healthy), 45);
        assert_eq!(count(&s.test, Label::Pathological), 45);
        assert_eq!(s, split_indices(&l, 0.7, 1).unwrap());
        assert_ne!(s, split_indices(&l, 0.7, 2).unwrap());
    }

    #[test]
    fn split_errors() {
        let l = labels(5, 5);
        assert_eq!(split_indices(&l, 1.0, 0), Err(EvalError::InvalidFraction(1.0)));
        assert_eq!(split_indices(&l, 0.0, 0), Err(EvalError::InvalidFraction(0.0)));
        assert_eq!(split_indices(&labels(4, 0), 0.7, 0), Err(EvalError::SingleClassDataset));
    }

    #[test]
    fn split_partitions_the_dataset() {
        for (h, p, seed) in [(7usize, 3usize, 0u64), (13, 29, 5), (1, 1, 9), (40, 40, 3)] {
            let l = labels(h, p);
            let s = split_indices(&l, 0.7, seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..h + p).collect::<Vec<_>>());
            let train_h = s.train.iter().filter(|&&i| l[i] == Label::Healthy).count();
            assert_eq!(train_h, (h as f64 * 0.7).floor() as usize);
        }
    }

    fn separable_dataset(n: usize) -> Vec<FeatureSequence> {
        (0..2 * n)
            .map(|i| {
                let class = i % 2;
                let v = if class == 1 { 1.0 } else { -1.0 };
                let rows = (0..5)
                    .map(|t| {
                        let mut r = [v; NUM_FEATURES];
                        r[0] += 0.05 * ((i * 7 + t) as f64).sin();
                        r
                    })
                    .collect();
                FeatureSequence::from_rows(format!("s{i:02}"), Label::from_class_index(class), rows)
            })
            .collect()
    }

    #[test]
    fn trial_on_separable_data() {
        let data = separable_dataset(10);
        let cfg = TrainConfig { epochs: 40, batch_size: 4, ..Default::default() };
        let r = run_trial(&data, 4, &cfg, 17, 0.7).unwrap();
        assert_eq!(r.metrics.accuracy, Some(100.0));
        assert_eq!(r.predictions.len(), 6);
        let again = confusion(&r.predictions, &r.labels).unwrap();
        assert_eq!(metrics(&again), r.metrics);
        let r2 = run_trial(&data, 4, &cfg, 17, 0.7).unwrap();
        assert_eq!(r.predictions, r2.predictions);
        assert_eq!(r.model, r2.model);
    }

    #[test]
    fn grid_rejects_empty_axes() {
        let spec = GridSpec {
            shapes: vec![],
            lengths: vec![30],
            alpha: 2.5,
            hop: 1,
            bins: 10,
            hidden_sizes: vec![5],
            trials: 1,
            base_seed: 0,
            train_fraction: 0.7,
            train: TrainConfig::default(),
        };
        assert!(matches!(
            run_grid(&[], &spec),
            Err(crate::Error::Eval(EvalError::EmptyAxis("shapes")))
        ));
    }
}
