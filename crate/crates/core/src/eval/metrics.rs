use serde::{Deserialize, Serialize};

use super::EvalError;

/// Confusion counts with Pathological (class 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

/// Tallies predictions against labels (class indices, 1 = positive).
pub fn confusion(predictions: &[usize], labels: &[usize]) -> Result<Confusion, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = Confusion::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p == 1, y == 1) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Percentages. A ratio with a zero denominator is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
}

fn percent(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64 * 100.0)
}

pub fn metrics(c: &Confusion) -> Metrics {
    Metrics {
        sensitivity: percent(c.tp, c.positives()),
        specificity: percent(c.tn, c.negatives()),
        accuracy: percent(c.tp + c.tn, c.total()),
    }
}

/// Arithmetic mean over trials, per metric, ignoring undefined entries.
pub fn mean_metrics<'a>(trials: impl IntoIterator<Item = &'a Metrics>) -> Metrics {
    let mut sums = [0.0; 3];
    let mut counts = [0usize; 3];
    for m in trials {
        for (k, v) in [m.sensitivity, m.specificity, m.accuracy].into_iter().enumerate() {
            if let Some(v) = v {
                sums[k] += v;
                counts[k] += 1;
            }
        }
    }
    let avg = |k: usize| (counts[k] > 0).then(|| sums[k] / counts[k] as f64);
    Metrics {
        sensitivity: avg(0),
        specificity: avg(1),
        accuracy: avg(2),
    }
}
