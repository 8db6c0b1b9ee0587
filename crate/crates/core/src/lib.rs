//! Heart-sound (PCG) classification from short-time windowed statistics.
//!
//! The pipeline has five stages, each in its own module:
//!
//! * [`ingest`]: WAV/CSV reading, low-pass filtering, decimation to 500 Hz
//!   and fixing the record length to 5000 samples.
//! * [`windows`]: rectangular, triangular and Gaussian sliding windows,
//!   framing, and spectral lobe measurements.
//! * [`features`]: the ten per-frame statistics and per-signal z-scoring.
//! * [`nnet`]: a two-layer bidirectional LSTM trained by BPTT with SGD with
//!   momentum.
//! * [`eval`]: confusion metrics, stratified 70/30 splits and the grid over
//!   window shape, window length and hidden size.
//!
//! [`synth`] produces deterministic PCG-like recordings for desk-scale runs
//! and [`config`] holds the run configuration shared with the CLI.

pub mod config;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod nnet;
pub mod synth;
pub mod windows;

mod error;
pub mod seed;

pub use error::{Error, Result};
pub use features::{FeatureSequence, FeatureVector};
pub use ingest::{AudioRecord, Label};
pub use nnet::{BiLstmModel, TrainConfig};
pub use windows::{WindowShape, WindowSpec};
