//! Run configuration shared by the CLI subcommands.
//!
//! A JSON file supplies defaults; command-line flags override individual
//! fields. The merged result is echoed next to the outputs as
//! `effective_config.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eval::{GridSpec, DEFAULT_TRAIN_FRACTION, DEFAULT_TRIALS};
use crate::features::DEFAULT_BINS;
use crate::nnet::TrainConfig;
use crate::synth::SynthConfig;
use crate::windows::{WindowShape, CANONICAL_LENGTHS, DEFAULT_ALPHA};
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";

/// A synthetic corpus generated on the fly instead of reading files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthCorpus {
    pub n_healthy: usize,
    pub n_pathological: usize,
    pub params: SynthConfig,
}

impl Default for SynthCorpus {
    fn default() -> Self {
        SynthCorpus {
            n_healthy: 10,
            n_pathological: 10,
            params: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Directory with WAV files and a `labels.csv` manifest.
    pub corpus: Option<PathBuf>,
    pub synth: Option<SynthCorpus>,
    pub shapes: Vec<WindowShape>,
    /// Values of `L`.
    pub lengths: Vec<usize>,
    pub alpha: f64,
    pub hop: usize,
    pub bins: usize,
    pub hidden_sizes: Vec<usize>,
    pub trials: usize,
    pub train_fraction: f64,
    pub train: TrainConfig,
    pub output: Option<PathBuf>,
    /// Root of every random choice in the run.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            corpus: None,
            synth: None,
            shapes: WindowShape::ALL.to_vec(),
            lengths: CANONICAL_LENGTHS.to_vec(),
            alpha: DEFAULT_ALPHA,
            hop: 1,
            bins: DEFAULT_BINS,
            hidden_sizes: vec![5, 30, 50, 100],
            trials: DEFAULT_TRIALS,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            train: TrainConfig::default(),
            output: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if cfg.version != CONFIG_VERSION {
            return Err(format!("unsupported config version {} (expected {CONFIG_VERSION})", cfg.version));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|m| Error::parse(path, m))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.shapes.is_empty() {
            return fail("no window shapes");
        }
        if self.lengths.is_empty() {
            return fail("no window lengths");
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return fail("hidden sizes must be a non-empty list of positive integers");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.hop == 0 || self.bins == 0 {
            return fail("hop and bins must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail("train_fraction must lie in (0, 1)");
        }
        self.train.validate()?;
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            shapes: self.shapes.clone(),
            lengths: self.lengths.clone(),
            alpha: self.alpha,
            hop: self.hop,
            bins: self.bins,
            hidden_sizes: self.hidden_sizes.clone(),
            trials: self.trials,
            base_seed: self.seed,
            train_fraction: self.train_fraction,
            train: self.train.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn write_effective(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(EFFECTIVE_CONFIG_FILE);
        fs::write(&path, self.to_json() + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
