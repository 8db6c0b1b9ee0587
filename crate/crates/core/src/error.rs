use std::path::PathBuf;

use thiserror::Error;

use crate::{eval, features, ingest, nnet, synth, windows};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Window(#[from] windows::WindowError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Nnet(#[from] nnet::NnetError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the environment (files, formats) rather
    /// than by the numerical pipeline. The CLI maps these to exit code 2.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Config(_) => true,
            Error::Ingest(e) => e.is_io(),
            Error::Nnet(e) => e.is_io(),
            _ => false,
        }
    }
}
