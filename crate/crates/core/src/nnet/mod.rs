//! Bidirectional LSTM classifier trained by backpropagation through time with
//! SGD with momentum.

mod io;
mod lstm;
mod matrix;
mod model;
mod train;

use thiserror::Error;

pub use io::{decode_model, encode_model, read_model, write_model, BlockInfo, ModelDescriptor, MODEL_MAGIC};
pub use lstm::{cell_step, LstmDirectionParams};
pub use matrix::Matrix;
pub use model::{
    backward_example, batch_gradients, batch_loss, forward, init_model, init_model_with_input, loss, BiLayer,
    BiLstmModel, ForwardCache, Gradients, NUM_CLASSES, NUM_LAYERS,
};
pub use train::{argmax, predict, predict_proba, sgdm_step, sgdm_update, train, train_from, TrainConfig, TrainHistory};

#[derive(Debug, Error, PartialEq)]
pub enum NnetError {
    #[error("empty input sequence")]
    EmptySequence,
    #[error("expected {expected} inputs per time step, got {got}")]
    InputSize { expected: usize, got: usize },
    #[error("training needs examples of both classes")]
    SingleClassDataset,
    #[error("training needs at least 2 examples, got {0}")]
    TooFewExamples(usize),
    #[error("example {0} has no label")]
    UnlabeledExample(String),
    #[error("example {0} has no frames")]
    EmptyExample(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("bad model file: {0}")]
    BadModelFile(String),
}

impl NnetError {
    pub(crate) fn is_io(&self) -> bool {
        matches!(self, NnetError::BadModelFile(_))
    }
}
