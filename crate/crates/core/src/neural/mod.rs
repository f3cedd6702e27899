//! A small dense neural stack: one LSTM layer, layer normalization, ReLU
//! MLP heads, reverse-mode gradients through time, optimizers, central
//! difference gradient checking and JSON checkpoints.
//!
//! All parameters of a network live in one flat `Vec<f64>` whose layout is a
//! pure function of the configured widths, so optimizers, gradient checks and
//! checkpoints work on plain slices.

mod checkpoint;
mod gradcheck;
mod network;
mod ops;
mod optim;
mod tensor;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gradcheck::{
    gradient_check, gradient_check_indices, GradCheckReport, RELATIVE_ERROR_FLOOR,
};
pub use network::{
    Gradients, NetOutput, NetworkConfig, NetworkParams, OutputGrad, ParamBlock, ParamLayout,
    RecurrentState, SequenceTrace,
};
pub use ops::{layer_norm, lstm_step, mlp_forward, sigmoid, DenseLayer, LstmWeights};
pub use optim::{clip_global_norm, Optimizer, OptimizerConfig};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NeuralError {
    fn from(e: std::io::Error) -> Self {
        NeuralError::Io(e.to_string())
    }
}

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<(), NeuralError> {
    if got != expected {
        return Err(NeuralError::Dimension(format!(
            "{what}: got {got}, expected {expected}"
        )));
    }
    Ok(())
}
