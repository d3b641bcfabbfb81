//! Dense layer library with analytic backward passes.
//!
//! Every forward pass returns the layer output together with a cache of
//! the activations the matching backward pass needs. Backward consumes
//! the cache by reference, so a backward call without a prior forward is
//! unrepresentable. All functions are pure given inputs plus an explicit
//! seed; mutation of running statistics is an explicit separate call
//! left to the owning context.

mod batchnorm;
mod conv;
mod dropout;
mod ffnn;
mod init;
mod lstm;

pub use batchnorm::{batchnorm_backward, batchnorm_forward, BatchNormCache, BatchNormState};
pub use conv::{conv1d_backward, conv1d_forward, Conv1dCache, ConvSpec};
pub use dropout::{dropout, dropout_backward, DropoutCache};
pub use ffnn::{ffnn_backward, ffnn_forward, FfnnCache};
pub use init::xavier_init;
pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmGrads, LstmParams};

/// Whether a layer runs with training-only behaviour (dropout masks,
/// batch statistics) or deterministic evaluation behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("input too short: {got} time steps, need more than {min}")]
    InputTooShort { got: usize, min: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
