//! Hybrid short-term forecasting: successive variational mode decomposition,
//! swarm-tuned least-squares SVM regressors per mode, and an LSTM model of
//! the decomposition residual.

pub mod error;
pub mod ebqpso;
pub mod lssvm;
pub mod lstm;
pub mod metrics;
pub mod pipeline;
pub mod svmd;

pub use error::{Error, Result};
