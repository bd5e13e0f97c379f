//! Learn a discrete Bayesian network from device telemetry, extract Markov
//! blankets around service level objectives, and infer the device
//! configuration most likely to fulfil all of them.

pub mod error;
pub mod graph;
pub mod infer;
pub mod learn;
pub mod reconfig;
pub mod sim;
pub mod slo;
pub mod telemetry;

pub use error::{Error, Result};
