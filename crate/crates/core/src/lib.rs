//! Entanglement negativity of bipartite high-spin states, and a stacked
//! ensemble of from-scratch regressors that learns it from state features.

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod metrics;
pub mod negativity;
pub mod regressors;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rng::RngHandle;
