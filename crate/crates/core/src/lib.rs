//! Sampling, synthesis and analysis of local optima networks (LONs) for
//! black-box configurable systems.

pub mod error;
pub mod evaluator;
pub mod sampler;
pub mod space;
pub mod lon;
pub mod metrics;
pub mod stability;
pub mod embedding;
pub mod export;
pub mod cli;
