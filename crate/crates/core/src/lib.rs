//! Tooling for changing-priors out-of-distribution evaluation of
//! question-answering datasets: split construction, answer-prior baselines,
//! a shallow learned model with a random-feature regularizer, and an
//! evaluation harness that audits how gamable a split is.

pub mod domain;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod predictors;
pub mod priors;
pub mod splitter;
pub mod stats;

pub use error::{Error, Result};
