//! Deterministic federated-learning simulation for long-tailed emoji
//! category prediction.
//!
//! The pipeline runs raw tweets through [`corpus`] (emoji extraction,
//! explosion, normalization), [`dataset`] (splits, balancing, hashed
//! features, synthetic corpora), [`model`] (reference classifiers and SGD)
//! and [`fedsim`] (partitioning, client sampling, aggregation and the
//! FedAvg / FedProx / CausalFedGSD round loops), scoring with [`metrics`].

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod fedsim;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{Error, ErrorKind, Result};
