//! Iterative consensus clustering: ensembles of clusterings over reduced
//! representations, consensus matrices, Perron-gap estimation of the number
//! of clusters, and iterated majority voting.

pub mod cluster;
pub mod consensus;
pub mod data_model;
pub mod dimred;
mod error;
pub mod linalg;
pub mod perron;
pub mod synth;

pub use error::{IccError, Result};
