//! Shared dataset, partition, and evaluation types.

mod assignment;
mod ensemble;
mod matrix;
mod partition;
mod sparse;

pub use assignment::{max_weight_matching, min_cost_assignment};
pub use ensemble::{Ensemble, Provenance};
pub use matrix::{DataMatrix, Storage};
pub use partition::{accuracy, partition_from_labels, partitions_equal, Clustering};
pub use sparse::CsrMatrix;
