//! Random-walk view of a consensus matrix: transition probabilities, the
//! Perron cluster of eigenvalues near 1, and the number-of-clusters driver.

mod part1;
mod spectrum;

pub use part1::{icc_part1, Part1Config, Part1Outcome, Part1Round, DEFAULT_MAX_REFINEMENTS};
pub use spectrum::{
    deviation_from_reducibility, perron_gap, spectrum, transition_matrix, Affinity, BlockPartition, SpectrumReport,
    TransitionView, DEFAULT_M_MAX,
};
