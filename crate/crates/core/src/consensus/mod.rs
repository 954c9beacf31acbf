//! Consensus matrices, ensemble execution and iterated voting.

mod matrix;
mod runner;
mod vote;

pub use matrix::{adjacency, apply_intolerance, build_consensus, ConsensusMatrix};
pub use runner::{derive_seed, reduction_inputs, run_ensemble, EnsembleInput, EnsembleRun};
pub use vote::{
    icc_part2, majority_solution, plurality_solution, Part2Config, Part2Outcome, Part2Start, VoteRound,
    DEFAULT_MAX_ROUNDS,
};
