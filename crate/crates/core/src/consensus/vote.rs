use super::matrix::{apply_intolerance, build_consensus, ConsensusMatrix};
use super::runner::{derive_seed, run_ensemble, EnsembleInput};
use crate::cluster::{Algorithm, AlgorithmOptions};
use crate::data_model::{Clustering, Ensemble};
use crate::error::{IccError, Result};

pub const DEFAULT_MAX_ROUNDS: usize = 10;

/// The most common partition and its vote count. Ties go to the partition
/// that appears first in the ensemble.
pub fn plurality_solution(e: &Ensemble) -> Option<(Clustering, usize)> {
    let mut groups: Vec<(&Clustering, usize)> = Vec::new();
    for c in e.clusterings() {
        match groups.iter_mut().find(|(g, _)| *g == c) {
            Some((_, count)) => *count += 1,
            None => groups.push((c, 1)),
        }
    }
    groups
        .into_iter()
        .fold(None::<(&Clustering, usize)>, |best, g| match best {
            Some(b) if b.1 >= g.1 => Some(b),
            _ => Some(g),
        })
        .map(|(c, n)| (c.clone(), n))
}

/// The partition returned by more than half of the ensemble, if any.
pub fn majority_solution(e: &Ensemble) -> Option<(Clustering, usize)> {
    plurality_solution(e).filter(|(_, count)| 2 * count > e.len())
}

/// What the first voting round clusters.
#[derive(Debug, Clone)]
pub enum Part2Start {
    Consensus(ConsensusMatrix),
    /// Data inputs (raw or reduced), each clustered by every algorithm.
    Inputs(Vec<EnsembleInput>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part2Config {
    pub k: usize,
    pub algorithms: Vec<Algorithm>,
    pub tau: f64,
    pub max_rounds: usize,
    pub options: AlgorithmOptions,
}

impl Part2Config {
    pub fn new(k: usize, algorithms: Vec<Algorithm>) -> Self {
        Self {
            k,
            algorithms,
            tau: 0.0,
            max_rounds: DEFAULT_MAX_ROUNDS,
            options: AlgorithmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteRound {
    /// 1-based.
    pub round_index: usize,
    pub clusterings: Ensemble,
    /// Present iff `agreement_count` is a strict majority.
    pub agreed: Option<Clustering>,
    /// Size of the largest group of identical partitions.
    pub agreement_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part2Outcome {
    pub final_clustering: Clustering,
    pub consensus_reached: bool,
    pub rounds: Vec<VoteRound>,
    /// Consensus of the last round's votes, after intolerance.
    pub final_cm: ConsensusMatrix,
    pub warnings: Vec<String>,
}

/// Iterated voting at a fixed k. Each round clusters the current input with
/// every algorithm; a strict-majority partition ends the loop. Otherwise the
/// round's clusterings are summed into a fresh consensus matrix, thresholded
/// at `tau`, and become the next round's input. After `max_rounds` without
/// a majority the plurality partition is returned, flagged as such.
pub fn icc_part2(start: Part2Start, config: &Part2Config, seed: u64) -> Result<Part2Outcome> {
    if config.k < 2 {
        return Err(IccError::InvalidParameter {
            name: "k",
            reason: "voting needs at least 2 clusters".into(),
        });
    }
    if config.max_rounds == 0 {
        return Err(IccError::InvalidParameter {
            name: "max_rounds",
            reason: "must be at least 1".into(),
        });
    }
    if !(0.0..=1.0).contains(&config.tau) {
        return Err(IccError::InvalidParameter {
            name: "tau",
            reason: format!("{} is outside [0, 1]", config.tau),
        });
    }
    let mut inputs = match start {
        Part2Start::Consensus(cm) => vec![EnsembleInput::consensus("consensus", &cm)?],
        Part2Start::Inputs(inputs) => inputs,
    };
    let mut rounds = Vec::new();
    let mut warnings = Vec::new();
    for round_index in 1..=config.max_rounds {
        let round_seed = derive_seed(seed, "part2-round", "", round_index);
        let run = run_ensemble(&inputs, &config.algorithms, &[config.k], round_seed, &config.options)?;
        warnings.extend(run.warnings.into_iter().map(|w| format!("round {round_index}: {w}")));
        let votes = run.ensemble;
        let (top, count) = plurality_solution(&votes).expect("run_ensemble never returns an empty ensemble");
        let majority = 2 * count > votes.len();
        let cm = apply_intolerance(&build_consensus(&votes)?, config.tau)?;
        rounds.push(VoteRound {
            round_index,
            clusterings: votes,
            agreed: majority.then(|| top.clone()),
            agreement_count: count,
        });
        if majority || round_index == config.max_rounds {
            if !majority {
                warnings.push(format!(
                    "no majority after {round_index} rounds; returning the plurality partition ({count} votes)"
                ));
            }
            return Ok(Part2Outcome {
                final_clustering: top,
                consensus_reached: majority,
                rounds,
                final_cm: cm,
                warnings,
            });
        }
        inputs = vec![EnsembleInput::consensus(format!("consensus-r{round_index}"), &cm)?];
    }
    unreachable!("the last round always returns")
}
