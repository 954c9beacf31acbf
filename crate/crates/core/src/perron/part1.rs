use super::spectrum::{spectrum, SpectrumReport, DEFAULT_M_MAX};
use crate::cluster::{Algorithm, AlgorithmOptions};
use crate::consensus::{
    apply_intolerance, build_consensus, derive_seed, reduction_inputs, run_ensemble, ConsensusMatrix, EnsembleInput,
};
use crate::data_model::{DataMatrix, Ensemble};
use crate::dimred::ReductionMethod;
use crate::error::{IccError, Result};

/// Refinement is opt-in: on cleanly separated data with every k̃ above the
/// true count, reclustering the consensus matrix entrenches the forced
/// extra splits.
pub const DEFAULT_MAX_REFINEMENTS: usize = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Part1Config {
    /// (method, rank) pairs; each yields one ensemble input.
    pub reductions: Vec<(ReductionMethod, usize)>,
    /// Also cluster the unreduced matrix.
    pub include_raw: bool,
    pub algorithms: Vec<Algorithm>,
    /// The k̃ values every algorithm is run with.
    pub ks: Vec<usize>,
    pub tau: f64,
    /// Number of eigenvalues examined; clamped to n.
    pub m_max: usize,
    /// Extra rounds that recluster the consensus matrix (through the same
    /// reductions) until k repeats.
    pub max_refinements: usize,
    pub options: AlgorithmOptions,
}

impl Part1Config {
    pub fn new(reductions: Vec<(ReductionMethod, usize)>, algorithms: Vec<Algorithm>, ks: Vec<usize>) -> Self {
        Self {
            reductions,
            include_raw: false,
            algorithms,
            ks,
            tau: 0.0,
            m_max: DEFAULT_M_MAX,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            options: AlgorithmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part1Round {
    /// 1-based; round 1 clusters the data, later rounds the previous
    /// consensus matrix.
    pub round_index: usize,
    pub ensemble: Ensemble,
    pub spectrum: SpectrumReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part1Outcome {
    pub k_estimate: usize,
    pub rounds: Vec<Part1Round>,
    /// Thresholded consensus matrix of the last round.
    pub final_cm: ConsensusMatrix,
    pub warnings: Vec<String>,
}

/// Estimates the number of clusters from the Perron gap of the consensus
/// matrix of an ensemble over reductions × algorithms × k̃. The consensus
/// matrix is then clustered again with the same algorithms and k̃ values
/// until two consecutive rounds agree on k or `max_refinements` extra rounds
/// have run.
pub fn icc_part1(x: &DataMatrix, config: &Part1Config, seed: u64) -> Result<Part1Outcome> {
    let n = x.nrows();
    if config.ks.is_empty() {
        return Err(IccError::Empty("k list"));
    }
    if config.reductions.is_empty() && !config.include_raw {
        return Err(IccError::InvalidParameter {
            name: "reductions",
            reason: "no inputs: give at least one reduction or include the raw matrix".into(),
        });
    }
    if !(0.0..=1.0).contains(&config.tau) {
        return Err(IccError::InvalidParameter {
            name: "tau",
            reason: format!("{} is outside [0, 1]", config.tau),
        });
    }
    let m_max = config.m_max.min(n);
    let mut warnings = Vec::new();
    let sqrt_n = (n as f64).sqrt();
    let large: Vec<String> = config
        .ks
        .iter()
        .filter(|&&k| k as f64 >= sqrt_n)
        .map(usize::to_string)
        .collect();
    if !large.is_empty() {
        warnings.push(format!(
            "k values {} are not below sqrt(n) = {sqrt_n:.2}",
            large.join(", ")
        ));
    }

    let mut inputs = build_inputs(x, config, seed, "")?;
    let mut rounds: Vec<Part1Round> = Vec::new();
    for round_index in 1..=config.max_refinements + 1 {
        let round_seed = derive_seed(seed, "part1-round", "", round_index);
        let run = run_ensemble(&inputs, &config.algorithms, &config.ks, round_seed, &config.options)?;
        warnings.extend(run.warnings.into_iter().map(|w| format!("round {round_index}: {w}")));
        let cm = apply_intolerance(&build_consensus(&run.ensemble)?, config.tau)?;
        let report = spectrum(&cm, m_max)?;
        let stable = rounds
            .last()
            .is_some_and(|prev| prev.spectrum.k_estimate == report.k_estimate);
        let k_estimate = report.k_estimate;
        rounds.push(Part1Round {
            round_index,
            ensemble: run.ensemble,
            spectrum: report,
        });
        if stable || round_index == config.max_refinements + 1 {
            return Ok(Part1Outcome {
                k_estimate,
                rounds,
                final_cm: cm,
                warnings,
            });
        }
        inputs = build_inputs(&cm.as_data()?, config, seed, &format!("consensus-r{round_index}-"))?;
    }
    unreachable!("the last round always returns")
}

fn build_inputs(x: &DataMatrix, config: &Part1Config, seed: u64, prefix: &str) -> Result<Vec<EnsembleInput>> {
    let graph = config.algorithms.iter().any(|a| a.needs_similarity());
    let mut inputs = reduction_inputs(x, &config.reductions, config.include_raw, graph, seed)?;
    for input in &mut inputs {
        input.id = format!("{prefix}{}", input.id);
    }
    Ok(inputs)
}
