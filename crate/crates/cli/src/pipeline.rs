//! Estimation and voting driven by a [`RunConfig`].

use icc_core::consensus::{icc_part2, reduction_inputs, ConsensusMatrix, Part2Config, Part2Outcome, Part2Start};
use icc_core::data_model::Clustering;
use icc_core::dimred::ReductionMethod;
use icc_core::perron::{icc_part1, spectrum, Part1Config, Part1Outcome, SpectrumReport};
use icc_core::IccError;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{load_matrix, LoadedMatrix};
use crate::report::write_artifacts;

/// Exit status for a vote that ended on a plurality without a majority.
pub const EXIT_PLURALITY: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// A strict majority of the final round agreed.
    Consensus,
    /// The round cap was hit; the most common partition was kept.
    Plurality,
    /// Estimation only.
    Estimated,
    /// The estimate was 1, so there was nothing to vote on.
    SingleCluster,
}

impl Status {
    pub fn id(self) -> &'static str {
        match self {
            Self::Consensus => "consensus",
            Self::Plurality => "plurality",
            Self::Estimated => "estimated",
            Self::SingleCluster => "single-cluster",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::Plurality => EXIT_PLURALITY,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub mode: Mode,
    pub n: usize,
    pub m: usize,
    pub k_values: Vec<usize>,
    pub reductions: Vec<(ReductionMethod, usize)>,
    pub part1: Option<Part1Outcome>,
    pub part2: Option<Part2Outcome>,
    pub status: Status,
    pub k_estimate: Option<usize>,
    pub labels: Option<Clustering>,
    /// The last consensus matrix built.
    pub final_cm: ConsensusMatrix,
    /// One report per estimation round, or a single report on the final
    /// matrix when estimation was skipped.
    pub spectra: Vec<SpectrumReport>,
    pub warnings: Vec<String>,
}

/// Runs the configured analysis on already loaded data.
pub fn analyze(config: &RunConfig, loaded: &LoadedMatrix) -> Result<Analysis> {
    let x = &loaded.data;
    let (n, m) = (x.nrows(), x.ncols());
    let mut warnings = Vec::new();
    let (reductions, capped) = config.reduction_grid(n.min(m));
    warnings.extend(capped);
    let k_values = config.k_values_for(n);

    let part1 = match config.k {
        Some(k) if k > n => return Err(IccError::InvalidK { k, n }.into()),
        Some(_) => None,
        None => {
            let mut p1 = Part1Config::new(reductions.clone(), config.algorithms.clone(), k_values.clone());
            p1.include_raw = config.include_raw;
            p1.tau = config.tau;
            p1.m_max = config.m_max;
            p1.max_refinements = config.max_refinements;
            p1.options = config.options;
            let out = icc_part1(x, &p1, config.seed)?;
            warnings.extend(out.warnings.iter().map(|w| format!("estimate: {w}")));
            Some(out)
        }
    };
    let k_estimate = part1.as_ref().map(|p| p.k_estimate);
    let k = config.k.or(k_estimate).expect("either given or estimated");

    let spectra: Vec<SpectrumReport> = part1
        .as_ref()
        .map(|p| p.rounds.iter().map(|r| r.spectrum.clone()).collect())
        .unwrap_or_default();
    let done = |part1: Option<Part1Outcome>, warnings, status, labels, final_cm, spectra| Analysis {
        mode: config.mode,
        n,
        m,
        k_values: k_values.clone(),
        reductions: reductions.clone(),
        part1,
        part2: None,
        status,
        k_estimate,
        labels,
        final_cm,
        spectra,
        warnings,
    };

    if let Some(p) = part1.as_ref().filter(|_| config.mode == Mode::EstimateK || k == 1) {
        let cm = p.final_cm.clone();
        if config.mode == Mode::EstimateK {
            return Ok(done(part1, warnings, Status::Estimated, None, cm, spectra));
        }
        warnings.push("estimated k is 1; every object is assigned to one cluster without voting".into());
        let single = Some(Clustering::single(n)?);
        return Ok(done(part1, warnings, Status::SingleCluster, single, cm, spectra));
    }

    let start = match &part1 {
        Some(p) => Part2Start::Consensus(p.final_cm.clone()),
        None => {
            let graph = config.algorithms.iter().any(|a| a.needs_similarity());
            Part2Start::Inputs(reduction_inputs(
                x,
                &reductions,
                config.include_raw,
                graph,
                config.seed,
            )?)
        }
    };
    let mut p2 = Part2Config::new(k, config.algorithms.clone());
    p2.tau = config.tau;
    p2.max_rounds = config.max_rounds;
    p2.options = config.options;
    let out = icc_part2(start, &p2, config.seed)?;
    warnings.extend(out.warnings.iter().map(|w| format!("vote: {w}")));
    let status = if out.consensus_reached {
        Status::Consensus
    } else {
        Status::Plurality
    };
    let spectra = if part1.is_some() {
        spectra
    } else {
        vec![spectrum(&out.final_cm, config.m_max.min(n))?]
    };
    let mut analysis = done(
        part1,
        warnings,
        status,
        Some(out.final_clustering.clone()),
        out.final_cm.clone(),
        spectra,
    );
    analysis.part2 = Some(out);
    Ok(analysis)
}

/// Loads the input, runs the analysis on a pool of `config.threads`
/// workers, and writes every artifact into `config.output`.
pub fn run_full(config: &RunConfig) -> Result<Analysis> {
    config.validate()?;
    let loaded = load_matrix(&config.input, config.format, config.transpose)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {} worker threads: {e}", config.threads)))?;
    let analysis = pool.install(|| analyze(config, &loaded))?;
    write_artifacts(config, &loaded, &analysis)?;
    Ok(analysis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use icc_core::data_model::accuracy;
    use icc_core::synth::{gaussian_blobs, BlobSpec};

    fn quick(mode: Mode) -> RunConfig {
        let mut c = RunConfig::new(mode, "unused.csv");
        c.ranks = vec![4];
        c.options.kmeans_restarts = 10;
        c
    }

    fn blobs(k: usize, per: usize, seed: u64) -> LoadedMatrix {
        let (data, truth) = gaussian_blobs(&BlobSpec::uniform(k, per, 6, 12.0, seed)).unwrap();
        LoadedMatrix {
            data,
            truth: Some(truth),
        }
    }

    #[test]
    fn run_estimates_then_votes() {
        let input = blobs(3, 30, 1);
        let a = analyze(&quick(Mode::Run), &input).unwrap();
        assert_eq!(a.k_estimate, Some(3));
        assert_eq!(a.status, Status::Consensus);
        let labels = a.labels.unwrap();
        assert_eq!(accuracy(&labels, input.truth.as_ref().unwrap()).unwrap(), 1.0);
        assert_eq!(a.spectra.len(), 1);
        assert_eq!(a.k_values, vec![4, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn estimate_only_stops_after_estimation() {
        let a = analyze(&quick(Mode::EstimateK), &blobs(2, 20, 2)).unwrap();
        assert_eq!(a.k_estimate, Some(2));
        assert!(a.labels.is_none() && a.part2.is_none());
        assert_eq!(a.status, Status::Estimated);
    }

    #[test]
    fn given_k_skips_estimation() {
        let mut c = quick(Mode::Cluster);
        c.k = Some(2);
        let a = analyze(&c, &blobs(2, 20, 3)).unwrap();
        assert!(a.part1.is_none());
        assert_eq!(a.k_estimate, None);
        assert_eq!(a.labels.unwrap().k(), 2);
        // the final matrix still gets a spectrum
        assert_eq!(a.spectra.len(), 1);
        assert_eq!(a.spectra[0].k_estimate, 2);
        c.k = Some(500);
        assert!(analyze(&c, &blobs(2, 20, 3)).is_err());
    }

    #[test]
    fn estimate_of_one_yields_a_single_cluster() {
        let (data, _) = gaussian_blobs(&BlobSpec::uniform(1, 120, 6, 1.0, 4)).unwrap();
        let input = LoadedMatrix { data, truth: None };
        let mut c = quick(Mode::Run);
        c.k_values = Some((2..=6).collect());
        let a = analyze(&c, &input).unwrap();
        assert_eq!(a.k_estimate, Some(1));
        assert_eq!(a.status, Status::SingleCluster);
        assert_eq!(a.labels.unwrap().k(), 1);
        assert_eq!(a.status.exit_code(), 0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Consensus.exit_code(), 0);
        assert_eq!(Status::Estimated.exit_code(), 0);
        assert_eq!(Status::Plurality.exit_code(), EXIT_PLURALITY);
    }
}
