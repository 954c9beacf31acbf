//! Artifacts written after a run.
//!
//! * `results.json`: versioned summary, see [`Results`].
//! * `eigenvalues.csv`: `round,index,eigenvalue`; rounds count from 1.
//! * `consensus.mtx`: the final consensus counts, symmetric coordinate.
//! * `heatmap.csv`: `row,col,value` nonzero counts with rows and columns
//!   in block order (`block_order` in the summary maps positions to objects).
//! * `histogram.csv`: `bin_lo,bin_hi,consensus,cosine` counts of the
//!   off-diagonal consensus values `M_ij/T` and of the cosine similarities
//!   of the input rows (negatives clipped to 0).

use std::io::Write;
use std::path::Path;

use icc_core::cluster::SimilarityMatrix;
use icc_core::consensus::ConsensusMatrix;
use icc_core::data_model::{accuracy, Clustering, Ensemble};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result, SCHEMA_VERSION};
use crate::io::{write_consensus, write_file, LoadedMatrix};
use crate::pipeline::Analysis;

pub const RESULTS_FILE: &str = "results.json";
pub const EIGENVALUES_FILE: &str = "eigenvalues.csv";
pub const CONSENSUS_FILE: &str = "consensus.mtx";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";

#[derive(Debug, Serialize)]
pub struct Results {
    pub schema_version: u32,
    pub mode: String,
    pub status: String,
    pub n: usize,
    pub m: usize,
    pub k_estimate: Option<usize>,
    /// Number of clusters in `labels`.
    pub k: Option<usize>,
    pub estimation_rounds: Vec<EstimationRound>,
    pub vote_rounds: Vec<VoteSummary>,
    pub labels: Option<Vec<usize>>,
    pub cluster_sizes: Option<Vec<usize>>,
    pub accuracy: Option<f64>,
    pub consensus_total: u32,
    pub block_order: Vec<usize>,
    pub config: ConfigEcho,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct EstimationRound {
    pub round: usize,
    pub clusterings: usize,
    pub gap_index: usize,
    pub gap_size: f64,
    pub k_estimate: usize,
}

#[derive(Debug, Serialize)]
pub struct VoteSummary {
    pub round: usize,
    pub clusterings: usize,
    pub agreement_count: usize,
    pub majority: bool,
    /// Mean accuracy of the round's clusterings, when labels are known.
    pub mean_accuracy: Option<f64>,
}

/// The settings that determine the results; output location and worker
/// count are left out so reruns elsewhere compare equal.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub format: String,
    pub transpose: bool,
    pub algorithms: Vec<String>,
    pub reductions: Vec<String>,
    pub include_raw: bool,
    pub k_values: Vec<usize>,
    pub k: Option<usize>,
    pub tau: f64,
    pub m_max: usize,
    pub max_rounds: usize,
    pub max_refinements: usize,
    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
    pub seed: u64,
}

fn mean_accuracy(e: &Ensemble, truth: Option<&Clustering>) -> Option<f64> {
    let truth = truth?;
    let total: f64 = e.clusterings().iter().map(|c| accuracy(c, truth).unwrap_or(0.0)).sum();
    Some(total / e.len() as f64)
}

/// Objects sorted by cluster label, ties by index.
pub fn block_order(labels: Option<&Clustering>, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(l) = labels {
        order.sort_by_key(|&i| (l.labels()[i], i));
    }
    order
}

pub fn results(config: &RunConfig, loaded: &LoadedMatrix, a: &Analysis) -> Results {
    let truth = loaded.truth.as_ref();
    let estimation_rounds = a
        .part1
        .iter()
        .flat_map(|p| &p.rounds)
        .map(|r| EstimationRound {
            round: r.round_index,
            clusterings: r.ensemble.len(),
            gap_index: r.spectrum.gap_index,
            gap_size: r.spectrum.gap_size,
            k_estimate: r.spectrum.k_estimate,
        })
        .collect();
    let vote_rounds = a
        .part2
        .iter()
        .flat_map(|p| &p.rounds)
        .map(|r| VoteSummary {
            round: r.round_index,
            clusterings: r.clusterings.len(),
            agreement_count: r.agreement_count,
            majority: r.agreed.is_some(),
            mean_accuracy: mean_accuracy(&r.clusterings, truth),
        })
        .collect();
    let labels = a.labels.as_ref();
    Results {
        schema_version: SCHEMA_VERSION,
        mode: a.mode.id().into(),
        status: a.status.id().into(),
        n: a.n,
        m: a.m,
        k_estimate: a.k_estimate,
        k: labels.map(Clustering::k),
        estimation_rounds,
        vote_rounds,
        labels: labels.map(|l| l.labels().to_vec()),
        cluster_sizes: labels.map(Clustering::sizes),
        accuracy: labels.zip(truth).and_then(|(l, t)| accuracy(l, t).ok()),
        consensus_total: a.final_cm.total(),
        block_order: block_order(labels, a.n),
        config: ConfigEcho {
            input: config.input.display().to_string(),
            format: config.format.id().into(),
            transpose: config.transpose,
            algorithms: config.algorithms.iter().map(|x| x.id().into()).collect(),
            reductions: a.reductions.iter().map(|(m, r)| format!("{m}-r{r}")).collect(),
            include_raw: config.include_raw,
            k_values: a.k_values.clone(),
            k: config.k,
            tau: config.tau,
            m_max: config.m_max,
            max_rounds: config.max_rounds,
            max_refinements: config.max_refinements,
            kmeans_restarts: config.options.kmeans_restarts,
            kmeans_max_iters: config.options.kmeans_max_iters,
            seed: config.seed,
        },
        warnings: a.warnings.clone(),
    }
}

pub fn write_eigenvalues(w: &mut dyn Write, a: &Analysis) -> std::io::Result<()> {
    writeln!(w, "round,index,eigenvalue")?;
    for (round, s) in a.spectra.iter().enumerate() {
        for (i, v) in s.eigenvalues.iter().enumerate() {
            writeln!(w, "{},{},{v:?}", round + 1, i + 1)?;
        }
    }
    Ok(())
}

pub fn write_heatmap(w: &mut dyn Write, cm: &ConsensusMatrix, order: &[usize]) -> std::io::Result<()> {
    let counts = cm.counts();
    writeln!(w, "row,col,value")?;
    for (r, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            let v = counts[(i, j)];
            if v > 0 {
                writeln!(w, "{r},{c},{v}")?;
            }
        }
    }
    Ok(())
}

/// Counts of the strict upper triangle of `values` in `bins` equal bins
/// over [0, 1]; 1 falls in the last bin.
pub fn histogram(values: &nalgebra::DMatrix<f64>, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let n = values.nrows();
    for c in 1..n {
        for r in 0..c {
            let v = values[(r, c)].clamp(0.0, 1.0);
            counts[((v * bins as f64) as usize).min(bins - 1)] += 1;
        }
    }
    counts
}

pub fn write_histogram(w: &mut dyn Write, consensus: &[u64], cosine: &[u64]) -> std::io::Result<()> {
    let bins = consensus.len();
    writeln!(w, "bin_lo,bin_hi,consensus,cosine")?;
    for b in 0..bins {
        let lo = b as f64 / bins as f64;
        let hi = (b + 1) as f64 / bins as f64;
        writeln!(w, "{lo:?},{hi:?},{},{}", consensus[b], cosine[b])?;
    }
    Ok(())
}

pub fn write_artifacts(config: &RunConfig, loaded: &LoadedMatrix, a: &Analysis) -> Result<()> {
    let dir = &config.output;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let summary = results(config, loaded, a);
    let json = serde_json::to_string_pretty(&summary).expect("results serialize");
    write_file(&dir.join(RESULTS_FILE), |w| writeln!(w, "{json}"))?;
    write_file(&dir.join(EIGENVALUES_FILE), |w| write_eigenvalues(w, a))?;
    write_file(&dir.join(CONSENSUS_FILE), |w| write_consensus(w, &a.final_cm))?;
    write_file(&dir.join(HEATMAP_FILE), |w| {
        write_heatmap(w, &a.final_cm, &summary.block_order)
    })?;

    let total = f64::from(a.final_cm.total());
    let fractions = a.final_cm.to_f64() / total;
    let cosine = SimilarityMatrix::cosine(&loaded.data)?;
    let consensus_counts = histogram(&fractions, config.histogram_bins);
    let cosine_counts = histogram(cosine.values(), config.histogram_bins);
    write_file(&dir.join(HISTOGRAM_FILE), |w| {
        write_histogram(w, &consensus_counts, &cosine_counts)
    })
}

/// Reads a written summary back as generic JSON.
pub fn read_results(dir: &Path) -> Result<serde_json::Value> {
    let path = dir.join(RESULTS_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        source_name: path.display().to_string(),
        line: e.line() as u64,
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use icc_core::consensus::build_consensus;
    use nalgebra::DMatrix;

    #[test]
    fn block_order_groups_labels() {
        let l = Clustering::from_labels(&[0, 1, 0, 2, 1]).unwrap();
        assert_eq!(block_order(Some(&l), 5), vec![0, 2, 1, 4, 3]);
        assert_eq!(block_order(None, 3), vec![0, 1, 2]);
    }

    #[test]
    fn heatmap_is_block_diagonal_in_block_order() {
        let l = Clustering::from_labels(&[0, 1, 0, 1]).unwrap();
        let cm = build_consensus(&Ensemble::from_clusterings(vec![l.clone()]).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_heatmap(&mut buf, &cm, &block_order(Some(&l), 4)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cells: Vec<(usize, usize)> = text
            .lines()
            .skip(1)
            .map(|line| {
                let f: Vec<usize> = line.split(',').map(|x| x.parse().unwrap()).collect();
                (f[0], f[1])
            })
            .collect();
        assert_eq!(cells.len(), 8);
        assert!(cells.iter().all(|&(r, c)| r / 2 == c / 2));
    }

    #[test]
    fn histogram_bins_upper_triangle() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.55, 1.0, 0.55, 1.0]);
        assert_eq!(histogram(&m, 4), vec![1, 0, 1, 1]);
        assert_eq!(histogram(&m, 1), vec![3]);
    }
}
