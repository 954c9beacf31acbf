//! The seven base clustering algorithms. Four work on data matrices
//! (spherical k-means, PDDP, PDDP-k-means, NMF), three on similarity
//! matrices (PIC, NCut, NJW).

mod kmeans;
mod nmf_cluster;
mod pddp;
mod spectral;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::data_model::{Clustering, DataMatrix};
use crate::error::{IccError, Result};

pub use kmeans::{spherical_kmeans, KmeansResult, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS};
pub use nmf_cluster::nmf_cluster;
pub use pddp::{pddp, pddp_kmeans};
pub use spectral::{ncut, ncut_with, njw, njw_with, pic, pic_with};

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Kmeans,
    Pddp,
    PddpKmeans,
    NmfCluster,
    Pic,
    Ncut,
    Njw,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Self::Kmeans,
        Self::Pddp,
        Self::PddpKmeans,
        Self::NmfCluster,
        Self::Pic,
        Self::Ncut,
        Self::Njw,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::Kmeans => "kmeans",
            Self::Pddp => "pddp",
            Self::PddpKmeans => "pddp-kmeans",
            Self::NmfCluster => "nmf",
            Self::Pic => "pic",
            Self::Ncut => "ncut",
            Self::Njw => "njw",
        }
    }

    /// Graph algorithms need a similarity matrix rather than feature rows.
    pub fn needs_similarity(self) -> bool {
        matches!(self, Self::Pic | Self::Ncut | Self::Njw)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = IccError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = match key.as_str() {
            "spherical-kmeans" | "k-means" => "kmeans",
            "nmfcluster" | "nmf-cluster" => "nmf",
            "pddp_kmeans" | "pddpkmeans" => "pddp-kmeans",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|a| a.id() == key)
            .ok_or_else(|| IccError::InvalidParameter {
                name: "algorithm",
                reason: format!(
                    "unknown algorithm {s:?} (expected one of kmeans, pddp, pddp-kmeans, nmf, pic, ncut, njw)"
                ),
            })
    }
}

/// Iteration settings shared by every k-means step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgorithmOptions {
    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
}

impl Default for AlgorithmOptions {
    fn default() -> Self {
        Self {
            kmeans_restarts: DEFAULT_RESTARTS,
            kmeans_max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Symmetric, nonnegative n×n affinity.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: DMatrix<f64>,
}

impl SimilarityMatrix {
    /// Accepts matrices symmetric to `1e-10` (relative to the largest
    /// entry) and stores the exact symmetrization `(S + Sᵀ)/2`.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (n, m) = values.shape();
        if n != m {
            return Err(IccError::InvalidShape {
                rows: n,
                cols: m,
                reason: "similarity matrix must be square",
            });
        }
        if n == 0 {
            return Err(IccError::Empty("similarity matrix"));
        }
        for c in 0..n {
            for r in 0..n {
                let v = values[(r, c)];
                if !v.is_finite() {
                    return Err(IccError::NonFinite { row: r, col: c });
                }
                if v < 0.0 {
                    return Err(IccError::NegativeEntry { row: r, col: c });
                }
            }
        }
        let scale = values.amax().max(1.0);
        for r in 0..n {
            for c in r + 1..n {
                if (values[(r, c)] - values[(c, r)]).abs() > SYMMETRY_TOL * scale {
                    return Err(IccError::NotSymmetric { row: r, col: c });
                }
            }
        }
        let values = (&values + values.transpose()) * 0.5;
        Ok(Self { values })
    }

    /// Pairwise cosine similarity of the rows of `x`, negatives clipped to
    /// zero. Zero rows get similarity 0 to everything but themselves.
    pub fn cosine(x: &DataMatrix) -> Result<Self> {
        let mut d = x.dense().into_owned();
        for r in 0..d.nrows() {
            let norm = d.row(r).norm();
            if norm > 0.0 {
                let row = d.row(r) / norm;
                d.set_row(r, &row);
            }
        }
        let mut s = &d * d.transpose();
        s.apply(|v| *v = v.clamp(0.0, 1.0));
        s.fill_diagonal(1.0);
        Self::new(s)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }
}

/// What an algorithm may consume: feature rows, and optionally a similarity
/// matrix over the same objects for the graph algorithms.
#[derive(Debug, Clone, Copy)]
pub struct ClusterInput<'a> {
    pub data: &'a DataMatrix,
    pub similarity: Option<&'a SimilarityMatrix>,
}

/// Dispatches one algorithm. Graph algorithms fail with `Unsupported` when
/// no similarity matrix is supplied.
pub fn run_algorithm(
    algo: Algorithm,
    input: ClusterInput<'_>,
    k: usize,
    seed: u64,
    opts: &AlgorithmOptions,
) -> Result<Clustering> {
    if algo.needs_similarity() {
        let s = input.similarity.ok_or_else(|| IccError::Unsupported {
            algorithm: algo.id().to_string(),
            input: "data matrix".into(),
            reason: "needs a similarity matrix".into(),
        })?;
        if s.n() != input.data.nrows() {
            return Err(IccError::LengthMismatch {
                expected: input.data.nrows(),
                found: s.n(),
            });
        }
        return match algo {
            Algorithm::Pic => pic_with(s, k, seed, opts),
            Algorithm::Ncut => ncut_with(s, k, seed, opts),
            _ => njw_with(s, k, seed, opts),
        };
    }
    let x = input.data;
    match algo {
        Algorithm::Kmeans => {
            spherical_kmeans(x, k, opts.kmeans_restarts, opts.kmeans_max_iters, seed).map(|r| r.clustering)
        }
        Algorithm::Pddp => pddp(x, k),
        Algorithm::PddpKmeans => pddp_kmeans(x, k, opts.kmeans_max_iters).map(|r| r.clustering),
        Algorithm::NmfCluster => nmf_cluster(x, k, seed),
        _ => unreachable!("graph algorithms handled above"),
    }
}
