use nalgebra::DMatrix;

use crate::cluster::SimilarityMatrix;
use crate::data_model::{Clustering, DataMatrix, Ensemble};
use crate::error::{IccError, Result};

/// Co-clustering counts: entry `(i, j)` is the number of clusterings that
/// put objects `i` and `j` together. The diagonal always equals `total`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    counts: DMatrix<u32>,
    total: u32,
    tau_applied: f64,
}

impl ConsensusMatrix {
    /// Validates a raw count matrix: square, symmetric, diagonal `total`,
    /// entries at most `total`.
    pub fn from_counts(counts: DMatrix<u32>, total: u32) -> Result<Self> {
        let (n, m) = counts.shape();
        if n != m {
            return Err(IccError::InvalidShape {
                rows: n,
                cols: m,
                reason: "consensus matrix must be square",
            });
        }
        if n == 0 {
            return Err(IccError::Empty("consensus matrix"));
        }
        if total == 0 {
            return Err(IccError::InvalidParameter {
                name: "total",
                reason: "at least one clustering is required".into(),
            });
        }
        for r in 0..n {
            if counts[(r, r)] != total {
                return Err(IccError::InvalidParameter {
                    name: "counts",
                    reason: format!("diagonal entry {r} is {} but total is {total}", counts[(r, r)]),
                });
            }
            for c in r + 1..n {
                if counts[(r, c)] != counts[(c, r)] {
                    return Err(IccError::NotSymmetric { row: r, col: c });
                }
                if counts[(r, c)] > total {
                    return Err(IccError::InvalidParameter {
                        name: "counts",
                        reason: format!("entry ({r}, {c}) exceeds total {total}"),
                    });
                }
            }
        }
        Ok(Self {
            counts,
            total,
            tau_applied: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.counts.nrows()
    }

    pub fn counts(&self) -> &DMatrix<u32> {
        &self.counts
    }

    /// Number of clusterings T that were summed.
    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn tau_applied(&self) -> f64 {
        self.tau_applied
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.counts.map(f64::from)
    }

    pub fn to_similarity(&self) -> Result<SimilarityMatrix> {
        SimilarityMatrix::new(self.to_f64())
    }

    /// The rows of M as feature vectors.
    pub fn as_data(&self) -> Result<DataMatrix> {
        DataMatrix::from_dense(self.to_f64())
    }
}

/// `A_ij = 1` iff `i` and `j` share a cluster.
pub fn adjacency(c: &Clustering) -> DMatrix<u8> {
    let labels = c.labels();
    let n = labels.len();
    DMatrix::from_fn(n, n, |r, col| u8::from(labels[r] == labels[col]))
}

/// Sum of the adjacency matrices of every clustering in `e`.
pub fn build_consensus(e: &Ensemble) -> Result<ConsensusMatrix> {
    if e.is_empty() {
        return Err(IccError::Empty("ensemble"));
    }
    let n = e.n();
    let total = u32::try_from(e.len()).map_err(|_| IccError::InvalidParameter {
        name: "ensemble",
        reason: "too many clusterings".into(),
    })?;
    let mut counts = DMatrix::<u32>::zeros(n, n);
    for c in e.clusterings() {
        if c.len() != n {
            return Err(IccError::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
        for block in c.blocks() {
            for &i in &block {
                for &j in &block {
                    counts[(i, j)] += 1;
                }
            }
        }
    }
    Ok(ConsensusMatrix {
        counts,
        total,
        tau_applied: 0.0,
    })
}

/// Zeroes every off-diagonal entry with `M_ij < tau·T`.
pub fn apply_intolerance(cm: &ConsensusMatrix, tau: f64) -> Result<ConsensusMatrix> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(IccError::InvalidParameter {
            name: "tau",
            reason: format!("{tau} is outside [0, 1]"),
        });
    }
    let cut = tau * f64::from(cm.total);
    let mut counts = cm.counts.clone();
    let n = cm.n();
    for c in 0..n {
        for r in 0..n {
            if r != c && f64::from(counts[(r, c)]) < cut {
                counts[(r, c)] = 0;
            }
        }
    }
    Ok(ConsensusMatrix {
        counts,
        total: cm.total,
        tau_applied: tau,
    })
}
