//! Low-rank representations of the data matrix: truncated SVD, PCA, and
//! NMF by alternating constrained least squares.

mod nmf;
mod svd;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::data_model::DataMatrix;
use crate::error::{IccError, Result};

pub use nmf::{nmf_acls, NmfFactors, DEFAULT_NMF_MAX_ITERS, DEFAULT_NMF_TOL};
pub use svd::{truncated_svd, Svd, DENSE_SVD_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReductionMethod {
    Svd,
    Pca,
    Nmf,
}

impl ReductionMethod {
    pub const ALL: [ReductionMethod; 3] = [Self::Svd, Self::Pca, Self::Nmf];

    pub fn id(self) -> &'static str {
        match self {
            Self::Svd => "svd",
            Self::Pca => "pca",
            Self::Nmf => "nmf",
        }
    }
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ReductionMethod {
    type Err = IccError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.id() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| IccError::InvalidParameter {
                name: "reduction",
                reason: format!("unknown method {s:?} (expected svd, pca or nmf)"),
            })
    }
}

/// An n×r representation of the objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub values: DMatrix<f64>,
    pub method: ReductionMethod,
    pub rank: usize,
    /// Fingerprint of the matrix this was computed from.
    pub source_hash: u64,
}

impl ReducedMatrix {
    pub fn id(&self) -> String {
        format!("{}-r{}", self.method, self.rank)
    }

    pub fn to_data(&self) -> Result<DataMatrix> {
        DataMatrix::from_dense(self.values.clone())
    }
}

/// Reduces `x` to `rank` columns.
///
/// * `svd`: `U·diag(S)` of `x`.
/// * `pca`: `U·diag(S)` of the column-wise z-scored `x`; constant columns
///   are dropped first.
/// * `nmf`: the `W` factor of [`nmf_acls`] with default iteration settings.
pub fn reduce(x: &DataMatrix, method: ReductionMethod, rank: usize, seed: u64) -> Result<ReducedMatrix> {
    let values = match method {
        ReductionMethod::Svd => truncated_svd(x, rank)?.scores(),
        ReductionMethod::Pca => {
            let z = zscore_columns(&x.dense())?;
            truncated_svd(&DataMatrix::from_dense(z)?, rank)?.scores()
        }
        ReductionMethod::Nmf => nmf_acls(x, rank, DEFAULT_NMF_MAX_ITERS, DEFAULT_NMF_TOL, seed)?.w,
    };
    Ok(ReducedMatrix {
        values,
        method,
        rank,
        source_hash: x.fingerprint(),
    })
}

/// Centers each column and scales it to unit sample standard deviation,
/// dropping columns with zero variance.
pub fn zscore_columns(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let mut kept: Vec<DMatrix<f64>> = Vec::new();
    for col in x.column_iter() {
        let mean = col.mean();
        let spread = col.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        if spread <= 1e-12 * mean.abs().max(1.0) {
            continue;
        }
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        kept.push(DMatrix::from_iterator(n, 1, col.iter().map(|v| (v - mean) / sd)));
    }
    if kept.is_empty() {
        return Err(IccError::Degenerate("every column has zero variance".into()));
    }
    let mut z = DMatrix::zeros(n, kept.len());
    for (j, c) in kept.iter().enumerate() {
        z.set_column(j, &c.column(0));
    }
    Ok(z)
}
