use super::kmeans::{argmax, check_k};
use crate::data_model::{Clustering, DataMatrix};
use crate::dimred::{nmf_acls, DEFAULT_NMF_MAX_ITERS, DEFAULT_NMF_TOL};
use crate::error::{IccError, Result};

/// Rank-`k` NMF of `x`; each object goes to the column of `W` holding its
/// largest weight (lowest column on ties). Fails with `EmptyClusters` when
/// some column never wins.
pub fn nmf_cluster(x: &DataMatrix, k: usize, seed: u64) -> Result<Clustering> {
    check_k(k, x.nrows())?;
    let f = nmf_acls(x, k, DEFAULT_NMF_MAX_ITERS, DEFAULT_NMF_TOL, seed)?;
    let labels: Vec<usize> = (0..f.w.nrows()).map(|i| argmax(f.w.row(i).iter().copied())).collect();
    let c = Clustering::from_labels(&labels)?;
    if c.k() < k {
        return Err(IccError::EmptyClusters {
            requested: k,
            found: c.k(),
        });
    }
    Ok(c)
}
