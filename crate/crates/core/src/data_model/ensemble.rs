use super::partition::Clustering;
use crate::cluster::Algorithm;
use crate::dimred::ReductionMethod;
use crate::error::{IccError, Result};

/// Where one ensemble member came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub algorithm: Algorithm,
    /// Identifier of the data input (e.g. `svd-r10`, `raw`, `consensus`).
    pub input: String,
    pub reduction: Option<ReductionMethod>,
    pub rank: Option<usize>,
    /// The requested number of clusters k̃.
    pub k_requested: usize,
    pub seed: u64,
}

/// A set of clusterings of the same `n` objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    n: usize,
    clusterings: Vec<Clustering>,
    provenance: Vec<Provenance>,
}

impl Ensemble {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            clusterings: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push(&mut self, clustering: Clustering, provenance: Provenance) -> Result<()> {
        if clustering.len() != self.n {
            return Err(IccError::LengthMismatch {
                expected: self.n,
                found: clustering.len(),
            });
        }
        self.clusterings.push(clustering);
        self.provenance.push(provenance);
        Ok(())
    }

    /// Builds an ensemble from bare clusterings with placeholder provenance.
    pub fn from_clusterings(clusterings: Vec<Clustering>) -> Result<Self> {
        let n = clusterings.first().ok_or(IccError::Empty("ensemble"))?.len();
        let mut e = Self::new(n);
        for c in clusterings {
            let k = c.k();
            e.push(
                c,
                Provenance {
                    algorithm: Algorithm::Kmeans,
                    input: "external".into(),
                    reduction: None,
                    rank: None,
                    k_requested: k,
                    seed: 0,
                },
            )?;
        }
        Ok(e)
    }

    /// Number of objects partitioned.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of clusterings T.
    pub fn len(&self) -> usize {
        self.clusterings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusterings.is_empty()
    }

    pub fn clusterings(&self) -> &[Clustering] {
        &self.clusterings
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Clustering, &Provenance)> {
        self.clusterings.iter().zip(&self.provenance)
    }
}
