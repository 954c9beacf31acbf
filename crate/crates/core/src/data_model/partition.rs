use std::collections::HashMap;
use std::hash::Hash;

use super::assignment::max_weight_matching;
use crate::error::{IccError, Result};

/// A hard partition of `n` objects into `k` non-empty clusters.
///
/// Labels are kept in canonical form: cluster ids are numbered in order of
/// first appearance, so two equal set partitions have identical label
/// vectors and partition equality is a plain vector comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    labels: Vec<usize>,
    k: usize,
}

impl Clustering {
    pub fn from_labels<T: Hash + Eq + Copy>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(IccError::Empty("label vector"));
        }
        let mut ids: HashMap<T, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self { labels, k: ids.len() })
    }

    /// All `n` objects in one cluster.
    pub fn single(n: usize) -> Result<Self> {
        Self::from_labels(&vec![0usize; n])
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Member indices of each cluster, ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l].push(i);
        }
        blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn same_partition(&self, other: &Self) -> Result<bool> {
        check_len(self.len(), other.len())?;
        Ok(self.labels == other.labels)
    }
}

pub fn partition_from_labels<T: Hash + Eq + Copy>(raw: &[T]) -> Result<Clustering> {
    Clustering::from_labels(raw)
}

pub fn partitions_equal(a: &Clustering, b: &Clustering) -> Result<bool> {
    a.same_partition(b)
}

/// Fraction of objects classified correctly under the best one-to-one
/// matching of predicted clusters to true classes. Clusters left unmatched
/// (when the two sides have different `k`) contribute nothing.
pub fn accuracy(pred: &Clustering, truth: &Clustering) -> Result<f64> {
    check_len(truth.len(), pred.len())?;
    let mut confusion = vec![vec![0u64; truth.k()]; pred.k()];
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        confusion[p][t] += 1;
    }
    let matched = max_weight_matching(&confusion);
    Ok(matched as f64 / pred.len() as f64)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(IccError::LengthMismatch { expected, found });
    }
    Ok(())
}
