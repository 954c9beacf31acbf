use std::borrow::Cow;

use nalgebra::DMatrix;

use crate::cluster::SimilarityMatrix;
use crate::consensus::ConsensusMatrix;
use crate::data_model::Clustering;
use crate::error::{IccError, Result};
use crate::linalg::top_sym_eigen;

pub const DEFAULT_M_MAX: usize = 20;
const STOCHASTIC_TOL: f64 = 1e-10;

/// A symmetric nonnegative affinity defining a random walk.
pub trait Affinity {
    fn affinity(&self) -> Cow<'_, DMatrix<f64>>;
}

impl Affinity for ConsensusMatrix {
    fn affinity(&self) -> Cow<'_, DMatrix<f64>> {
        Cow::Owned(self.to_f64())
    }
}

impl Affinity for SimilarityMatrix {
    fn affinity(&self) -> Cow<'_, DMatrix<f64>> {
        Cow::Borrowed(self.values())
    }
}

/// `P = D⁻¹M` with `D = diag(M·e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionView {
    pub p: DMatrix<f64>,
    pub degrees: Vec<f64>,
}

impl TransitionView {
    /// Wraps an already row-stochastic matrix; `degrees` are all 1.
    pub fn from_stochastic(p: DMatrix<f64>) -> Result<Self> {
        let (n, m) = p.shape();
        if n != m || n == 0 {
            return Err(IccError::InvalidShape {
                rows: n,
                cols: m,
                reason: "transition matrix must be square and non-empty",
            });
        }
        for r in 0..n {
            for c in 0..n {
                if !p[(r, c)].is_finite() {
                    return Err(IccError::NonFinite { row: r, col: c });
                }
                if p[(r, c)] < 0.0 {
                    return Err(IccError::NegativeEntry { row: r, col: c });
                }
            }
            let sum: f64 = p.row(r).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(IccError::InvalidParameter {
                    name: "transition matrix",
                    reason: format!("row {r} sums to {sum}"),
                });
            }
        }
        Ok(Self {
            p,
            degrees: vec![1.0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }
}

pub fn transition_matrix<A: Affinity + ?Sized>(a: &A) -> Result<TransitionView> {
    let m = a.affinity();
    let degrees = degrees(&m)?;
    let mut p = m.into_owned();
    for (r, d) in degrees.iter().enumerate() {
        let mut row = p.row_mut(r);
        row /= *d;
    }
    Ok(TransitionView { p, degrees })
}

fn degrees(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d: Vec<f64> = m.row_iter().map(|r| r.sum()).collect();
    match d.iter().position(|&v| v <= 0.0) {
        Some(i) => Err(IccError::ZeroRow(i)),
        None => Ok(d),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// The `m_max` largest eigenvalues of `P`, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// 1-based `i` maximizing `λ_i − λ_{i+1}`.
    pub gap_index: usize,
    pub gap_size: f64,
    pub k_estimate: usize,
}

/// Eigenvalues of `P = D⁻¹M`, computed as `1 − μ` for the `m_max` smallest
/// eigenvalues `μ` of the symmetric `I − D^{-1/2} M D^{-1/2}`, together with
/// the Perron gap.
pub fn spectrum<A: Affinity + ?Sized>(a: &A, m_max: usize) -> Result<SpectrumReport> {
    let m = a.affinity();
    let n = m.nrows();
    if m_max < 2 || m_max > n {
        return Err(IccError::InvalidParameter {
            name: "m_max",
            reason: format!("{m_max} is outside 2..={n}"),
        });
    }
    let d = degrees(&m)?;
    let inv_sqrt: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    // −L = D^{-1/2} M D^{-1/2} − I; its top eigenvalues are −μ for the smallest μ
    let neg_laplacian = DMatrix::from_fn(n, n, |r, c| {
        let off = m[(r, c)] * inv_sqrt[r] * inv_sqrt[c];
        if r == c {
            off - 1.0
        } else {
            off
        }
    });
    let (neg_mu, _) = top_sym_eigen(&neg_laplacian, m_max)?;
    let eigenvalues: Vec<f64> = neg_mu.iter().map(|v| 1.0 + v).collect();
    let (gap_index, gap_size) = perron_gap(&eigenvalues)?;
    Ok(SpectrumReport {
        eigenvalues,
        gap_index,
        gap_size,
        k_estimate: gap_index,
    })
}

/// Largest drop between consecutive eigenvalues of a non-increasing list,
/// as a 1-based index (smallest index on ties) and its size.
pub fn perron_gap(eigenvalues: &[f64]) -> Result<(usize, f64)> {
    if eigenvalues.len() < 2 {
        return Err(IccError::InvalidParameter {
            name: "eigenvalues",
            reason: "at least two are needed to find a gap".into(),
        });
    }
    let mut best = (1, f64::NEG_INFINITY);
    for (i, w) in eigenvalues.windows(2).enumerate() {
        let gap = w[0] - w[1];
        if gap > best.1 {
            best = (i + 1, gap);
        }
    }
    Ok(best)
}

/// Assignment of Markov states to blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition(Clustering);

impl BlockPartition {
    pub fn new(labels: &[usize]) -> Result<Self> {
        Clustering::from_labels(labels).map(Self)
    }

    pub fn labels(&self) -> &[usize] {
        self.0.labels()
    }

    pub fn k(&self) -> usize {
        self.0.k()
    }
}

impl From<Clustering> for BlockPartition {
    fn from(c: Clustering) -> Self {
        Self(c)
    }
}

/// `δ = 2·max_i ‖P_i*‖_∞`, where `P_i*` is block-row `i` with its diagonal
/// block removed: twice the largest probability of leaving one's block in a
/// single step.
pub fn deviation_from_reducibility(tv: &TransitionView, bp: &BlockPartition) -> Result<f64> {
    let n = tv.n();
    let labels = bp.labels();
    if labels.len() != n {
        return Err(IccError::InvalidPartition(format!(
            "partition covers {} states but the chain has {n}",
            labels.len()
        )));
    }
    let mut worst = 0.0f64;
    for r in 0..n {
        let leak: f64 = (0..n)
            .filter(|&c| labels[c] != labels[r])
            .map(|c| tv.p[(r, c)].abs())
            .sum();
        worst = worst.max(leak);
    }
    Ok(2.0 * worst)
}
