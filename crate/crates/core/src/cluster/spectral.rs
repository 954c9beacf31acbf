//! Graph clustering on a similarity matrix: PIC, NCut and NJW.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kmeans::{check_k, euclidean_kmeans};
use super::{AlgorithmOptions, SimilarityMatrix};
use crate::data_model::Clustering;
use crate::error::{IccError, Result};
use crate::linalg::top_sym_eigen;

const PIC_MAX_ITERS: usize = 1000;
const ZERO_ROW: f64 = 1e-12;

pub fn pic(s: &SimilarityMatrix, k: usize, seed: u64) -> Result<Clustering> {
    pic_with(s, k, seed, &AlgorithmOptions::default())
}

pub fn ncut(s: &SimilarityMatrix, k: usize, seed: u64) -> Result<Clustering> {
    ncut_with(s, k, seed, &AlgorithmOptions::default())
}

pub fn njw(s: &SimilarityMatrix, k: usize, seed: u64) -> Result<Clustering> {
    njw_with(s, k, seed, &AlgorithmOptions::default())
}

/// Power iteration clustering: `v ← D⁻¹S v`, renormalized in L1, from the
/// degree-proportional start. Stops once the max-norm of the change in
/// successive increments drops below `1e-5 / n`, then clusters the entries
/// of `v` with one-dimensional k-means.
///
/// If the embedding has fewer than `k` distinct values (the degree vector is
/// stationary when all degrees are equal), the iteration is rerun from a
/// seeded random start.
pub fn pic_with(s: &SimilarityMatrix, k: usize, seed: u64, opts: &AlgorithmOptions) -> Result<Clustering> {
    let n = s.n();
    check_k(k, n)?;
    let degrees = checked_degrees(s)?;
    if k == 1 {
        return Clustering::single(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = power_embed(s, &degrees, DVector::from_column_slice(&degrees));
    if distinct_values(&v) < k {
        let start = DVector::from_fn(n, |_, _| 1.0 - rng.random::<f64>());
        v = power_embed(s, &degrees, start);
    }
    if distinct_values(&v) < k {
        return Err(IccError::Degenerate(format!(
            "power iteration embedding has fewer than {k} distinct values"
        )));
    }
    let embedding = DMatrix::from_column_slice(n, 1, v.as_slice());
    let labels = euclidean_kmeans(&embedding, k, opts.kmeans_restarts, opts.kmeans_max_iters, &mut rng);
    Clustering::from_labels(&labels)
}

/// Shi-Malik normalized cut: the `k` leading eigenvectors of
/// `D^{-1/2} S D^{-1/2}`, rescaled row-wise by `D^{-1/2}`, clustered with
/// Euclidean k-means.
pub fn ncut_with(s: &SimilarityMatrix, k: usize, seed: u64, opts: &AlgorithmOptions) -> Result<Clustering> {
    let n = s.n();
    check_k(k, n)?;
    let degrees = checked_degrees(s)?;
    if k == 1 {
        return Clustering::single(n);
    }
    let mut y = leading_normalized_eigvecs(s, &degrees, k)?;
    for (i, d) in degrees.iter().enumerate() {
        let mut row = y.row_mut(i);
        row /= d.sqrt();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = euclidean_kmeans(&y, k, opts.kmeans_restarts, opts.kmeans_max_iters, &mut rng);
    Clustering::from_labels(&labels)
}

/// Ng-Jordan-Weiss: the `k` leading eigenvectors of `D^{-1/2} S D^{-1/2}`
/// with rows scaled to unit length, clustered with Euclidean k-means.
/// Objects whose embedding row vanishes join the cluster of their most
/// similar object with a nonzero row.
pub fn njw_with(s: &SimilarityMatrix, k: usize, seed: u64, opts: &AlgorithmOptions) -> Result<Clustering> {
    let n = s.n();
    check_k(k, n)?;
    let degrees = checked_degrees(s)?;
    if k == 1 {
        return Clustering::single(n);
    }
    let y = leading_normalized_eigvecs(s, &degrees, k)?;
    let live: Vec<usize> = (0..n).filter(|&i| y.row(i).norm() > ZERO_ROW).collect();
    if live.len() < k {
        return Err(IccError::Degenerate(format!(
            "only {} nonzero embedding rows for k = {k}",
            live.len()
        )));
    }
    let z = DMatrix::from_fn(live.len(), k, |r, c| {
        let i = live[r];
        y[(i, c)] / y.row(i).norm()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let live_labels = euclidean_kmeans(&z, k, opts.kmeans_restarts, opts.kmeans_max_iters, &mut rng);

    let mut labels = vec![usize::MAX; n];
    for (&i, &l) in live.iter().zip(&live_labels) {
        labels[i] = l;
    }
    let values = s.values();
    for i in 0..n {
        if labels[i] != usize::MAX {
            continue;
        }
        let nearest = live
            .iter()
            .copied()
            .filter(|&j| j != i)
            .fold(None::<usize>, |best, j| match best {
                Some(b) if values[(i, b)] >= values[(i, j)] => Some(b),
                _ => Some(j),
            })
            .expect("at least k live rows");
        labels[i] = labels[nearest];
    }
    Clustering::from_labels(&labels)
}

fn checked_degrees(s: &SimilarityMatrix) -> Result<Vec<f64>> {
    let degrees = s.degrees();
    if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(IccError::ZeroRow(i));
    }
    Ok(degrees)
}

fn leading_normalized_eigvecs(s: &SimilarityMatrix, degrees: &[f64], k: usize) -> Result<DMatrix<f64>> {
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let values = s.values();
    let n = s.n();
    let normalized = DMatrix::from_fn(n, n, |r, c| values[(r, c)] * inv_sqrt[r] * inv_sqrt[c]);
    Ok(top_sym_eigen(&normalized, k)?.1)
}

fn power_embed(s: &SimilarityMatrix, degrees: &[f64], start: DVector<f64>) -> DVector<f64> {
    let n = s.n();
    let values = s.values();
    let tol = 1e-5 / n as f64;
    let mut v = &start / start.lp_norm(1);
    let mut prev_delta: Option<DVector<f64>> = None;
    for _ in 0..PIC_MAX_ITERS {
        let mut next = values * &v;
        for (x, d) in next.iter_mut().zip(degrees) {
            *x /= d;
        }
        next /= next.lp_norm(1);
        let delta = (&next - &v).abs();
        v = next;
        if let Some(p) = &prev_delta {
            if (&delta - p).amax() <= tol {
                break;
            }
        }
        prev_delta = Some(delta);
    }
    v
}

/// Count of values separated by more than a relative `1e-12`.
fn distinct_values(v: &DVector<f64>) -> usize {
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let scale = v.amax().max(f64::MIN_POSITIVE);
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > 1e-12 * scale).count()
}
