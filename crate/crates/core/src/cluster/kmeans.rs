use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data_model::{Clustering, DataMatrix};
use crate::error::{IccError, Result};

pub const DEFAULT_RESTARTS: usize = 100;
pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub clustering: Clustering,
    /// Sum of squared distances from unit-normalized rows to their
    /// (unit-normalized) centroids.
    pub objective: f64,
    pub restarts_used: usize,
}

/// Spherical k-means: rows are scaled to unit length, assigned by maximum
/// cosine to the centroids, and centroids are normalized cluster means.
/// Runs `restarts` randomly initialized Lloyd iterations and keeps the one
/// with the lowest objective.
pub fn spherical_kmeans(
    x: &DataMatrix,
    k: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<KmeansResult> {
    let n = x.nrows();
    check_k(k, n)?;
    if restarts == 0 {
        return Err(IccError::InvalidParameter {
            name: "restarts",
            reason: "must be at least 1".into(),
        });
    }
    let xhat = unit_rows(&x.dense())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LloydRun> = None;
    for _ in 0..restarts {
        let picks = index::sample(&mut rng, n, k).into_vec();
        let init = DMatrix::from_fn(k, xhat.ncols(), |r, c| xhat[(picks[r], c)]);
        let run = spherical_lloyd(&xhat, init, max_iters);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(KmeansResult {
        clustering: Clustering::from_labels(&best.labels)?,
        objective: best.objective,
        restarts_used: restarts,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct LloydRun {
    pub labels: Vec<usize>,
    pub objective: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
}

/// Lloyd iterations for spherical k-means from the given k×m centroids.
pub(crate) fn spherical_lloyd(xhat: &DMatrix<f64>, init: DMatrix<f64>, max_iters: usize) -> LloydRun {
    let k = init.nrows();
    let mut centroids = normalize_rows_or_keep(init.clone(), &init);
    let mut labels = assign_cosine(xhat, &centroids);
    let snapshot = labels.clone();
    repair_empty(&mut labels, k, |i| sq_dist(xhat, i, &centroids, snapshot[i]));
    centroids = spherical_centroids(xhat, &labels, &centroids);
    let mut history = vec![objective(xhat, &labels, &centroids)];
    for _ in 1..max_iters.max(1) {
        let mut next = assign_cosine(xhat, &centroids);
        let snapshot = next.clone();
        repair_empty(&mut next, k, |i| sq_dist(xhat, i, &centroids, snapshot[i]));
        if next == labels {
            break;
        }
        labels = next;
        centroids = spherical_centroids(xhat, &labels, &centroids);
        history.push(objective(xhat, &labels, &centroids));
    }
    LloydRun {
        objective: *history.last().expect("non-empty"),
        labels,
        history,
    }
}

/// Normalized means of unit rows per cluster; a cluster whose mean vanishes
/// keeps its previous centroid.
pub(crate) fn spherical_centroids(xhat: &DMatrix<f64>, labels: &[usize], previous: &DMatrix<f64>) -> DMatrix<f64> {
    let sums = cluster_sums(xhat, labels, previous.nrows());
    normalize_rows_or_keep(sums, previous)
}

fn normalize_rows_or_keep(mut m: DMatrix<f64>, fallback: &DMatrix<f64>) -> DMatrix<f64> {
    for r in 0..m.nrows() {
        let norm = m.row(r).norm();
        if norm > 1e-12 {
            let row = m.row(r) / norm;
            m.set_row(r, &row);
        } else {
            m.set_row(r, &fallback.row(r));
        }
    }
    m
}

fn cluster_sums(x: &DMatrix<f64>, labels: &[usize], k: usize) -> DMatrix<f64> {
    let mut sums = DMatrix::zeros(k, x.ncols());
    for (i, &l) in labels.iter().enumerate() {
        let mut row = sums.row_mut(l);
        row += x.row(i);
    }
    sums
}

fn assign_cosine(xhat: &DMatrix<f64>, centroids: &DMatrix<f64>) -> Vec<usize> {
    let sims = xhat * centroids.transpose();
    (0..xhat.nrows()).map(|i| argmax(sims.row(i).iter().copied())).collect()
}

fn sq_dist(x: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, j: usize) -> f64 {
    (x.row(i) - centroids.row(j)).norm_squared()
}

pub(crate) fn objective(x: &DMatrix<f64>, labels: &[usize], centroids: &DMatrix<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(x, i, centroids, l))
        .sum()
}

/// Index of the maximum, lowest index on ties.
pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Fills empty clusters by moving, one at a time, the point farthest from
/// its own centroid (among clusters that can spare a member) into each.
pub(crate) fn repair_empty(labels: &mut [usize], k: usize, own_cost: impl Fn(usize) -> f64) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return;
    }
    let cost: Vec<f64> = (0..labels.len()).map(own_cost).collect();
    let mut moved = vec![false; labels.len()];
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| !moved[i] && sizes[labels[i]] > 1)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if cost[b] >= cost[i] => Some(b),
                _ => Some(i),
            });
        let Some(i) = donor else { break };
        sizes[labels[i]] -= 1;
        labels[i] = empty;
        sizes[empty] += 1;
        moved[i] = true;
    }
}

pub(crate) fn unit_rows(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = x.clone();
    for r in 0..out.nrows() {
        let norm = out.row(r).norm();
        if norm == 0.0 {
            return Err(IccError::ZeroRow(r));
        }
        let row = out.row(r) / norm;
        out.set_row(r, &row);
    }
    Ok(out)
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(IccError::InvalidK { k, n });
    }
    Ok(())
}

/// Euclidean k-means with k-means++ seeding; keeps the restart with the
/// lowest within-cluster sum of squares. Used on spectral embeddings.
pub(crate) fn euclidean_kmeans(
    x: &DMatrix<f64>,
    k: usize,
    restarts: usize,
    max_iters: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let init = kmeans_plus_plus(x, k, rng);
        let (labels, sse) = euclidean_lloyd(x, init, max_iters);
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, labels));
        }
    }
    best.expect("at least one restart").1
}

fn kmeans_plus_plus(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = x.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| (x.row(i) - x.row(chosen[0])).norm_squared()).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min((x.row(i) - x.row(next)).norm_squared());
        }
    }
    DMatrix::from_fn(k, x.ncols(), |r, c| x[(chosen[r], c)])
}

fn euclidean_lloyd(x: &DMatrix<f64>, mut centroids: DMatrix<f64>, max_iters: usize) -> (Vec<usize>, f64) {
    let k = centroids.nrows();
    let mut labels: Vec<usize> = Vec::new();
    for _ in 0..max_iters.max(1) {
        let mut next: Vec<usize> = (0..x.nrows())
            .map(|i| argmax((0..k).map(|j| -sq_dist(x, i, &centroids, j))))
            .collect();
        let snapshot = next.clone();
        repair_empty(&mut next, k, |i| sq_dist(x, i, &centroids, snapshot[i]));
        let done = next == labels;
        labels = next;
        let sums = cluster_sums(x, &labels, k);
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                let row = sums.row(j) / c as f64;
                centroids.set_row(j, &row);
            }
        }
        if done {
            break;
        }
    }
    let sse = objective(x, &labels, &centroids);
    (labels, sse)
}
