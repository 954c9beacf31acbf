//! Principal Direction Divisive Partitioning.

use nalgebra::{DMatrix, DVector};

use super::kmeans::{check_k, spherical_centroids, spherical_lloyd, unit_rows, KmeansResult};
use crate::data_model::{Clustering, DataMatrix};
use crate::error::Result;
use crate::linalg::sym_eigen_desc;

/// Gram matrices up to this order are diagonalized densely; larger ones use
/// power iteration for the leading eigenvector.
const DENSE_DIRECTION_LIMIT: usize = 300;
const POWER_MAX_ITERS: usize = 5000;
const POWER_TOL: f64 = 1e-12;

struct Leaf {
    members: Vec<usize>,
    scatter: f64,
}

/// Divisive bisection into `k` leaves. Each step picks the leaf with the
/// largest scatter (lowest leaf id on ties), centers it, and splits it by the
/// sign of each member's projection onto the leaf's leading principal
/// direction (`>= 0` left, `< 0` right). A leaf whose projections cannot be
/// separated is split at its median member index.
pub fn pddp(x: &DataMatrix, k: usize) -> Result<Clustering> {
    let n = x.nrows();
    check_k(k, n)?;
    let d = x.dense();
    let all: Vec<usize> = (0..n).collect();
    let mut leaves = vec![leaf(&d, all)];
    while leaves.len() < k {
        let pick = leaves
            .iter()
            .enumerate()
            .filter(|(_, l)| l.members.len() >= 2)
            .fold(None::<usize>, |best, (i, l)| match best {
                Some(b) if leaves[b].scatter >= l.scatter => Some(b),
                _ => Some(i),
            })
            .expect("k <= n guarantees a splittable leaf");
        let (left, right) = bisect(&d, &leaves[pick].members);
        leaves[pick] = leaf(&d, left);
        leaves.push(leaf(&d, right));
    }
    let mut labels = vec![0usize; n];
    for (id, l) in leaves.iter().enumerate() {
        for &i in &l.members {
            labels[i] = id;
        }
    }
    Clustering::from_labels(&labels)
}

/// Spherical k-means started once from the normalized centroids of the
/// PDDP partition.
pub fn pddp_kmeans(x: &DataMatrix, k: usize, max_iters: usize) -> Result<KmeansResult> {
    let start = pddp(x, k)?;
    let xhat = unit_rows(&x.dense())?;
    let seed_centroids = DMatrix::from_fn(k, xhat.ncols(), |_, c| if c == 0 { 1.0 } else { 0.0 });
    let init = spherical_centroids(&xhat, start.labels(), &seed_centroids);
    let run = spherical_lloyd(&xhat, init, max_iters);
    Ok(KmeansResult {
        clustering: Clustering::from_labels(&run.labels)?,
        objective: run.objective,
        restarts_used: 1,
    })
}

fn leaf(d: &DMatrix<f64>, members: Vec<usize>) -> Leaf {
    let scatter = centered(d, &members).norm_squared();
    Leaf { members, scatter }
}

fn centered(d: &DMatrix<f64>, members: &[usize]) -> DMatrix<f64> {
    let rows = DMatrix::from_fn(members.len(), d.ncols(), |r, c| d[(members[r], c)]);
    let mean = rows.row_mean();
    let mut out = rows;
    for mut r in out.row_iter_mut() {
        r -= &mean;
    }
    out
}

fn bisect(d: &DMatrix<f64>, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let c = centered(d, members);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    if let Some(direction) = leading_direction(&c) {
        let proj = &c * direction;
        for (&i, &p) in members.iter().zip(proj.iter()) {
            if p >= 0.0 {
                left.push(i);
            } else {
                right.push(i);
            }
        }
    }
    if left.is_empty() || right.is_empty() {
        let mid = members.len().div_ceil(2);
        return (members[..mid].to_vec(), members[mid..].to_vec());
    }
    (left, right)
}

/// Leading right singular vector of the centered block, with its
/// largest-magnitude entry made positive. `None` for a zero block.
fn leading_direction(c: &DMatrix<f64>) -> Option<DVector<f64>> {
    if c.norm_squared() == 0.0 {
        return None;
    }
    let mut v = if c.nrows() < c.ncols() {
        // row-space Gram is smaller: v ∝ Cᵀu
        let u = top_eigvec(&(c * c.transpose()));
        c.tr_mul(&u)
    } else {
        top_eigvec(&c.tr_mul(c))
    };
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v /= norm;
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if lead < 0.0 {
        v.neg_mut();
    }
    Some(v)
}

fn top_eigvec(g: &DMatrix<f64>) -> DVector<f64> {
    if g.nrows() <= DENSE_DIRECTION_LIMIT {
        let (_, vecs) = sym_eigen_desc(g);
        return vecs.column(0).into_owned();
    }
    // start from the column with the largest diagonal
    let start = (0..g.nrows()).fold(0usize, |b, i| if g[(i, i)] > g[(b, b)] { i } else { b });
    let mut v = g.column(start).into_owned();
    v /= v.norm();
    for _ in 0..POWER_MAX_ITERS {
        let w = g * &v;
        let lambda = v.dot(&w);
        let resid = (&w - &v * lambda).norm();
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        v = w / norm;
        if resid <= POWER_TOL * lambda.abs() {
            break;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::accuracy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (DataMatrix, Clustering) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (label, center) in [(0usize, [5.0, 1.0]), (1, [1.0, 5.0])] {
            for _ in 0..20 {
                rows.push(vec![
                    center[0] + noise.sample(&mut rng),
                    center[1] + noise.sample(&mut rng),
                ]);
                truth.push(label);
            }
        }
        (
            DataMatrix::from_rows(&rows).unwrap(),
            Clustering::from_labels(&truth).unwrap(),
        )
    }

    #[test]
    fn recovers_two_blobs() {
        let (x, truth) = blobs(1);
        let c = pddp(&x, 2).unwrap();
        assert_eq!(accuracy(&c, &truth).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster_and_bad_k() {
        let (x, _) = blobs(2);
        assert_eq!(pddp(&x, 1).unwrap().k(), 1);
        assert!(pddp(&x, 41).is_err());
    }

    #[test]
    fn identical_points_split_at_median() {
        let x = DataMatrix::from_rows(&vec![vec![1.0, 1.0]; 5]).unwrap();
        let c = pddp(&x, 2).unwrap();
        assert_eq!(c.labels(), &[0, 0, 0, 1, 1]);
        // k = n is reachable
        assert_eq!(pddp(&x, 5).unwrap().k(), 5);
    }

    #[test]
    fn deterministic() {
        let (x, _) = blobs(3);
        assert_eq!(pddp(&x, 4).unwrap(), pddp(&x, 4).unwrap());
    }

    #[test]
    fn object_permutation_gives_same_partition() {
        let (x, _) = blobs(4);
        let d = x.dense().into_owned();
        let n = d.nrows();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let permuted = DMatrix::from_fn(n, d.ncols(), |r, c| d[(perm[r], c)]);
        let a = pddp(&x, 3).unwrap();
        let b = pddp(&DataMatrix::from_dense(permuted).unwrap(), 3).unwrap();
        let mut back = vec![0usize; n];
        for (r, &p) in perm.iter().enumerate() {
            back[p] = b.labels()[r];
        }
        assert_eq!(a, Clustering::from_labels(&back).unwrap());
    }

    #[test]
    fn pddp_kmeans_fixed_point_and_descent() {
        let (x, truth) = blobs(5);
        let p = pddp(&x, 2).unwrap();
        let r = pddp_kmeans(&x, 2, 100).unwrap();
        assert_eq!(r.clustering, p);
        assert_eq!(accuracy(&r.clustering, &truth).unwrap(), 1.0);

        // objective no worse than k-means frozen at the PDDP start
        for k in 2..6 {
            let start = pddp(&x, k).unwrap();
            let xhat = unit_rows(&x.dense()).unwrap();
            let seed_c = DMatrix::from_element(k, 2, 1.0);
            let c0 = spherical_centroids(&xhat, start.labels(), &seed_c);
            let frozen = super::super::kmeans::objective(&xhat, start.labels(), &c0);
            let run = pddp_kmeans(&x, k, 100).unwrap();
            assert!(run.objective <= frozen + 1e-12);
        }
    }

    #[test]
    fn power_iteration_path_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let g0 = DMatrix::from_fn(DENSE_DIRECTION_LIMIT + 20, 5, |r, c| {
            noise.sample(&mut rng) + if c == 0 { r as f64 * 0.05 } else { 0.0 }
        });
        let g = &g0 * g0.transpose();
        let (_, dense) = sym_eigen_desc(&g);
        let power = top_eigvec(&g);
        let cos = dense.column(0).dot(&power).abs();
        assert!((cos - 1.0).abs() < 1e-8);
    }
}
