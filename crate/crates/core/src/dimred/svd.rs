use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data_model::DataMatrix;
use crate::error::{IccError, Result};
use crate::linalg::{fix_column_signs, orthonormalize};

/// Inputs whose smaller side is at most this size use a full dense SVD.
pub const DENSE_SVD_LIMIT: usize = 400;

const OVERSAMPLE: usize = 10;
const ITER_TOL: f64 = 1e-8;
const ITER_MAX: usize = 3000;

/// Leading `rank` singular triplets. `u` is n×r, `v` is m×r, singular values
/// are non-increasing. Each column of `v` has its largest-magnitude entry
/// positive (with `u` flipped to match).
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// `U · diag(S)`: the object scores in the reduced space.
    pub fn scores(&self) -> DMatrix<f64> {
        let mut s = self.u.clone();
        for (mut col, sigma) in s.column_iter_mut().zip(&self.singular_values) {
            col *= *sigma;
        }
        s
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.scores() * self.v.transpose()
    }
}

pub fn truncated_svd(x: &DataMatrix, rank: usize) -> Result<Svd> {
    let max = x.nrows().min(x.ncols());
    if rank == 0 || rank > max {
        return Err(IccError::RankOutOfRange { rank, max });
    }
    if max <= DENSE_SVD_LIMIT || rank + OVERSAMPLE >= max {
        Ok(dense_svd(&x.dense(), rank))
    } else {
        iterative_svd(x, rank)
    }
}

fn dense_svd(x: &DMatrix<f64>, rank: usize) -> Svd {
    let svd = x.clone().svd(true, true);
    let u_full = svd.u.expect("u requested");
    let vt_full = svd.v_t.expect("v requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .total_cmp(&svd.singular_values[i])
            .then(i.cmp(&j))
    });
    let order = &order[..rank];
    let u = DMatrix::from_fn(x.nrows(), rank, |r, c| u_full[(r, order[c])]);
    let v = DMatrix::from_fn(x.ncols(), rank, |r, c| vt_full[(order[c], r)]);
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    finish(u, singular_values, v)
}

/// Alternating block power iteration with a Rayleigh-Ritz step on
/// `Xᵀ U`; touches X only through products, so sparse inputs stay sparse.
fn iterative_svd(x: &DataMatrix, rank: usize) -> Result<Svd> {
    let block = (rank + OVERSAMPLE).min(x.nrows().min(x.ncols()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_5fd0);
    let start = DMatrix::from_fn(x.ncols(), block, |_, _| StandardNormal.sample(&mut rng));
    let mut right = orthonormalize(start);
    let mut previous: Option<(DMatrix<f64>, Vec<f64>)> = None;

    for _ in 0..ITER_MAX {
        let image = x.mul(&right);
        if let Some((left, sigma)) = &previous {
            let scale = sigma[0].max(f64::MIN_POSITIVE);
            let converged = (0..rank).all(|i| (image.column(i) - left.column(i) * sigma[i]).norm() <= ITER_TOL * scale);
            if converged {
                let u = left.columns(0, rank).into_owned();
                let v = right.columns(0, rank).into_owned();
                return Ok(finish(u, sigma[..rank].to_vec(), v));
            }
        }
        let basis = orthonormalize(image);
        let back = x.tr_mul(&basis);
        let small = back.svd(true, true);
        let mut order: Vec<usize> = (0..small.singular_values.len()).collect();
        order.sort_by(|&i, &j| {
            small.singular_values[j]
                .total_cmp(&small.singular_values[i])
                .then(i.cmp(&j))
        });
        let p = small.u.expect("u requested");
        let qt = small.v_t.expect("v requested");
        let p = DMatrix::from_fn(p.nrows(), block, |r, c| p[(r, order[c])]);
        let q = DMatrix::from_fn(block, block, |r, c| qt[(order[c], r)]);
        let sigma = order.iter().map(|&i| small.singular_values[i]).collect();
        previous = Some((basis * q, sigma));
        right = p;
    }
    Err(IccError::NoConvergence(format!(
        "truncated SVD of rank {rank} on {}x{}",
        x.nrows(),
        x.ncols()
    )))
}

fn finish(mut u: DMatrix<f64>, singular_values: Vec<f64>, mut v: DMatrix<f64>) -> Svd {
    let signs = fix_column_signs(&mut v);
    for (mut col, s) in u.column_iter_mut().zip(signs) {
        if s < 0.0 {
            col.neg_mut();
        }
    }
    Svd { u, singular_values, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::CsrMatrix;
    use nalgebra::SymmetricEigen;

    fn random(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng))
    }

    fn assert_orthonormal(q: &DMatrix<f64>) {
        let g = q.tr_mul(q);
        let id = DMatrix::<f64>::identity(q.ncols(), q.ncols());
        assert!((g - id).amax() < 1e-8);
    }

    #[test]
    fn identity_singular_values() {
        let x = DataMatrix::from_dense(DMatrix::identity(3, 3)).unwrap();
        let svd = truncated_svd(&x, 2).unwrap();
        assert!((svd.singular_values[0] - 1.0).abs() < 1e-12);
        assert!((svd.singular_values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_is_exact() {
        let u = DMatrix::from_column_slice(4, 1, &[1.0, -2.0, 0.5, 3.0]);
        let v = DMatrix::from_column_slice(3, 1, &[2.0, 1.0, -1.0]);
        let x = &u * v.transpose();
        let svd = truncated_svd(&DataMatrix::from_dense(x.clone()).unwrap(), 1).unwrap();
        assert!((svd.reconstruct() - x).norm() < 1e-12);
    }

    #[test]
    fn residual_matches_tail_energy_from_gram_oracle() {
        let x = random(5, 4, 11);
        // oracle: eigenvalues of XᵀX are the squared singular values
        let gram = SymmetricEigen::new(x.tr_mul(&x));
        let mut sq: Vec<f64> = gram.eigenvalues.iter().copied().collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        let svd = truncated_svd(&DataMatrix::from_dense(x.clone()).unwrap(), 2).unwrap();
        let resid = (x - svd.reconstruct()).norm_squared();
        assert!((resid - (sq[2] + sq[3])).abs() < 1e-8);
        assert_orthonormal(&svd.u);
        assert_orthonormal(&svd.v);
        assert!(svd.singular_values[0] >= svd.singular_values[1]);
    }

    #[test]
    fn rank_out_of_range() {
        let x = DataMatrix::from_dense(random(3, 2, 1)).unwrap();
        assert!(matches!(
            truncated_svd(&x, 3),
            Err(IccError::RankOutOfRange { rank: 3, max: 2 })
        ));
        assert!(truncated_svd(&x, 0).is_err());
    }

    #[test]
    fn iterative_path_matches_dense_on_sparse_input() {
        // low-rank signal plus small noise, large enough to take the iterative path
        let (n, m) = (450, 420);
        let signal = random(n, 3, 5) * random(3, m, 6).map(|v| v * 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dense = DMatrix::from_fn(n, m, |r, c| {
            let keep: f64 = rand::Rng::random(&mut rng);
            if keep < 0.3 {
                signal[(r, c)]
            } else {
                0.0
            }
        });
        let sparse = DataMatrix::from_sparse(CsrMatrix::from_dense(&dense).unwrap()).unwrap();
        let it = truncated_svd(&sparse, 3).unwrap();
        let full = dense_svd(&dense, 3);
        for i in 0..3 {
            let rel = (it.singular_values[i] - full.singular_values[i]).abs() / full.singular_values[0];
            assert!(rel < 1e-8, "sigma {i}: {rel}");
        }
        assert!((it.reconstruct() - full.reconstruct()).amax() < 1e-6);
    }
}
