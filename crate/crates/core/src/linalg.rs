//! Dense and iterative symmetric eigen helpers shared by the reduction,
//! spectral clustering, and Perron modules.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{IccError, Result};

/// Above this order, extremal eigenpairs come from block subspace iteration.
pub const DENSE_EIGEN_LIMIT: usize = 2000;

const SUBSPACE_OVERSAMPLE: usize = 10;
const SUBSPACE_MAX_ITERS: usize = 5000;
const SUBSPACE_TOL: f64 = 1e-10;

/// All eigenpairs of a symmetric matrix, eigenvalues descending.
pub fn sym_eigen_desc(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// The `m` algebraically largest eigenpairs of symmetric `a`, descending.
pub fn top_sym_eigen(a: &DMatrix<f64>, m: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    top_sym_eigen_with_limit(a, m, DENSE_EIGEN_LIMIT)
}

pub fn top_sym_eigen_with_limit(a: &DMatrix<f64>, m: usize, dense_limit: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if m == 0 || m > n {
        return Err(IccError::InvalidParameter {
            name: "eigenpair count",
            reason: format!("{m} requested from order {n}"),
        });
    }
    if n <= dense_limit || m + SUBSPACE_OVERSAMPLE >= n {
        let (values, vectors) = sym_eigen_desc(a);
        return Ok((values[..m].to_vec(), vectors.columns(0, m).into_owned()));
    }
    subspace_iteration(a, m)
}

/// Block subspace iteration with Rayleigh-Ritz on `a + shift·I`, where the
/// Gershgorin shift makes the operator positive semidefinite so dominant
/// means algebraically largest.
fn subspace_iteration(a: &DMatrix<f64>, m: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let block = (m + SUBSPACE_OVERSAMPLE).min(n);
    let shift = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += shift;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1cc0);
    let start = DMatrix::from_fn(n, block, |_, _| StandardNormal.sample(&mut rng));
    let mut basis = start.qr().q();

    for _ in 0..SUBSPACE_MAX_ITERS {
        let image = &shifted * &basis;
        let projected = basis.tr_mul(&image);
        let projected = (&projected + projected.transpose()) * 0.5;
        let (theta, rot) = sym_eigen_desc(&projected);
        let ritz = &basis * &rot;
        let image = image * &rot;

        let scale = theta[0].abs().max(f64::MIN_POSITIVE);
        let converged = (0..m).all(|i| {
            let resid = image.column(i) - ritz.column(i) * theta[i];
            resid.norm() <= SUBSPACE_TOL * scale
        });
        if converged {
            let values = theta[..m].iter().map(|t| t - shift).collect();
            return Ok((values, ritz.columns(0, m).into_owned()));
        }
        basis = image.qr().q();
    }
    Err(IccError::NoConvergence(format!(
        "subspace iteration for {m} eigenpairs of order {n}"
    )))
}

/// Flips each column so its largest-magnitude entry (first on ties) is
/// positive. Returns the applied signs so paired factors can follow.
pub fn fix_column_signs(cols: &mut DMatrix<f64>) -> Vec<f64> {
    let mut signs = Vec::with_capacity(cols.ncols());
    for mut col in cols.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = if v < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
        signs.push(sign);
    }
    signs
}

/// Orthonormal basis for the column space of a tall matrix.
pub fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}
