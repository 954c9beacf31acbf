use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data_model::{DataMatrix, Storage};
use crate::error::{IccError, Result};

pub const DEFAULT_NMF_MAX_ITERS: usize = 200;
pub const DEFAULT_NMF_TOL: f64 = 1e-4;

/// `X ≈ W·H` with `W` n×r and `H` r×m, both entrywise nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    pub w: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// Frobenius residual `‖X − WH‖` after each alternating sweep.
    pub residual_history: Vec<f64>,
}

impl NmfFactors {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().expect("at least one sweep")
    }
}

/// Nonnegative factorization by alternating constrained least squares:
/// each sweep solves the unconstrained normal equations for `H` given `W`,
/// zeroes negative entries, then does the same for `W` given `H`.
///
/// Stops after `max_iters` sweeps or once the relative change in residual
/// drops below `tol`. The returned factors are the best sweep seen.
pub fn nmf_acls(x: &DataMatrix, rank: usize, max_iters: usize, tol: f64, seed: u64) -> Result<NmfFactors> {
    if !x.is_nonneg() {
        return Err(first_negative(x));
    }
    let max = x.nrows().min(x.ncols());
    if rank == 0 || rank > max {
        return Err(IccError::RankOutOfRange { rank, max });
    }
    if max_iters == 0 {
        return Err(IccError::InvalidParameter {
            name: "max_iters",
            reason: "must be at least 1".into(),
        });
    }
    let x_sq = x.frobenius_sq();
    if x_sq == 0.0 {
        return Err(IccError::Degenerate("all-zero matrix".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // uniform on (0, 1]
    let mut w = DMatrix::from_fn(x.nrows(), rank, |_, _| 1.0 - rng.random::<f64>());
    let mut history = Vec::new();
    let mut best: Option<(f64, DMatrix<f64>, DMatrix<f64>)> = None;

    for _ in 0..max_iters {
        // H = argmin ‖X − W H‖ : (WᵀW) H = WᵀX
        let rhs = x.tr_mul(&w).transpose();
        let mut h = solve_normal(&w.tr_mul(&w), &rhs);
        h.apply(|v| *v = v.max(0.0));
        // W = argmin ‖X − W H‖ : (H Hᵀ) Wᵀ = H Xᵀ
        let ht = h.transpose();
        let rhs = x.mul(&ht).transpose();
        w = solve_normal(&(&h * &ht), &rhs).transpose();
        w.apply(|v| *v = v.max(0.0));

        let r = residual(x, x_sq, &w, &h);
        let improved = best.as_ref().is_none_or(|(b, _, _)| r < *b);
        if improved {
            best = Some((r, w.clone(), h.clone()));
        }
        let prev = history.last().copied();
        history.push(r);
        if let Some(p) = prev {
            if p == 0.0 || ((p - r).abs() / p) < tol {
                break;
            }
        }
    }

    let (best_r, best_w, best_h) = best.expect("at least one sweep");
    if *history.last().expect("non-empty") > best_r {
        // restored the best sweep; record its residual as the final one
        history.push(best_r);
    }
    Ok(NmfFactors {
        w: best_w,
        h: best_h,
        residual_history: history,
    })
}

/// Solves `G Z = B` for symmetric PSD `G`; falls back to the minimum-norm
/// pseudo-inverse solution when `G` is singular (a zeroed factor column).
fn solve_normal(gram: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = gram.clone().cholesky() {
        let z = chol.solve(rhs);
        if z.iter().all(|v| v.is_finite()) {
            return z;
        }
    }
    let pinv = gram
        .clone()
        .pseudo_inverse(1e-12 * gram.amax().max(f64::MIN_POSITIVE))
        .expect("non-negative epsilon");
    pinv * rhs
}

fn residual(x: &DataMatrix, x_sq: f64, w: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    match x.storage() {
        Storage::Dense(d) => (d - w * h).norm(),
        Storage::Sparse(_) => {
            // ‖X‖² − 2 tr(Wᵀ X Hᵀ) + tr(WᵀW · HHᵀ)
            let cross = w.tr_mul(&x.mul(&h.transpose())).trace();
            let quad = (w.tr_mul(w).component_mul(&(h * h.transpose()))).sum();
            (x_sq - 2.0 * cross + quad).max(0.0).sqrt()
        }
    }
}

fn first_negative(x: &DataMatrix) -> IccError {
    let d = x.dense();
    for c in 0..d.ncols() {
        for r in 0..d.nrows() {
            if d[(r, c)] < 0.0 {
                return IccError::NegativeEntry { row: r, col: c };
            }
        }
    }
    unreachable!("matrix flagged signed without a negative entry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::CsrMatrix;

    fn positive(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, m, |_, _| rng.random::<f64>())
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let x = DataMatrix::from_dense(DMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(nmf_acls(&x, 1, 10, 1e-4, 0), Err(IccError::Degenerate(_))));
    }

    #[test]
    fn negative_input_is_rejected() {
        let x = DataMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            nmf_acls(&x, 1, 10, 1e-4, 0),
            Err(IccError::NegativeEntry { row: 0, col: 1 })
        );
    }

    #[test]
    fn identity_is_factored_exactly() {
        let x = DataMatrix::from_dense(DMatrix::identity(2, 2)).unwrap();
        let f = nmf_acls(&x, 2, DEFAULT_NMF_MAX_ITERS, DEFAULT_NMF_TOL, 7).unwrap();
        assert!(f.residual() < 1e-6, "residual {}", f.residual());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let x = DataMatrix::from_dense(positive(6, 5, 3)).unwrap();
        let a = nmf_acls(&x, 2, 50, 1e-6, 42).unwrap();
        let b = nmf_acls(&x, 2, 50, 1e-6, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn factors_nonnegative_and_residual_decreases() {
        let x = DataMatrix::from_dense(positive(8, 6, 4)).unwrap();
        let f = nmf_acls(&x, 3, 100, 1e-8, 1).unwrap();
        assert!(f.w.iter().chain(f.h.iter()).all(|&v| v >= 0.0));
        assert!(f.residual_history.iter().all(|r| r.is_finite()));
        assert!(f.residual() <= f.residual_history[0]);
        let direct = (x.dense().into_owned() - &f.w * &f.h).norm();
        assert!((direct - f.residual()).abs() < 1e-12);
    }

    #[test]
    fn sparse_residual_matches_dense() {
        let d = positive(7, 5, 8).map(|v| if v < 0.4 { 0.0 } else { v });
        let xd = DataMatrix::from_dense(d.clone()).unwrap();
        let xs = DataMatrix::from_sparse(CsrMatrix::from_dense(&d).unwrap()).unwrap();
        let fd = nmf_acls(&xd, 2, 30, 0.0, 5).unwrap();
        let fs = nmf_acls(&xs, 2, 30, 0.0, 5).unwrap();
        assert!((fd.residual() - fs.residual()).abs() < 1e-8);
        assert!((fd.w - fs.w).amax() < 1e-8);
    }
}
