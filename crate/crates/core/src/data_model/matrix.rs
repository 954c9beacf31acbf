use std::borrow::Cow;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;

use super::sparse::CsrMatrix;
use crate::error::{IccError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

/// The clustering input: `n` objects (rows) by `m` features (columns).
///
/// Construction validates shape (`n >= 2`, `m >= 1`) and finiteness, and
/// records whether every entry is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    storage: Storage,
    nonneg: bool,
}

impl DataMatrix {
    pub fn from_dense(values: DMatrix<f64>) -> Result<Self> {
        check_shape(values.nrows(), values.ncols())?;
        let mut nonneg = true;
        for c in 0..values.ncols() {
            for r in 0..values.nrows() {
                let v = values[(r, c)];
                if !v.is_finite() {
                    return Err(IccError::NonFinite { row: r, col: c });
                }
                nonneg &= v >= 0.0;
            }
        }
        Ok(Self {
            storage: Storage::Dense(values),
            nonneg,
        })
    }

    pub fn from_sparse(values: CsrMatrix) -> Result<Self> {
        check_shape(values.nrows(), values.ncols())?;
        let nonneg = values.values().iter().all(|&v| v >= 0.0);
        Ok(Self {
            storage: Storage::Sparse(values),
            nonneg,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(IccError::InvalidShape {
                rows: i,
                cols: r.len(),
                reason: "ragged rows",
            });
        }
        Self::from_dense(DMatrix::from_fn(n, m, |r, c| rows[r][c]))
    }

    pub fn nrows(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.nrows(),
            Storage::Sparse(s) => s.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.ncols(),
            Storage::Sparse(s) => s.ncols(),
        }
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    /// Dense view, materialized only for sparse storage.
    pub fn dense(&self) -> Cow<'_, DMatrix<f64>> {
        match &self.storage {
            Storage::Dense(d) => Cow::Borrowed(d),
            Storage::Sparse(s) => Cow::Owned(s.to_dense()),
        }
    }

    /// `X * b`
    pub fn mul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(d) => d * b,
            Storage::Sparse(s) => s.mul_dense(b),
        }
    }

    /// `Xᵀ * b`
    pub fn tr_mul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(d) => d.tr_mul(b),
            Storage::Sparse(s) => s.tr_mul_dense(b),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d.norm_squared(),
            Storage::Sparse(s) => s.frobenius_sq(),
        }
    }

    pub fn transpose(&self) -> Result<Self> {
        match &self.storage {
            Storage::Dense(d) => Self::from_dense(d.transpose()),
            Storage::Sparse(s) => Self::from_sparse(s.transpose()),
        }
    }

    /// Content fingerprint of shape and entry bit patterns.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.nrows().hash(&mut h);
        self.ncols().hash(&mut h);
        match &self.storage {
            Storage::Dense(d) => d.iter().for_each(|v| v.to_bits().hash(&mut h)),
            Storage::Sparse(s) => s.triplets().for_each(|(r, c, v)| {
                (r, c, v.to_bits()).hash(&mut h);
            }),
        }
        h.finish()
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows < 2 || cols < 1 {
        return Err(IccError::InvalidShape {
            rows,
            cols,
            reason: "need at least 2 objects and 1 feature",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonneg_flag_tracks_values() {
        let x = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 3.0]]).unwrap();
        assert!(x.is_nonneg());
        let y = DataMatrix::from_rows(&[vec![1.0, -0.5], vec![2.0, 3.0]]).unwrap();
        assert!(!y.is_nonneg());
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(DataMatrix::from_rows(&[vec![1.0]]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0], vec![]]).is_err());
        assert!(matches!(
            DataMatrix::from_rows(&[vec![1.0], vec![f64::NAN]]),
            Err(IccError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let d = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 3.0, 0.0]);
        let xd = DataMatrix::from_dense(d.clone()).unwrap();
        let xs = DataMatrix::from_sparse(CsrMatrix::from_dense(&d).unwrap()).unwrap();
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert_eq!(xd.mul(&b), xs.mul(&b));
        assert_eq!(xd.frobenius_sq(), xs.frobenius_sq());
        assert_eq!(*xs.dense(), d);
    }
}
