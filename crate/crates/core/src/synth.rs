//! Seeded generators with known ground truth.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cluster::SimilarityMatrix;
use crate::data_model::{Clustering, DataMatrix};
use crate::error::{IccError, Result};

/// Isotropic Gaussian clusters with unit within-cluster standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    /// Points per cluster; the number of entries is k.
    pub sizes: Vec<usize>,
    pub dim: usize,
    /// Distance between every pair of centers.
    pub separation: f64,
    pub seed: u64,
}

impl BlobSpec {
    pub fn uniform(k: usize, per_cluster: usize, dim: usize, separation: f64, seed: u64) -> Self {
        Self {
            sizes: vec![per_cluster; k],
            dim,
            separation,
            seed,
        }
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(IccError::InvalidParameter {
                name: "blob spec",
                reason,
            })
        };
        if self.sizes.is_empty() {
            return bad("at least one cluster is required".into());
        }
        if let Some(s) = self.sizes.iter().find(|&&s| s < 2) {
            return bad(format!("cluster size {s} is below 2"));
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return bad(format!("separation {} must be positive", self.separation));
        }
        if self.dim < self.k() {
            return bad(format!("dim {} is smaller than k = {}", self.dim, self.k()));
        }
        Ok(())
    }
}

/// Centers sit on the coordinate axes at `separation/√2` (so every pair is
/// exactly `separation` apart), the configuration is rotated by a random
/// orthogonal matrix, and each point adds `N(0, I)` noise.
pub fn gaussian_blobs(spec: &BlobSpec) -> Result<(DataMatrix, Clustering)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dim;
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let rotation = g.qr().q();
    let scale = spec.separation / std::f64::consts::SQRT_2;

    let n = spec.n();
    let mut x = DMatrix::zeros(n, d);
    let mut truth = Vec::with_capacity(n);
    let mut row = 0;
    for (j, &size) in spec.sizes.iter().enumerate() {
        // e_j rotated is the j-th row of Qᵀ, i.e. the j-th column of Q
        let center = rotation.column(j).transpose() * scale;
        for _ in 0..size {
            for c in 0..d {
                let noise: f64 = StandardNormal.sample(&mut rng);
                x[(row, c)] = center[c] + noise;
            }
            truth.push(j);
            row += 1;
        }
    }
    Ok((DataMatrix::from_dense(x)?, Clustering::from_labels(&truth)?))
}

/// All-ones diagonal blocks of the given sizes; each off-diagonal-block
/// entry is `epsilon·U(0,1)`, mirrored to keep the matrix symmetric.
pub fn noisy_block_matrix(sizes: &[usize], epsilon: f64, seed: u64) -> Result<(SimilarityMatrix, Clustering)> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(IccError::InvalidParameter {
            name: "sizes",
            reason: "blocks must be non-empty".into(),
        });
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(IccError::InvalidParameter {
            name: "epsilon",
            reason: format!("{epsilon} must be finite and nonnegative"),
        });
    }
    let mut labels = Vec::new();
    for (b, &s) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat_n(b, s));
    }
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let v = if labels[r] == labels[c] {
                1.0
            } else {
                epsilon * rng.random::<f64>()
            };
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
    Ok((SimilarityMatrix::new(m)?, Clustering::from_labels(&labels)?))
}
