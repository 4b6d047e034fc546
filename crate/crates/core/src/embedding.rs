//! Classical multidimensional scaling with landmark out-of-sample extension.
//!
//! `mds` double-centers the squared landmark distances, keeps the top `d`
//! eigenpairs and scales the eigenvectors by the square roots of their
//! eigenvalues. `extend` places further points with the closed-form landmark
//! formula `x = -1/2 L# (δ_x - δ_μ)`, where `δ_x` holds squared distances to
//! the landmarks, `δ_μ` the per-landmark mean squared distance, and `L#` the
//! pseudoinverse of the landmark coordinate matrix.
//!
//! Reported eigenvalues are those of the double-centered matrix divided by the
//! landmark count, i.e. the variance of the configuration along each axis.

use nalgebra::DMatrix;

use crate::error::{AtlasError, Result};
use crate::linalg::{sym_eigen_desc, EIG_RTOL};

/// Chart-local coordinates.
pub type ChartCoords = Vec<f64>;

#[derive(Clone, Debug)]
pub struct Embedding {
    /// Landmark coordinates, one row per landmark.
    pub landmark_coords: Vec<ChartCoords>,
    /// Full spectrum (per-landmark variance), nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Number of retained axes with a nonzero eigenvalue.
    pub rank: usize,
    mean_sq_dist: Vec<f64>,
    /// `d x n`; row `a` is `v_a / sqrt(λ_a)` (zero for dropped axes).
    pinv_coords: DMatrix<f64>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.pinv_coords.nrows()
    }

    pub fn n_landmarks(&self) -> usize {
        self.landmark_coords.len()
    }
}

/// Classical MDS of a symmetric distance matrix into `d` dimensions.
pub fn mds(distances: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    let n = distances.nrows();
    if distances.ncols() != n {
        return Err(AtlasError::DimensionMismatch {
            expected: n,
            found: distances.ncols(),
        });
    }
    if n < 2 {
        return Err(AtlasError::invalid(
            "landmarks",
            "need at least 2 landmarks",
        ));
    }
    if d == 0 || d > n - 1 {
        return Err(AtlasError::invalid(
            "d",
            format!("must lie in 1..={} for {n} landmarks", n - 1),
        ));
    }

    let sq = distances.map(|v| v * v);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand)
    });

    let (values, vectors) = sym_eigen_desc(&b);
    let lmax = values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = EIG_RTOL * lmax;

    let mut coords = vec![vec![0.0; d]; n];
    let mut pinv_coords = DMatrix::zeros(d, n);
    let mut rank = 0;
    for a in 0..d {
        let lambda = values[a];
        if !(lambda > cutoff) || lambda <= 0.0 {
            continue;
        }
        rank += 1;
        let root = lambda.sqrt();
        // Sign convention: the largest-magnitude entry of each axis is positive.
        let mut pivot = 0;
        for i in 1..n {
            if vectors[(i, a)].abs() > vectors[(pivot, a)].abs() {
                pivot = i;
            }
        }
        let sign = if vectors[(pivot, a)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            let v = sign * vectors[(i, a)];
            coords[i][a] = v * root;
            pinv_coords[(a, i)] = v / root;
        }
    }

    let mut eigenvalues: Vec<f64> = values.iter().map(|l| l / n as f64).collect();
    for l in eigenvalues.iter_mut().take(d) {
        if *l < 0.0 {
            *l = 0.0;
        }
    }

    Ok(Embedding {
        landmark_coords: coords,
        eigenvalues,
        rank,
        mean_sq_dist: row_mean,
        pinv_coords,
    })
}

/// Coordinates of a new point from its distances to the landmarks.
pub fn extend(e: &Embedding, dists_to_landmarks: &[f64]) -> Result<ChartCoords> {
    let n = e.n_landmarks();
    if dists_to_landmarks.len() != n {
        return Err(AtlasError::DimensionMismatch {
            expected: n,
            found: dists_to_landmarks.len(),
        });
    }
    let d = e.dim();
    let mut out = vec![0.0; d];
    for (i, (&dist, &mean)) in dists_to_landmarks.iter().zip(&e.mean_sq_dist).enumerate() {
        let dev = dist * dist - mean;
        for (a, o) in out.iter_mut().enumerate() {
            *o += e.pinv_coords[(a, i)] * dev;
        }
    }
    for o in &mut out {
        *o *= -0.5;
    }
    Ok(out)
}

/// Number of eigenvalues at or above `(delta/4)^2`, never less than 1.
pub fn estimate_dim(eigenvalues: &[f64], delta: f64) -> usize {
    let cutoff = (delta / 4.0).powi(2);
    eigenvalues.iter().filter(|&&l| l >= cutoff).count().max(1)
}
