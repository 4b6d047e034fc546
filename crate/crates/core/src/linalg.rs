//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative singular-value cutoff for pseudoinverses.
pub const PINV_RTOL: f64 = 1e-10;

/// Relative eigenvalue cutoff below which MDS eigenvalues count as zero.
pub const EIG_RTOL: f64 = 1e-12;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted nonincreasing.
/// Column `a` of the returned matrix is the eigenvector of eigenvalue `a`.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Moore-Penrose pseudoinverse by SVD. Singular values below
/// `rtol * max_singular_value` are treated as zero. Returns the
/// pseudoinverse and the numerical rank.
pub fn pinv(m: &DMatrix<f64>, rtol: f64) -> (DMatrix<f64>, usize) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (DMatrix::zeros(cols, rows), 0);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rtol * smax;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut out = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            // out += v_i * u_i^T / s
            let v_i = v_t.row(i).transpose();
            let u_i = u.column(i);
            out += (v_i * u_i.transpose()) / s;
        }
    }
    (out, rank)
}

/// Symmetric positive-semidefinite square root. The input is symmetrized and
/// negative eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let (values, vectors) = sym_eigen_desc(m);
    let roots = DVector::from_iterator(n, values.iter().map(|&l| l.max(0.0).sqrt()));
    let scaled = DMatrix::from_fn(n, n, |r, c| vectors[(r, c)] * roots[c]);
    let root = &scaled * vectors.transpose();
    (&root + root.transpose()) * 0.5
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c])
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
