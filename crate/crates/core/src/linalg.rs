//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn real_diag(values: &[f64]) -> CMat {
    let n = values.len();
    let mut m = zeros(n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

/// Spectral (operator 2-) norm: the largest singular value, computed as the
/// square root of the top eigenvalue of the smaller Gram matrix.
///
/// nalgebra's complex SVD mis-factors some rank-deficient inputs, so it is
/// not used anywhere in this crate.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    let gram = (&gram + gram.adjoint()).scale(0.5);
    gram.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Operator norm of a matrix known to be Hermitian: max |eigenvalue|.
pub fn hermitian_norm(m: &CMat) -> f64 {
    if m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    m.symmetric_eigenvalues().amax()
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    m.symmetric_eigenvalues().min()
}

/// Eigen-decomposition of a Hermitian matrix with eigenpairs sorted by
/// ascending eigenvalue.
pub fn sorted_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Columns of `m` selected by index, as a new n×k matrix.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Horizontal concatenation of blocks with a common row count.
pub fn hstack(n: usize, blocks: &[&CMat]) -> CMat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, cols);
    let mut at = 0;
    for b in blocks {
        for j in 0..b.ncols() {
            out.set_column(at, &b.column(j));
            at += 1;
        }
    }
    out
}

/// ‖U†U − I‖ in operator norm.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    op_norm(&(u.adjoint() * u - identity(n)))
}

/// Operator norm of the off-diagonal part.
pub fn off_diagonal_norm(m: &CMat) -> f64 {
    let mut off = m.clone();
    for i in 0..m.nrows().min(m.ncols()) {
        off[(i, i)] = ZERO;
    }
    op_norm(&off)
}

/// Matrix as nested `[re, im]` pairs, row-major.
pub fn to_entries(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Inverse of [`to_entries`]; `None` when rows are ragged.
pub fn from_entries(entries: &[Vec<[f64; 2]>]) -> Option<CMat> {
    let rows = entries.len();
    let cols = entries.first().map_or(0, Vec::len);
    if entries.iter().any(|r| r.len() != cols) {
        return None;
    }
    Some(CMat::from_fn(rows, cols, |i, j| {
        let [re, im] = entries[i][j];
        c(re, im)
    }))
}
