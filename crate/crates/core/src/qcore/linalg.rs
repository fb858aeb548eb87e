//! Small dense complex linear-algebra helpers shared by the state, channel
//! and code modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a matrix from row-major real entries.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| r(x)))
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix. The input is symmetrised first so
/// rounding-level anti-Hermitian parts do not leak into the spectrum.
/// Eigenvalues are returned in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * r(0.5);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        if w == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.adjoint()) * r(w);
    }
    out
}

/// Factor `B` with `m = B B†`, dropping eigenvalues at or below `cutoff`.
/// Columns are `sqrt(λ_k) v_k`.
pub fn psd_factor(m: &CMatrix, cutoff: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > cutoff).collect();
    let n = m.nrows();
    CMatrix::from_fn(n, kept.len(), |i, j| {
        vectors[(i, kept[j])] * values[kept[j]].sqrt()
    })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Moore-Penrose pseudo-inverse together with the numerical rank.
pub fn pseudo_inverse(m: &CMatrix, rel_tol: f64) -> (CMatrix, usize) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd computed u");
    let v_t = svd.v_t.expect("svd computed v_t");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cutoff = smax * rel_tol;
    let mut rank = 0;
    let mut pinv = CMatrix::zeros(m.ncols(), m.nrows());
    for k in 0..s.len() {
        if s[k] > cutoff && s[k] > 0.0 {
            rank += 1;
            let uk = u.column(k);
            let vk = v_t.row(k).adjoint();
            pinv += (vk * uk.adjoint()) * r(1.0 / s[k]);
        }
    }
    (pinv, rank)
}

/// Column-stacking of a square matrix into a vector with index `i * n + j`
/// for entry `(i, j)` (row-major flattening).
pub fn vec_row_major(m: &CMatrix) -> CVector {
    let (rows, cols) = m.shape();
    CVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvec_row_major(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}
