//! Small dense helpers shared by the kernels.

use nalgebra::{DMatrix, DVector};

use crate::Scalar;

pub type Matrix = DMatrix<Scalar>;
pub type Vector = DVector<Scalar>;

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.norm();
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest of the `ncols` singular values of a map `C^ncols -> C^nrows`;
/// zero whenever the map cannot be injective.
pub fn injectivity_sigma(m: &Matrix) -> f64 {
    if m.ncols() == 0 {
        return 0.0;
    }
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    if m.ncols() == 1 {
        return m.norm();
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn invert(m: &Matrix) -> Option<Matrix> {
    if m.nrows() != m.ncols() {
        return None;
    }
    m.clone().try_inverse()
}

/// `a · b`, skipping the zero entries of `a`; for the sparse multiplication
/// matrices of basis elements.
pub fn sparse_mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.nrows());
    let zero = Scalar::new(0.0, 0.0);
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.ncols() {
        for k in 0..a.nrows() {
            let v = a[(k, i)];
            if v != zero {
                for j in 0..b.ncols() {
                    out[(k, j)] += v * b[(i, j)];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_real(m: &Matrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

pub fn from_real_rows(rows: &[&[f64]]) -> Matrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    Matrix::from_fn(r, c, |i, j| real(rows[i][j]))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}
