//! Canonical separability idempotents `e ∈ A ⊗ A` built from the regular trace
//! form, and the tensor operations needed to check and symmetrize them.
//!
//! A tensor `Σ E[i][j] b_i ⊗ b_j` is stored as its coefficient matrix `E`.
//! `A` acts on `A ⊗ A` by left multiplication on the first leg and right
//! multiplication on the second, so in coordinates `m·e = L_m E` and
//! `e·m = E R_mᵀ`.

use std::sync::Arc;

use serde::Serialize;

use super::trace::report_from_trace;
use super::{regular_trace, Algebra};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Default threshold on `σ_min / σ_max` of the trace Gram matrix.
pub const SEMISIMPLICITY_TOL: f64 = 1e-8;

/// Coefficient-matrix operations on `A ⊗ A`.
pub struct TensorCoeffs;

impl TensorCoeffs {
    /// `m·e`
    pub fn left_act(alg: &Algebra, m: &Vector, e: &Matrix) -> Matrix {
        linalg::sparse_mul(&alg.left_mult_matrix(m), e)
    }

    /// `e·m`
    pub fn right_act(alg: &Algebra, m: &Vector, e: &Matrix) -> Matrix {
        linalg::sparse_mul(&alg.right_mult_matrix(m), &e.transpose()).transpose()
    }

    /// Multiplication map `e_1 ⊗ e_2 ↦ e_1 e_2`.
    pub fn multiply(alg: &Algebra, e: &Matrix) -> Vector {
        let mut out = Vector::zeros(alg.dim());
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let eij = e[(i, j)];
                if eij == crate::Scalar::new(0.0, 0.0) {
                    continue;
                }
                for &(k, c) in &alg.table[i][j] {
                    out[k] += eij * c;
                }
            }
        }
        out
    }

    /// Tensor flip `σ(e_1 ⊗ e_2) = e_2 ⊗ e_1`.
    pub fn flip(e: &Matrix) -> Matrix {
        e.transpose()
    }

    /// Legwise involution `(e_1 ⊗ e_2)* = e_1* ⊗ e_2*`.
    pub fn star(alg: &Algebra, e: &Matrix) -> Result<Matrix> {
        let inv = alg.involution().ok_or(Error::MissingInvolution)?;
        let j = &inv.matrix;
        Ok(if inv.conjugate_linear { j * e.conjugate() * j.transpose() } else { j * e * j.transpose() })
    }

    /// `(α ⊗ α)(e)` for a linear map `α` given in basis coordinates.
    pub fn apply_map(alpha: &Matrix, e: &Matrix) -> Matrix {
        alpha * e * alpha.transpose()
    }

    /// Norm on `A ⊗ A` induced by the coordinate inner product on basis pairs.
    pub fn norm(e: &Matrix) -> f64 {
        e.norm()
    }
}

/// Element `e = Σ E[i][j] b_i ⊗ b_j` of `A ⊗ A` that is central and maps to 1
/// under multiplication.
#[derive(Debug, Clone)]
pub struct SeparabilityIdempotent {
    pub algebra: Arc<Algebra>,
    pub coeffs: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparabilityDefects {
    pub centrality: f64,
    pub unit: f64,
}

impl SeparabilityDefects {
    pub fn max(&self) -> f64 {
        self.centrality.max(self.unit)
    }
}

/// Centrality defect `max_m ‖m·e − e·m‖` over an orthonormal basis and unit
/// defect `‖mult(e) − 1‖`.
pub fn separability_defects(alg: &Algebra, e: &Matrix) -> Result<SeparabilityDefects> {
    let d = alg.dim();
    if e.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, actual: e.nrows().max(e.ncols()) });
    }
    let centrality = alg
        .orthonormal_basis()
        .iter()
        .map(|m| TensorCoeffs::norm(&(TensorCoeffs::left_act(alg, m, e) - TensorCoeffs::right_act(alg, m, e))))
        .fold(0.0, f64::max);
    let unit = alg.element_norm(&(TensorCoeffs::multiply(alg, e) - alg.unit()));
    Ok(SeparabilityDefects { centrality, unit })
}

/// The canonical idempotent `Σ_i b_i ⊗ b^i`, where `(b^i)` is the basis dual
/// to `(b_i)` under the trace form; its coefficient matrix is `G⁻¹`.
pub fn separability_idempotent(alg: &Arc<Algebra>) -> Result<SeparabilityIdempotent> {
    let trace = regular_trace(alg);
    let report = report_from_trace(&trace, SEMISIMPLICITY_TOL);
    if !report.semisimple {
        return Err(Error::NotSemisimple { ratio: report.ratio });
    }
    let coeffs = linalg::invert(&trace.gram).ok_or(Error::NotSemisimple { ratio: 0.0 })?;
    Ok(SeparabilityIdempotent { algebra: Arc::clone(alg), coeffs })
}

/// `(e + σ(e)*) / 2`, which satisfies `e* = σ(e)`.
pub fn star_symmetrize(e: &SeparabilityIdempotent) -> Result<SeparabilityIdempotent> {
    let alg = &e.algebra;
    let flipped_star = TensorCoeffs::star(alg, &TensorCoeffs::flip(&e.coeffs))?;
    let coeffs = (&e.coeffs + flipped_star) * crate::Scalar::new(0.5, 0.0);
    Ok(SeparabilityIdempotent { algebra: Arc::clone(alg), coeffs })
}

impl SeparabilityIdempotent {
    pub fn defects(&self) -> SeparabilityDefects {
        separability_defects(&self.algebra, &self.coeffs).expect("coefficient matrix matches its algebra")
    }

    /// `‖e* − σ(e)‖`
    pub fn flip_star_defect(&self) -> Result<f64> {
        let star = TensorCoeffs::star(&self.algebra, &self.coeffs)?;
        Ok(TensorCoeffs::norm(&(star - TensorCoeffs::flip(&self.coeffs))))
    }
}
