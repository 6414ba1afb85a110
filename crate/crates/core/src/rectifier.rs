//! Newton-type rectification of almost-multiplicative linear maps.
//!
//! For a linear map `φ: M → A` out of a semisimple algebra with separability
//! idempotent `e = Σ e_1 ⊗ e_2`, one step is
//!
//! ```text
//! τφ(a) = φ(a) + Σ φ(e_1) · [φ(e_2 a) − φ(e_2) φ(a)]
//! ```
//!
//! Homomorphisms are fixed points, and near a homomorphism the
//! multiplicativity defect is squared (up to a constant) at every step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, SeparabilityIdempotent};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::numfmt::{MatrixText, Real};
use crate::Scalar;

/// Default convergence tolerance on the multiplicativity defect.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Linear map between two algebras, as a `dim(target) × dim(source)` matrix.
#[derive(Debug, Clone)]
pub struct FiberMap {
    pub source: Arc<Algebra>,
    pub target: Arc<Algebra>,
    pub matrix: Matrix,
}

impl FiberMap {
    pub fn new(source: Arc<Algebra>, target: Arc<Algebra>, matrix: Matrix) -> Result<Self> {
        if source.field() != target.field() {
            return Err(Error::FieldMismatch { left: source.field(), right: target.field() });
        }
        if matrix.shape() != (target.dim(), source.dim()) {
            return Err(Error::InvalidArgument(format!(
                "map matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(Self { source, target, matrix })
    }

    pub fn identity(alg: &Arc<Algebra>) -> Self {
        let d = alg.dim();
        Self { source: Arc::clone(alg), target: Arc::clone(alg), matrix: Matrix::identity(d, d) }
    }

    pub fn zero(source: &Arc<Algebra>, target: &Arc<Algebra>) -> Self {
        Self {
            source: Arc::clone(source),
            target: Arc::clone(target),
            matrix: Matrix::zeros(target.dim(), source.dim()),
        }
    }

    /// Same algebras, new matrix.
    pub fn with_matrix(&self, matrix: Matrix) -> Self {
        debug_assert_eq!(matrix.shape(), self.matrix.shape());
        Self { source: Arc::clone(&self.source), target: Arc::clone(&self.target), matrix }
    }

    pub fn apply(&self, a: &Vector) -> Vector {
        &self.matrix * a
    }

    /// Operator norm between the inner-product spaces.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.target.orthonormal_map(&self.source, &self.matrix))
    }

    pub fn distance(&self, other: &FiberMap) -> f64 {
        self.with_matrix(&self.matrix - &other.matrix).norm()
    }

    /// Images of the orthonormal source basis.
    fn orthonormal_images(&self) -> (Vec<Vector>, Vec<Vector>) {
        let basis = self.source.orthonormal_basis();
        let images = basis.iter().map(|u| self.apply(u)).collect();
        (basis, images)
    }
}

/// `max ‖φ(uv) − φ(u)φ(v)‖` over orthonormal source basis pairs, measured in
/// the target's element norm.
pub fn multiplicativity_defect(phi: &FiberMap) -> f64 {
    let (basis, images) = phi.orthonormal_images();
    let mut worst: f64 = 0.0;
    for (u, pu) in basis.iter().zip(&images) {
        for (v, pv) in basis.iter().zip(&images) {
            let uv = phi.source.mul_unchecked(u, v);
            let diff = phi.apply(&uv) - phi.target.mul_unchecked(pu, pv);
            let n = phi.target.element_norm(&diff);
            if n.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(n);
        }
    }
    worst
}

/// One Newton-type correction step `τφ = φ + φ(e_1) φ^∨(e_2, −)`.
pub fn tau_step(phi: &FiberMap, e: &SeparabilityIdempotent) -> FiberMap {
    let src = &phi.source;
    let tgt = &phi.target;
    let d = src.dim();
    debug_assert_eq!(e.coeffs.shape(), (d, d));
    // w_j = Σ_i E[i][j] φ(b_i)
    let w = &phi.matrix * &e.coeffs;
    let cols: Vec<Vector> = (0..d).map(|k| phi.matrix.column(k).into_owned()).collect();
    let mut out = phi.matrix.clone();
    for k in 0..d {
        let mut acc = Vector::zeros(tgt.dim());
        for j in 0..d {
            // φ^∨(b_j, b_k) = φ(b_j b_k) − φ(b_j) φ(b_k)
            let mut vee = -tgt.mul_unchecked(&cols[j], &cols[k]);
            for &(m, c) in &src.table[j][k] {
                vee.axpy(c, &cols[m], Scalar::new(1.0, 0.0));
            }
            let wj = w.column(j).into_owned();
            acc += tgt.mul_unchecked(&wj, &vee);
        }
        let mut col = out.column_mut(k);
        col += &acc;
    }
    phi.with_matrix(out)
}

/// `φ*(a) = φ(a*)*`.
pub fn star_of_map(phi: &FiberMap) -> Result<FiberMap> {
    let si = phi.source.involution().ok_or(Error::MissingInvolution)?;
    let ti = phi.target.involution().ok_or(Error::MissingInvolution)?;
    if si.conjugate_linear != ti.conjugate_linear {
        return Err(Error::InvolutionKindMismatch);
    }
    let m = if si.conjugate_linear {
        &ti.matrix * phi.matrix.conjugate() * si.matrix.conjugate()
    } else {
        &ti.matrix * &phi.matrix * &si.matrix
    };
    Ok(phi.with_matrix(m))
}

/// Self-adjoint step `(τφ + (τ(φ*))*) / 2`.
pub fn tau_sa_step(phi: &FiberMap, e: &SeparabilityIdempotent) -> Result<FiberMap> {
    let plain = tau_step(phi, e);
    let starred = star_of_map(&tau_step(&star_of_map(phi)?, e))?;
    Ok(phi.with_matrix((plain.matrix + starred.matrix) * Scalar::new(0.5, 0.0)))
}

/// `a ↦ φ(a) + ε(a)·(1 − φ(1))`, where `ε(a) = ⟨1, a⟩ / ⟨1, 1⟩` is the unit
/// coordinate of `a` along the orthogonal splitting `ℂ1 ⊕ 1^⊥`.
pub fn unitalize(phi: &FiberMap) -> FiberMap {
    let one = phi.source.unit();
    let correction = phi.target.unit() - phi.apply(one);
    if correction.iter().all(|z| *z == Scalar::new(0.0, 0.0)) {
        return phi.clone();
    }
    let p_one = phi.source.inner_product() * one;
    let norm_sq = one.dotc(&p_one);
    let functional = p_one.adjoint() / norm_sq;
    phi.with_matrix(&phi.matrix + correction * functional)
}

/// Smallest singular value of the map between orthonormal frames.
pub fn injectivity_margin(phi: &FiberMap) -> f64 {
    linalg::injectivity_sigma(&phi.target.orthonormal_map(&phi.source, &phi.matrix))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectifyStatus {
    Converged,
    Diverged,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct RectifyResult {
    pub map: FiberMap,
    /// defect of the input followed by the defect after every step
    pub defect_trace: Vec<f64>,
    pub iterations: usize,
    pub status: RectifyStatus,
}

impl RectifyResult {
    pub fn final_defect(&self) -> f64 {
        *self.defect_trace.last().expect("trace holds at least the initial defect")
    }

    pub fn record(&self) -> RectifyRecord {
        RectifyRecord {
            status: self.status,
            iterations: self.iterations,
            defect_trace: self.defect_trace.iter().copied().map(Real).collect(),
            map: MatrixText::from_matrix(&self.map.matrix),
        }
    }
}

/// Serialized form of a [`RectifyResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectifyRecord {
    pub status: RectifyStatus,
    pub iterations: usize,
    pub defect_trace: Vec<Real>,
    pub map: MatrixText,
}

/// Iterates [`tau_step`] (or [`tau_sa_step`] in star mode) until the
/// multiplicativity defect drops to `tol`. Two consecutive defect increases,
/// or a non-finite defect, stop the iteration with status `Diverged`.
pub fn rectify(
    phi: &FiberMap,
    e: &SeparabilityIdempotent,
    star_mode: bool,
    tol: f64,
    max_iter: usize,
) -> Result<RectifyResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if e.coeffs.nrows() != phi.source.dim() {
        return Err(Error::DimensionMismatch { expected: phi.source.dim(), actual: e.coeffs.nrows() });
    }
    let mut current = phi.clone();
    let mut defect = multiplicativity_defect(&current);
    let mut trace = vec![defect];
    let finish = |map, trace, iterations, status| Ok(RectifyResult { map, defect_trace: trace, iterations, status });
    if !defect.is_finite() {
        return finish(current, trace, 0, RectifyStatus::Diverged);
    }
    if defect <= tol {
        return finish(current, trace, 0, RectifyStatus::Converged);
    }
    let mut increases = 0;
    for it in 1..=max_iter {
        current = if star_mode { tau_sa_step(&current, e)? } else { tau_step(&current, e) };
        let next = multiplicativity_defect(&current);
        trace.push(next);
        if !next.is_finite() {
            return finish(current, trace, it, RectifyStatus::Diverged);
        }
        if next <= tol {
            return finish(current, trace, it, RectifyStatus::Converged);
        }
        if next > defect {
            increases += 1;
            if increases >= 2 {
                return finish(current, trace, it, RectifyStatus::Diverged);
            }
        } else {
            increases = 0;
        }
        defect = next;
    }
    finish(current, trace, max_iter, RectifyStatus::MaxIter)
}

/// Constants `K₂` (norm of multiplication as a bilinear map) and `K₀`
/// (two-sided bound on the norm of the unit), in the norm pulled back along
/// the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformBounds {
    pub k2: f64,
    pub k0: f64,
}

impl UniformBounds {
    pub const TRIVIAL: UniformBounds = UniformBounds { k2: 1.0, k0: 1.0 };

    /// Bounds for a single fiber: `‖a‖_x := ‖φ(a)‖` on the source.
    pub fn of_map(phi: &FiberMap) -> Self {
        let (basis, images) = phi.orthonormal_images();
        let norms: Vec<f64> = images.iter().map(|v| phi.target.element_norm(v)).collect();
        let mut k2: f64 = 1.0;
        for (u, nu) in basis.iter().zip(&norms) {
            for (v, nv) in basis.iter().zip(&norms) {
                let denom = nu * nv;
                let num = phi.target.element_norm(&phi.apply(&phi.source.mul_unchecked(u, v)));
                if denom > 0.0 {
                    k2 = k2.max(num / denom);
                } else if num > 0.0 {
                    k2 = f64::INFINITY;
                }
            }
        }
        let unit_norm = phi.target.element_norm(&phi.apply(phi.source.unit()));
        let k0 = if unit_norm > 0.0 { unit_norm.max(1.0 / unit_norm).max(1.0) } else { f64::INFINITY };
        UniformBounds { k2, k0 }
    }

    pub fn join(self, other: UniformBounds) -> UniformBounds {
        UniformBounds { k2: self.k2.max(other.k2), k0: self.k0.max(other.k0) }
    }
}
