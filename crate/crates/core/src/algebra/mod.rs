//! Finite-dimensional unital algebras over ℝ or ℂ given by structure constants.
//!
//! Elements are coefficient vectors over a fixed basis `b_0, …, b_{d-1}` with
//! `b_i b_j = Σ_k c[i][j][k] b_k`. Scalars are always stored as complex
//! numbers; algebras over ℝ keep every coefficient real.

mod construct;
mod document;
mod separability;
mod trace;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::Scalar;

pub use construct::{direct_sum, dual_numbers, make_matrix_algebra, product_of_matrix_algebras, DivisionRing};
pub use document::AlgebraDocument;
pub use separability::{
    separability_defects, separability_idempotent, star_symmetrize, SeparabilityDefects, SeparabilityIdempotent,
    TensorCoeffs, SEMISIMPLICITY_TOL,
};
pub use trace::{regular_trace, semisimplicity_check, SemisimplicityReport, TraceData};

/// Tolerance for the structural invariants checked on construction.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundField {
    Real,
    Complex,
}

/// Involution `a ↦ a*`, stored as the matrix `J` of its action on basis
/// elements. Conjugate-linear involutions act as `a* = J·conj(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    pub matrix: Matrix,
    pub conjugate_linear: bool,
}

impl Involution {
    pub fn apply(&self, a: &Vector) -> Vector {
        if self.conjugate_linear {
            &self.matrix * a.conjugate()
        } else {
            &self.matrix * a
        }
    }
}

/// Dense buffer with a list of touched coordinates, reset by
/// [`SparseAccumulator::drain_max`].
struct SparseAccumulator {
    values: Vec<Scalar>,
    touched: Vec<usize>,
}

impl SparseAccumulator {
    fn new(dim: usize) -> Self {
        Self { values: vec![Scalar::new(0.0, 0.0); dim], touched: Vec::new() }
    }

    fn add(&mut self, k: usize, v: Scalar) {
        self.values[k] += v;
        self.touched.push(k);
    }

    /// Largest accumulated modulus; clears the buffer.
    fn drain_max(&mut self) -> f64 {
        let mut max = 0.0f64;
        for k in self.touched.drain(..) {
            max = max.max(self.values[k].norm_sqr());
            self.values[k] = Scalar::new(0.0, 0.0);
        }
        max.sqrt()
    }
}

/// Change of coordinates to an orthonormal frame of the inner product,
/// `P = Rᴴ R`. Absent when the inner product is the coordinate one.
#[derive(Debug, Clone)]
struct Metric {
    r: Matrix,
    r_inv: Matrix,
}

#[derive(Debug, Clone)]
pub struct Algebra {
    field: GroundField,
    dim: usize,
    constants: Vec<Scalar>,
    pub(crate) table: Vec<Vec<Vec<(usize, Scalar)>>>,
    unit: Vector,
    involution: Option<Involution>,
    inner_product: Matrix,
    metric: Option<Metric>,
    /// Faithful matrix realization `ρ(b_i)` whose operator norm equals the
    /// left-regular norm; only set by the matrix-algebra constructors.
    realization: Option<Vec<Matrix>>,
}

impl Algebra {
    /// Builds an algebra from dense structure constants in `(i, j, k)` row-major
    /// order and validates associativity, the unit law, the involution laws and
    /// positivity of the inner product (coordinate inner product when `None`).
    pub fn new(
        field: GroundField,
        dim: usize,
        constants: Vec<Scalar>,
        unit: Vector,
        involution: Option<Involution>,
        inner_product: Option<Matrix>,
    ) -> Result<Self> {
        let alg = Self::assemble(field, dim, constants, unit, involution, inner_product, None)?;
        alg.validate()?;
        Ok(alg)
    }

    pub(crate) fn assemble(
        field: GroundField,
        dim: usize,
        constants: Vec<Scalar>,
        unit: Vector,
        involution: Option<Involution>,
        inner_product: Option<Matrix>,
        realization: Option<Vec<Matrix>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        if constants.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, actual: constants.len() });
        }
        if unit.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: unit.len() });
        }
        if let Some(inv) = &involution {
            if inv.matrix.shape() != (dim, dim) {
                return Err(Error::InvalidAlgebra("involution matrix has wrong shape".into()));
            }
        }
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let c = constants[(i * dim + j) * dim + k];
                    if c != Scalar::new(0.0, 0.0) {
                        table[i][j].push((k, c));
                    }
                }
            }
        }
        let (inner_product, metric) = match inner_product {
            None => (Matrix::identity(dim, dim), None),
            Some(p) => {
                if p.shape() != (dim, dim) {
                    return Err(Error::InvalidAlgebra("inner product has wrong shape".into()));
                }
                if p == Matrix::identity(dim, dim) {
                    (p, None)
                } else {
                    let asym = linalg::max_abs_diff(&p, &p.adjoint());
                    if asym > STRUCTURE_TOL {
                        return Err(Error::InvalidAlgebra("inner product is not Hermitian".into()));
                    }
                    let chol = Cholesky::new(p.clone())
                        .ok_or_else(|| Error::InvalidAlgebra("inner product is not positive definite".into()))?;
                    let r = chol.l().adjoint();
                    let r_inv =
                        linalg::invert(&r).ok_or_else(|| Error::InvalidAlgebra("inner product is singular".into()))?;
                    (p, Some(Metric { r, r_inv }))
                }
            }
        };
        let realization = if metric.is_none() { realization } else { None };
        Ok(Self { field, dim, constants, table, unit, involution, inner_product, metric, realization })
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        if self.field == GroundField::Real {
            let all_real = self.table.iter().flatten().flatten().all(|&(_, z)| z.im == 0.0)
                && self.unit.iter().all(|z| z.im == 0.0)
                && self.involution.as_ref().is_none_or(|inv| linalg::is_real(&inv.matrix))
                && linalg::is_real(&self.inner_product);
            if !all_real {
                return Err(Error::InvalidAlgebra("real algebra with complex data".into()));
            }
        }
        let scale = self.table.iter().flatten().flatten().map(|&(_, c)| c.norm_sqr()).fold(1.0, f64::max).sqrt();
        let tol = STRUCTURE_TOL * scale * scale;
        // Sparse accumulator: every law is checked as `lhs − rhs = 0`, touching
        // only the coordinates the structure table reaches.
        let mut acc = SparseAccumulator::new(d);
        // `(b_i b_j) b_k` vanishes unless `b_i b_j ≠ 0` and `b_i (b_j b_k)`
        // unless `b_j b_k ≠ 0`, so only those triples need checking.
        let right_support: Vec<Vec<usize>> =
            (0..d).map(|j| (0..d).filter(|&k| !self.table[j][k].is_empty()).collect()).collect();
        let all: Vec<usize> = (0..d).collect();
        for i in 0..d {
            for j in 0..d {
                let ks = if self.table[i][j].is_empty() { &right_support[j] } else { &all };
                for &k in ks {
                    for &(m, c1) in &self.table[i][j] {
                        for &(l, c2) in &self.table[m][k] {
                            acc.add(l, c1 * c2);
                        }
                    }
                    for &(m, c1) in &self.table[j][k] {
                        for &(l, c2) in &self.table[i][m] {
                            acc.add(l, -(c1 * c2));
                        }
                    }
                    if acc.drain_max() > tol {
                        return Err(Error::InvalidAlgebra(format!(
                            "associativity fails on basis triple ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        let zero = Scalar::new(0.0, 0.0);
        let unit_support: Vec<(usize, Scalar)> =
            self.unit.iter().enumerate().filter(|(_, &u)| u != zero).map(|(j, &u)| (j, u)).collect();
        for i in 0..d {
            for side in [0, 1] {
                for &(j, u) in &unit_support {
                    let entries = if side == 0 { &self.table[j][i] } else { &self.table[i][j] };
                    for &(k, c) in entries {
                        acc.add(k, u * c);
                    }
                }
                acc.add(i, -Scalar::new(1.0, 0.0));
                if acc.drain_max() > tol {
                    return Err(Error::InvalidAlgebra(format!("unit law fails on basis element {i}")));
                }
            }
        }
        if let Some(inv) = &self.involution {
            // basis vectors are real, so `b_i* ` is column `i` in either case
            let cols: Vec<Vec<(usize, Scalar)>> = (0..d)
                .map(|i| (0..d).filter_map(|k| Some((k, inv.matrix[(k, i)])).filter(|e| e.1 != zero)).collect())
                .collect();
            let scalar_star = |c: Scalar| if inv.conjugate_linear { c.conj() } else { c };
            for i in 0..d {
                for &(k, v) in &cols[i] {
                    for &(l, w) in &cols[k] {
                        acc.add(l, scalar_star(v) * w);
                    }
                }
                acc.add(i, -Scalar::new(1.0, 0.0));
                if acc.drain_max() > tol {
                    return Err(Error::InvalidAlgebra(format!("involution is not involutive on b_{i}")));
                }
            }
            for i in 0..d {
                for j in 0..d {
                    for &(k, c) in &self.table[i][j] {
                        for &(l, w) in &cols[k] {
                            acc.add(l, scalar_star(c) * w);
                        }
                    }
                    for &(p, v) in &cols[j] {
                        for &(q, w) in &cols[i] {
                            for &(l, c) in &self.table[p][q] {
                                acc.add(l, -(v * w * c));
                            }
                        }
                    }
                    if acc.drain_max() > tol {
                        return Err(Error::InvalidAlgebra(format!(
                            "involution is not anti-multiplicative on (b_{i}, b_{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn field(&self) -> GroundField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &Vector {
        &self.unit
    }

    pub fn involution(&self) -> Option<&Involution> {
        self.involution.as_ref()
    }

    pub fn inner_product(&self) -> &Matrix {
        &self.inner_product
    }

    /// Dense structure constants in `(i, j, k)` row-major order.
    pub fn structure_constants(&self) -> &[Scalar] {
        &self.constants
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> Scalar {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    pub fn realization(&self) -> Option<&[Matrix]> {
        self.realization.as_deref()
    }

    pub fn basis(&self, i: usize) -> Vector {
        let mut v = Vector::zeros(self.dim);
        v[i] = Scalar::new(1.0, 0.0);
        v
    }

    pub fn zero(&self) -> Vector {
        Vector::zeros(self.dim)
    }

    fn check_len(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: v.len() });
        }
        Ok(())
    }

    pub fn multiply(&self, a: &Vector, b: &Vector) -> Result<Vector> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub(crate) fn mul_unchecked(&self, a: &Vector, b: &Vector) -> Vector {
        let zero = Scalar::new(0.0, 0.0);
        let mut out = Vector::zeros(self.dim);
        for (i, &ai) in a.iter().enumerate() {
            if ai == zero {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == zero {
                    continue;
                }
                let s = ai * bj;
                for &(k, c) in &self.table[i][j] {
                    out[k] += s * c;
                }
            }
        }
        out
    }

    /// Matrix of `x ↦ a·x` in basis coordinates.
    pub fn left_mult_matrix(&self, a: &Vector) -> Matrix {
        let mut l = Matrix::zeros(self.dim, self.dim);
        for (i, &ai) in a.iter().enumerate() {
            if ai == Scalar::new(0.0, 0.0) {
                continue;
            }
            for j in 0..self.dim {
                for &(k, c) in &self.table[i][j] {
                    l[(k, j)] += ai * c;
                }
            }
        }
        l
    }

    /// Matrix of `x ↦ x·a` in basis coordinates.
    pub fn right_mult_matrix(&self, a: &Vector) -> Matrix {
        let mut r = Matrix::zeros(self.dim, self.dim);
        for (j, &aj) in a.iter().enumerate() {
            if aj == Scalar::new(0.0, 0.0) {
                continue;
            }
            for i in 0..self.dim {
                for &(k, c) in &self.table[i][j] {
                    r[(k, i)] += aj * c;
                }
            }
        }
        r
    }

    pub fn star(&self, a: &Vector) -> Result<Vector> {
        self.check_len(a)?;
        let inv = self.involution.as_ref().ok_or(Error::MissingInvolution)?;
        Ok(inv.apply(a))
    }

    /// Coordinates in an orthonormal frame of the inner product.
    pub fn to_orthonormal(&self, a: &Vector) -> Vector {
        match &self.metric {
            None => a.clone(),
            Some(m) => &m.r * a,
        }
    }

    pub fn from_orthonormal(&self, y: &Vector) -> Vector {
        match &self.metric {
            None => y.clone(),
            Some(m) => &m.r_inv * y,
        }
    }

    /// Orthonormal basis of the inner product, expressed in basis coordinates.
    pub fn orthonormal_basis(&self) -> Vec<Vector> {
        (0..self.dim).map(|k| self.from_orthonormal(&self.basis(k))).collect()
    }

    /// Converts a linear map written in basis coordinates (`self` as target,
    /// `source` as source) into orthonormal coordinates on both sides.
    pub fn orthonormal_map(&self, source: &Algebra, m: &Matrix) -> Matrix {
        let left = match &self.metric {
            None => m.clone(),
            Some(t) => &t.r * m,
        };
        match &source.metric {
            None => left,
            Some(s) => left * &s.r_inv,
        }
    }

    /// Norm induced by the inner product.
    pub fn vector_norm(&self, a: &Vector) -> f64 {
        self.to_orthonormal(a).norm()
    }

    /// Operator norm of left multiplication by `a` on `(A, inner product)`.
    pub fn element_norm(&self, a: &Vector) -> f64 {
        if a.iter().all(|z| *z == Scalar::new(0.0, 0.0)) {
            return 0.0;
        }
        if let Some(rep) = &self.realization {
            let mut m = Matrix::zeros(rep[0].nrows(), rep[0].ncols());
            for (ai, ri) in a.iter().zip(rep) {
                if *ai != Scalar::new(0.0, 0.0) {
                    m += ri * *ai;
                }
            }
            return linalg::spectral_norm(&m);
        }
        self.element_norm_regular(a)
    }

    /// `element_norm` computed from the left-regular matrix, bypassing any
    /// matrix realization.
    pub fn element_norm_regular(&self, a: &Vector) -> f64 {
        let l = self.left_mult_matrix(a);
        let l = match &self.metric {
            None => l,
            Some(m) => &m.r * l * &m.r_inv,
        };
        linalg::spectral_norm(&l)
    }

    /// Evaluates the matrix realization at `a`, when one is attached.
    pub fn realize(&self, a: &Vector) -> Option<Matrix> {
        let rep = self.realization.as_ref()?;
        let mut m = Matrix::zeros(rep[0].nrows(), rep[0].ncols());
        for (ai, ri) in a.iter().zip(rep) {
            m += ri * *ai;
        }
        Some(m)
    }

    /// Coordinates of a matrix in the span of the realization, by least squares.
    pub fn unrealize(&self, m: &Matrix) -> Option<Vector> {
        let rep = self.realization.as_ref()?;
        let n = rep[0].len();
        let basis = Matrix::from_fn(n, self.dim, |r, c| rep[c][r]);
        let rhs = Vector::from_iterator(n, m.iter().copied());
        let sol = basis.svd(true, true).solve(&rhs, 1e-14).ok()?;
        Some(match self.field {
            GroundField::Real => sol.map(|z| Scalar::new(z.re, 0.0)),
            GroundField::Complex => sol,
        })
    }
}
