use serde::{Deserialize, Serialize};

use super::{Algebra, GroundField, Involution};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisionRing {
    Real,
    Complex,
    Quaternion,
}

/// A division ring presented as an algebra over the ground field.
struct RingTable {
    dim: usize,
    /// products `d_p d_q = sign · d_r`, indexed `[p][q] -> (r, sign)`
    mul: Vec<Vec<(usize, f64)>>,
    /// conjugation sign of each basis element
    conj: Vec<f64>,
    /// complex matrix realization of each basis element
    rep: Vec<Matrix>,
}

fn ring_table(field: GroundField, ring: DivisionRing) -> Result<RingTable> {
    let c = |re: f64, im: f64| Scalar::new(re, im);
    match (field, ring) {
        (GroundField::Real, DivisionRing::Real) | (GroundField::Complex, DivisionRing::Complex) => Ok(RingTable {
            dim: 1,
            mul: vec![vec![(0, 1.0)]],
            conj: vec![1.0],
            rep: vec![Matrix::from_element(1, 1, c(1.0, 0.0))],
        }),
        (GroundField::Real, DivisionRing::Complex) => Ok(RingTable {
            dim: 2,
            mul: vec![vec![(0, 1.0), (1, 1.0)], vec![(1, 1.0), (0, -1.0)]],
            conj: vec![1.0, -1.0],
            rep: vec![Matrix::from_element(1, 1, c(1.0, 0.0)), Matrix::from_element(1, 1, c(0.0, 1.0))],
        }),
        (GroundField::Real, DivisionRing::Quaternion) => {
            // 1, i, j, k with ij = k, jk = i, ki = j
            let mul = vec![
                vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)],
                vec![(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
                vec![(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
                vec![(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
            ];
            let m = |a: Scalar, b: Scalar, cc: Scalar, d: Scalar| Matrix::from_row_slice(2, 2, &[a, b, cc, d]);
            let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
            let rep = vec![
                m(o, z, z, o),
                m(c(0.0, 1.0), z, z, c(0.0, -1.0)),
                m(z, o, c(-1.0, 0.0), z),
                m(z, c(0.0, 1.0), c(0.0, 1.0), z),
            ];
            Ok(RingTable { dim: 4, mul, conj: vec![1.0, -1.0, -1.0, -1.0], rep })
        }
        (GroundField::Complex, DivisionRing::Quaternion) => {
            Err(Error::UnsupportedDivisionRing("quaternions over ℂ do not form a division ring".into()))
        }
        (GroundField::Complex, DivisionRing::Real) => {
            Err(Error::UnsupportedDivisionRing("ℝ does not contain the ground field ℂ".into()))
        }
    }
}

/// The full matrix algebra `M_n(D)` over the ground field, with basis
/// `e_ij ⊗ d_p` (index `(i·n + j)·dim D + p`), the conjugate-transpose
/// involution, and the Frobenius inner product (orthonormal on this basis).
pub fn make_matrix_algebra(n: usize, field: GroundField, ring: DivisionRing) -> Result<Algebra> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be at least 1".into()));
    }
    let rt = ring_table(field, ring)?;
    let m = rt.dim;
    let dim = n * n * m;
    let idx = |i: usize, j: usize, p: usize| (i * n + j) * m + p;
    let mut constants = vec![Scalar::new(0.0, 0.0); dim * dim * dim];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for p in 0..m {
                    for q in 0..m {
                        let (r, sign) = rt.mul[p][q];
                        let (a, b, out) = (idx(i, j, p), idx(j, l, q), idx(i, l, r));
                        constants[(a * dim + b) * dim + out] = Scalar::new(sign, 0.0);
                    }
                }
            }
        }
    }
    let mut unit = Vector::zeros(dim);
    for i in 0..n {
        unit[idx(i, i, 0)] = Scalar::new(1.0, 0.0);
    }
    let mut inv = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            for p in 0..m {
                inv[(idx(j, i, p), idx(i, j, p))] = Scalar::new(rt.conj[p], 0.0);
            }
        }
    }
    let involution = Involution { matrix: inv, conjugate_linear: field == GroundField::Complex };
    let s = rt.rep[0].nrows();
    let mut realization = Vec::with_capacity(dim);
    for i in 0..n {
        for j in 0..n {
            let mut unit_ij = Matrix::zeros(n, n);
            unit_ij[(i, j)] = Scalar::new(1.0, 0.0);
            for p in 0..m {
                let r = linalg::kron(&unit_ij, &rt.rep[p]);
                debug_assert_eq!(r.nrows(), n * s);
                realization.push(r);
            }
        }
    }
    let alg = Algebra::assemble(field, dim, constants, unit, Some(involution), None, Some(realization))?;
    alg.validate()?;
    Ok(alg)
}

/// Direct product `A × B` with componentwise operations.
pub fn direct_sum(a: &Algebra, b: &Algebra) -> Result<Algebra> {
    let alg = direct_sum_unvalidated(&[a, b])?;
    alg.validate()?;
    Ok(alg)
}

/// `A₁ × … × A_k` assembled in one pass; factors share a ground field.
fn direct_sum_unvalidated(parts: &[&Algebra]) -> Result<Algebra> {
    let field = parts[0].field;
    if let Some(p) = parts.iter().find(|p| p.field != field) {
        return Err(Error::FieldMismatch { left: field, right: p.field });
    }
    let dim: usize = parts.iter().map(|p| p.dim).sum();
    let mut constants = vec![Scalar::new(0.0, 0.0); dim * dim * dim];
    let mut offset = 0;
    for p in parts {
        for i in 0..p.dim {
            for j in 0..p.dim {
                for &(k, c) in &p.table[i][j] {
                    constants[((i + offset) * dim + (j + offset)) * dim + (k + offset)] = c;
                }
            }
        }
        offset += p.dim;
    }
    let unit = Vector::from_iterator(dim, parts.iter().flat_map(|p| p.unit.iter().copied()));
    let first = parts[0].involution.as_ref();
    let involution = match first {
        Some(i0)
            if parts
                .iter()
                .all(|p| p.involution.as_ref().is_some_and(|i| i.conjugate_linear == i0.conjugate_linear)) =>
        {
            let blocks: Vec<Matrix> = parts.iter().map(|p| p.involution.as_ref().unwrap().matrix.clone()).collect();
            Some(Involution { matrix: linalg::block_diag(&blocks), conjugate_linear: i0.conjugate_linear })
        }
        _ => None,
    };
    let inners: Vec<Matrix> = parts.iter().map(|p| p.inner_product.clone()).collect();
    let inner = linalg::block_diag(&inners);
    let inner = if inner == Matrix::identity(dim, dim) { None } else { Some(inner) };
    let realization = if parts.iter().all(|p| p.realization.is_some()) {
        let sizes: Vec<usize> = parts.iter().map(|p| p.realization.as_ref().unwrap()[0].nrows()).collect();
        let total: usize = sizes.iter().sum();
        let mut out = Vec::with_capacity(dim);
        let mut corner = 0;
        for (p, &size) in parts.iter().zip(&sizes) {
            for m in p.realization.as_ref().unwrap() {
                let mut big = Matrix::zeros(total, total);
                big.view_mut((corner, corner), (size, size)).copy_from(m);
                out.push(big);
            }
            corner += size;
        }
        Some(out)
    } else {
        None
    };
    Algebra::assemble(field, dim, constants, unit, involution, inner, realization)
}

/// `Π M_{n_i}(D_i)` in the given order.
pub fn product_of_matrix_algebras(field: GroundField, blocks: &[(usize, DivisionRing)]) -> Result<Algebra> {
    let mut iter = blocks.iter();
    let &(n, ring) = iter.next().ok_or_else(|| Error::InvalidArgument("at least one block is required".into()))?;
    let mut factors = vec![make_matrix_algebra(n, field, ring)?];
    for &(n, ring) in iter {
        factors.push(make_matrix_algebra(n, field, ring)?);
    }
    if factors.len() == 1 {
        return Ok(factors.pop().expect("one factor"));
    }
    let refs: Vec<&Algebra> = factors.iter().collect();
    let alg = direct_sum_unvalidated(&refs)?;
    alg.validate()?;
    Ok(alg)
}

/// `ℝ[x]/(x²)` (or over ℂ) with basis `1, x`: the smallest non-semisimple algebra.
pub fn dual_numbers(field: GroundField) -> Algebra {
    let one = Scalar::new(1.0, 0.0);
    let mut c = vec![Scalar::new(0.0, 0.0); 8];
    let idx = |i: usize, j: usize, k: usize| (i * 2 + j) * 2 + k;
    c[idx(0, 0, 0)] = one; // 1·1 = 1
    c[idx(0, 1, 1)] = one; // 1·x = x
    c[idx(1, 0, 1)] = one; // x·1 = x
    let unit = Vector::from_vec(vec![one, Scalar::new(0.0, 0.0)]);
    Algebra::new(field, 2, c, unit, None, None).expect("dual numbers are a valid algebra")
}
