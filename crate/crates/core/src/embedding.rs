//! Concrete maps between matrix algebras, built through their realizations.

use std::sync::Arc;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rectifier::FiberMap;

fn realization_size(alg: &Algebra) -> Result<usize> {
    alg.realization()
        .map(|r| r[0].nrows())
        .ok_or_else(|| Error::InvalidArgument("algebra has no matrix realization".into()))
}

/// Linear map determined by the realized images of the source basis.
pub fn map_from_images(source: &Arc<Algebra>, target: &Arc<Algebra>, images: &[Matrix]) -> Result<FiberMap> {
    if images.len() != source.dim() {
        return Err(Error::DimensionMismatch { expected: source.dim(), actual: images.len() });
    }
    let size = realization_size(target)?;
    let mut m = Matrix::zeros(target.dim(), source.dim());
    for (i, img) in images.iter().enumerate() {
        if img.shape() != (size, size) {
            return Err(Error::InvalidArgument("image has the wrong size".into()));
        }
        let coords = target
            .unrealize(img)
            .ok_or_else(|| Error::InvalidArgument("image outside the target's realization".into()))?;
        m.set_column(i, &coords);
    }
    FiberMap::new(Arc::clone(source), Arc::clone(target), m)
}

/// Unital embedding `⊕_b M_{n_b} → M_N`, `a ↦ ⊕_b (a_b ⊗ I_{m_b})`, for a
/// source realized block-diagonally with block sizes `n_b` and multiplicities
/// `m_b` (`Σ n_b m_b = N`).
pub fn block_diagonal_embedding(
    source: &Arc<Algebra>,
    target: &Arc<Algebra>,
    blocks: &[(usize, usize)],
) -> Result<FiberMap> {
    let src_size = realization_size(source)?;
    let tgt_size = realization_size(target)?;
    if blocks.iter().map(|(n, _)| n).sum::<usize>() != src_size {
        return Err(Error::InvalidArgument("block sizes do not cover the source realization".into()));
    }
    if blocks.iter().map(|(n, m)| n * m).sum::<usize>() != tgt_size {
        return Err(Error::InvalidArgument("block multiplicities do not fill the target".into()));
    }
    let rep = source.realization().expect("checked above");
    let images: Vec<Matrix> = rep
        .iter()
        .map(|r| {
            let mut parts = Vec::new();
            let mut offset = 0;
            for &(n, mult) in blocks {
                let block = r.view((offset, offset), (n, n)).into_owned();
                parts.push(linalg::kron(&block, &Matrix::identity(mult, mult)));
                offset += n;
            }
            linalg::block_diag(&parts)
        })
        .collect();
    map_from_images(source, target, &images)
}

/// Matrix (in basis coordinates) of the inner automorphism `a ↦ g a g⁻¹`.
pub fn inner_automorphism(alg: &Arc<Algebra>, g: &Matrix) -> Result<Matrix> {
    let g_inv = linalg::invert(g).ok_or_else(|| Error::InvalidArgument("conjugating matrix is singular".into()))?;
    let rep = alg.realization().ok_or_else(|| Error::InvalidArgument("algebra has no matrix realization".into()))?;
    let images: Vec<Matrix> = rep.iter().map(|r| g * r * &g_inv).collect();
    Ok(map_from_images(alg, alg, &images)?.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{direct_sum, make_matrix_algebra, DivisionRing, GroundField};
    use crate::rectifier::{injectivity_margin, multiplicativity_defect};
    use crate::Scalar;

    #[test]
    fn c_plus_m2_into_m6() {
        let c = make_matrix_algebra(1, GroundField::Complex, DivisionRing::Complex).unwrap();
        let m2 = make_matrix_algebra(2, GroundField::Complex, DivisionRing::Complex).unwrap();
        let src = Arc::new(direct_sum(&c, &m2).unwrap());
        let tgt = Arc::new(make_matrix_algebra(6, GroundField::Complex, DivisionRing::Complex).unwrap());
        let phi = block_diagonal_embedding(&src, &tgt, &[(1, 2), (2, 2)]).unwrap();
        assert!(multiplicativity_defect(&phi) < 1e-14);
        assert!((phi.apply(src.unit()) - tgt.unit()).norm() < 1e-14);
        assert!(injectivity_margin(&phi) > 0.0);
        assert!(block_diagonal_embedding(&src, &tgt, &[(1, 1), (2, 2)]).is_err());
    }

    #[test]
    fn inner_automorphism_of_m2() {
        let m2 = Arc::new(make_matrix_algebra(2, GroundField::Complex, DivisionRing::Complex).unwrap());
        let g = linalg::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let aut = inner_automorphism(&m2, &g).unwrap();
        // g e11 g⁻¹ = e22
        let img = &aut * m2.basis(0);
        assert!((img - m2.basis(3)).norm() < 1e-14);
        let phi = FiberMap::new(Arc::clone(&m2), Arc::clone(&m2), aut).unwrap();
        assert!(multiplicativity_defect(&phi) < 1e-14);
        let sing = Matrix::from_element(2, 2, Scalar::new(1.0, 0.0));
        assert!(inner_automorphism(&m2, &sing).is_err());
    }
}
