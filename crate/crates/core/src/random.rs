//! Seeded random matrices for property suites and scenario generators.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::GroundField;
use crate::linalg::Matrix;
use crate::Scalar;

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, field: GroundField) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = match field {
            GroundField::Real => 0.0,
            GroundField::Complex => StandardNormal.sample(rng),
        };
        Scalar::new(re, im)
    })
}

/// Gaussian matrix scaled to unit Frobenius norm.
pub fn unit_noise<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, field: GroundField) -> Matrix {
    let m = gaussian_matrix(rng, rows, cols, field);
    let n = m.norm();
    m / Scalar::new(n, 0.0)
}

/// Unitary (orthogonal over ℝ) factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, field: GroundField) -> Matrix {
    let qr = gaussian_matrix(rng, n, n, field).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on the QR convention
    let phases = Matrix::from_fn(n, n, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else {
            Scalar::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Random unitary times `I + G/(4√n)`: invertible and well conditioned.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize, field: GroundField) -> Matrix {
    let u = random_unitary(rng, n, field);
    let g = gaussian_matrix(rng, n, n, field) * Scalar::new(0.25 / (n as f64).sqrt(), 0.0);
    u * (Matrix::identity(n, n) + g)
}
