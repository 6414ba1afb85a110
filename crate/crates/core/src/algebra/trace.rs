use serde::Serialize;

use super::Algebra;
use crate::linalg::{self, Matrix, Vector};
use crate::Scalar;

/// Regular trace `Tr(a) = trace(L_a)` and its bilinear form on the basis.
#[derive(Debug, Clone)]
pub struct TraceData {
    pub trace_vector: Vector,
    /// `gram[(i, j)] = Tr(b_i b_j)`
    pub gram: Matrix,
    pub condition_number: f64,
    /// `σ_min / σ_max` of the Gram matrix
    pub ratio: f64,
}

pub fn regular_trace(a: &Algebra) -> TraceData {
    let d = a.dim;
    let trace_vector = Vector::from_fn(d, |i, _| (0..d).map(|j| a.constant(i, j, j)).sum::<Scalar>());
    let gram = Matrix::from_fn(d, d, |i, j| a.table[i][j].iter().map(|&(k, c)| c * trace_vector[k]).sum::<Scalar>());
    let sv = linalg::singular_values(&gram);
    let (max, min) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
    let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    TraceData { trace_vector, gram, condition_number, ratio }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemisimplicityReport {
    pub semisimple: bool,
    pub condition_number: f64,
    /// `σ_min / σ_max` of the Gram matrix
    pub ratio: f64,
    /// ratio lies within two decades of the threshold
    pub near_threshold: bool,
}

/// Non-degeneracy of the regular trace form: `σ_min(G) > tol · σ_max(G)`.
pub fn semisimplicity_check(a: &Algebra, tol: f64) -> SemisimplicityReport {
    report_from_trace(&regular_trace(a), tol)
}

pub(crate) fn report_from_trace(td: &TraceData, tol: f64) -> SemisimplicityReport {
    let ratio = td.ratio;
    SemisimplicityReport {
        semisimple: ratio > tol,
        condition_number: td.condition_number,
        ratio,
        near_threshold: ratio > tol * 1e-2 && ratio < tol * 1e2,
    }
}
