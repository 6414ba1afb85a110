use serde::{Deserialize, Serialize};

use super::{Algebra, GroundField, Involution};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::numfmt::{scalars, MatrixText, ScalarText};

/// Text form of an algebra: ground field, dimension, structure constants as a
/// flat list in `(i, j, k)` row-major order, unit, optional involution and
/// optional (non-coordinate) inner product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub ground_field: GroundField,
    pub dim: usize,
    pub structure_constants: Vec<ScalarText>,
    pub unit: Vec<ScalarText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<InvolutionDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_product: Option<MatrixText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutionDocument {
    pub matrix: MatrixText,
    pub conjugate_linear: bool,
}

impl AlgebraDocument {
    pub fn from_algebra(a: &Algebra) -> Self {
        let identity = crate::linalg::Matrix::identity(a.dim, a.dim);
        Self {
            ground_field: a.field,
            dim: a.dim,
            structure_constants: scalars(a.constants.iter().copied()),
            unit: scalars(a.unit.iter().copied()),
            involution: a.involution.as_ref().map(|inv| InvolutionDocument {
                matrix: MatrixText::from_matrix(&inv.matrix),
                conjugate_linear: inv.conjugate_linear,
            }),
            inner_product: (a.inner_product != identity).then(|| MatrixText::from_matrix(&a.inner_product)),
        }
    }

    /// Rebuilds and validates the algebra. Matrix realizations are not part of
    /// the document, so norms fall back to the left-regular representation.
    pub fn to_algebra(&self) -> Result<Algebra> {
        let involution = match &self.involution {
            None => None,
            Some(doc) => Some(Involution { matrix: doc.matrix.to_matrix()?, conjugate_linear: doc.conjugate_linear }),
        };
        let inner = self.inner_product.as_ref().map(MatrixText::to_matrix).transpose()?;
        let unit = Vector::from_iterator(self.unit.len(), self.unit.iter().map(|s| s.0));
        Algebra::new(
            self.ground_field,
            self.dim,
            self.structure_constants.iter().map(|s| s.0).collect(),
            unit,
            involution,
            inner,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("algebra documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}
