//! Full-precision scalar text: every `f64` is written with 17 significant
//! digits so documents round-trip bit-exactly.

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::Scalar;

pub fn full_precision(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `f64` serialized as a JSON number with 17 significant digits; non-finite
/// values become the strings `"NaN"`, `"inf"`, `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(full_precision(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(serializer)
        } else {
            serializer.serialize_str(&full_precision(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(x) => Ok(Real(x)),
            Repr::Text(s) => match s.as_str() {
                "NaN" => Ok(Real(f64::NAN)),
                "inf" => Ok(Real(f64::INFINITY)),
                "-inf" => Ok(Real(f64::NEG_INFINITY)),
                other => Err(de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// A scalar: a plain number when real, `[re, im]` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarText(pub Scalar);

impl Serialize for ScalarText {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            Real(self.0.re).serialize(serializer)
        } else {
            let mut seq = serializer.serialize_seq(Some(2))?;
            seq.serialize_element(&Real(self.0.re))?;
            seq.serialize_element(&Real(self.0.im))?;
            seq.end()
        }
    }
}

impl<'de> Deserialize<'de> for ScalarText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Re(Real),
            Pair([Real; 2]),
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Re(x) => ScalarText(Scalar::new(x.0, 0.0)),
            Repr::Pair([re, im]) => ScalarText(Scalar::new(re.0, im.0)),
        })
    }
}

pub fn scalars(values: impl IntoIterator<Item = Scalar>) -> Vec<ScalarText> {
    values.into_iter().map(ScalarText).collect()
}

/// Dense matrix as a row-major list of scalars with its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixText {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<ScalarText>,
}

impl MatrixText {
    pub fn from_matrix(m: &crate::linalg::Matrix) -> Self {
        let data = (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| ScalarText(m[(r, c)]))).collect();
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> crate::error::Result<crate::linalg::Matrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(crate::Error::Document(format!(
                "matrix {}x{} has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(crate::linalg::Matrix::from_fn(self.rows, self.cols, |r, c| self.data[r * self.cols + c].0))
    }
}
