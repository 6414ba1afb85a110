//! The named library of germ generators.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use prolong_core::algebra::Algebra;
use prolong_core::bundle::BaseComplex;
use prolong_core::embedding::{block_diagonal_embedding, inner_automorphism, map_from_images};
use prolong_core::equivariance::MapFamily;
use prolong_core::linalg::{block_diag, real, Matrix};
use prolong_core::numfmt::MatrixText;
use prolong_core::rectifier::FiberMap;

use crate::config::{ConfigError, GermSpec};

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn realization_size(alg: &Algebra) -> Result<usize, ConfigError> {
    alg.realization().map(|r| r[0].nrows()).ok_or_else(|| invalid("algebra has no matrix realization"))
}

/// `(cos θ, sin θ)` of the polar angle of `p` about `center`.
fn direction(p: [f64; 2], center: [f64; 2]) -> Result<(f64, f64), ConfigError> {
    let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(invalid("a Z vertex sits at the germ center, where the angle is undefined"));
    }
    Ok((dx / r, dy / r))
}

fn require_pair_model(model: &Algebra, ambient: &Algebra) -> Result<usize, ConfigError> {
    if model.dim() != 2 || realization_size(model)? != 2 {
        return Err(invalid("this germ needs the model fiber ℂ² (two 1×1 blocks)"));
    }
    let size = realization_size(ambient)?;
    if ambient.dim() != size * size || size % 2 != 0 {
        return Err(invalid("this germ needs an ambient fiber M_2m over the ground field"));
    }
    Ok(size / 2)
}

fn table_maps(path: &Path, base: &BaseComplex) -> Result<MapFamily, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Entry {
        vertex: usize,
        map: MatrixText,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let entries: Vec<Entry> =
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
    let mut maps = MapFamily::new();
    for e in entries {
        if e.vertex >= base.vertex_count() {
            return Err(invalid(format!("table names vertex {} outside the base", e.vertex)));
        }
        maps.insert(e.vertex, e.map.to_matrix()?);
    }
    Ok(maps)
}

/// Embeddings on `Z` for an algebra-mode scenario.
pub fn algebra_germ_maps(
    spec: &GermSpec,
    base: &BaseComplex,
    model: &Arc<Algebra>,
    ambient: &Arc<Algebra>,
    config_dir: &Path,
) -> Result<MapFamily, ConfigError> {
    let coords = base.coordinates().ok_or_else(|| invalid("base has no coordinates"))?;
    let z = base.z_vertices();
    let map =
        |images: &[Matrix]| -> Result<Matrix, ConfigError> { Ok(map_from_images(model, ambient, images)?.matrix) };
    match spec {
        GermSpec::RotatedProjection { center } => {
            let copies = require_pair_model(model, ambient)?;
            z.iter()
                .map(|&v| {
                    let (c, s) = direction(coords[v], *center)?;
                    let p = Matrix::from_row_slice(2, 2, &[real(c * c), real(c * s), real(c * s), real(s * s)]);
                    let q = Matrix::identity(2, 2) - &p;
                    let tile = |m: &Matrix| block_diag(&vec![m.clone(); copies]);
                    Ok((v, map(&[tile(&p), tile(&q)])?))
                })
                .collect()
        }
        GermSpec::SplitProjection { split_x } => {
            let half = require_pair_model(model, ambient)?;
            let upper = block_diag(&[Matrix::identity(half, half), Matrix::zeros(half, half)]);
            let lower = block_diag(&[Matrix::zeros(half, half), Matrix::identity(half, half)]);
            let left = map(&[upper.clone(), lower.clone()])?;
            let right = map(&[lower, upper])?;
            Ok(z.iter().map(|&v| (v, if coords[v][0] < *split_x { left.clone() } else { right.clone() })).collect())
        }
        GermSpec::Constant { layout } => {
            let m = match layout {
                Some(layout) => {
                    let blocks: Vec<(usize, usize)> = layout.iter().map(|&[n, m]| (n, m)).collect();
                    block_diagonal_embedding(model, ambient, &blocks)?.matrix
                }
                None if model.dim() == ambient.dim() && realization_size(model)? == realization_size(ambient)? => {
                    FiberMap::identity(model).matrix
                }
                None => return Err(invalid("constant germ between different fibers needs a layout")),
            };
            Ok(z.iter().map(|&v| (v, m.clone())).collect())
        }
        GermSpec::PerturbedIdentity { epsilon } => {
            let n = realization_size(ambient)?;
            if model.structure_constants() != ambient.structure_constants() {
                return Err(invalid("perturbed-identity needs model = ambient"));
            }
            let shift = Matrix::from_fn(n, n, |i, j| if j == i + 1 { real(1.0) } else { real(0.0) });
            z.iter()
                .map(|&v| {
                    let [x, y] = coords[v];
                    let g = Matrix::identity(n, n) + (&shift * real(x) + shift.transpose() * real(y)) * real(*epsilon);
                    Ok((v, inner_automorphism(ambient, &g)?))
                })
                .collect()
        }
        GermSpec::Table { path } => table_maps(&config_dir.join(path), base),
        GermSpec::TangentLine { .. } => Err(invalid("tangent-line is a Hilbert-mode germ")),
    }
}

/// Frames on `Z` for a Hilbert-mode scenario.
pub fn frame_germ_maps(
    spec: &GermSpec,
    base: &BaseComplex,
    rank: usize,
    ambient_dim: usize,
    config_dir: &Path,
) -> Result<MapFamily, ConfigError> {
    let coords = base.coordinates().ok_or_else(|| invalid("base has no coordinates"))?;
    let z = base.z_vertices();
    match spec {
        GermSpec::TangentLine { center } => {
            if rank != 1 || ambient_dim != 2 {
                return Err(invalid("tangent-line frames have rank 1 in a 2-dimensional ambient space"));
            }
            z.iter()
                .map(|&v| {
                    let (c, s) = direction(coords[v], *center)?;
                    Ok((v, Matrix::from_column_slice(2, 1, &[real(-s), real(c)])))
                })
                .collect()
        }
        GermSpec::Constant { layout: None } => {
            if rank == 0 || rank > ambient_dim {
                return Err(invalid("rank must lie in 1..=ambient_dim"));
            }
            let f = Matrix::identity(ambient_dim, rank);
            Ok(z.iter().map(|&v| (v, f.clone())).collect())
        }
        GermSpec::Table { path } => table_maps(&config_dir.join(path), base),
        other => Err(invalid(format!("germ {other:?} is not available in Hilbert mode"))),
    }
}
