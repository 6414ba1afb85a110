use super::{BaseComplex, DISTANCE_TOL};
use crate::equivariance::MapFamily;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::Scalar;

/// Relative singular-value threshold below which a frame counts as
/// rank-deficient.
pub const POLAR_RANK_TOL: f64 = 1e-12;

/// Inverse-distance-power extension of values given on `Z`.
///
/// Vertices of `Z` keep their values exactly. Any other vertex receives the
/// weighted mean of the values at its `k` nearest `Z` vertices (all vertices
/// tied with the `k`-th distance are included) with weights `d^−power`.
pub fn shepard_extend(base: &BaseComplex, values: &MapFamily, power: f64, k: usize) -> Result<MapFamily> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidArgument("power must be positive".into()));
    }
    let z = base.z_vertices();
    let mut shape = None;
    for &v in &z {
        let m = values.get(&v).ok_or(Error::MissingVertex(v))?;
        match shape {
            None => shape = Some(m.shape()),
            Some(s) if s != m.shape() => {
                return Err(Error::InvalidArgument("values on Z must share one shape".into()));
            }
            _ => {}
        }
    }
    let (rows, cols) = shape.expect("Z is nonempty");
    let mut out = MapFamily::new();
    for x in 0..base.vertex_count() {
        if base.in_z(x) {
            out.insert(x, values[&x].clone());
            continue;
        }
        let mut near: Vec<(f64, usize)> = z.iter().map(|&v| (base.distance(x, v), v)).collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let cutoff = near[k.min(near.len()) - 1].0 * (1.0 + DISTANCE_TOL);
        let chosen: Vec<(f64, usize)> = near.into_iter().take_while(|(d, _)| *d <= cutoff).collect();
        let weights: Vec<f64> = chosen.iter().map(|(d, _)| d.powf(-power)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = Matrix::zeros(rows, cols);
        for ((_, v), w) in chosen.iter().zip(&weights) {
            acc += &values[v] * Scalar::new(w / total, 0.0);
        }
        out.insert(x, acc);
    }
    Ok(out)
}

/// Isometric factor `U Vᴴ` of the polar decomposition of a full-column-rank
/// frame `F = U Σ Vᴴ`; the isometry nearest to `F` in Frobenius distance.
pub fn polar_isometry(frame: &Matrix) -> Result<Matrix> {
    let (rows, cols) = frame.shape();
    if cols == 0 || cols > rows {
        return Err(Error::RankDeficient { sigma_min: 0.0 });
    }
    let svd = frame.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if !(sigma_min > POLAR_RANK_TOL * sigma_max) {
        return Err(Error::RankDeficient { sigma_min });
    }
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    Ok(u * v_t)
}

/// Largest sublevel radius `r` of the distance to `Z` such that every vertex
/// with `d(x, Z) ≤ r` passes, together with that sublevel set `W`.
pub fn extension_radius(base: &BaseComplex, per_vertex_ok: &[bool]) -> Result<(f64, Vec<usize>)> {
    let n = base.vertex_count();
    if per_vertex_ok.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: per_vertex_ok.len() });
    }
    if let Some(v) = (0..n).find(|&v| base.in_z(v) && !per_vertex_ok[v]) {
        return Err(Error::InvalidGerm(format!("vertex {v} of Z fails its checks")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| base.distance_to_z(a).total_cmp(&base.distance_to_z(b)));
    let mut radius = 0.0;
    let mut i = 0;
    while i < n {
        let level = base.distance_to_z(order[i]);
        let mut j = i;
        let mut all_pass = true;
        while j < n && base.distance_to_z(order[j]) == level {
            all_pass &= per_vertex_ok[order[j]];
            j += 1;
        }
        if !all_pass {
            break;
        }
        radius = level;
        i = j;
    }
    let w = (0..n).filter(|&x| base.distance_to_z(x) <= radius).collect();
    Ok((radius, w))
}
