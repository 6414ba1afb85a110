use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{extension_radius, polar_isometry, shepard_extend, BaseComplex};
use crate::algebra::{separability_idempotent, star_symmetrize, Algebra};
use crate::equivariance::{average_map_family, vertex_equivariance_defect, GroupAction, MapFamily};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rectifier::{
    injectivity_margin, multiplicativity_defect, rectify, unitalize, FiberMap, RectifyStatus, UniformBounds,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// Coefficientwise agreement required between the extension and the germ on `Z`.
pub const RESTRICTION_TOL: f64 = 1e-14;
/// Column orthonormality required of extended frames.
pub const ISOMETRY_TOL: f64 = 1e-12;
/// Tolerance for the germ invariants (multiplicative and unital, or isometric).
pub const GERM_TOL: f64 = 1e-10;

/// Tunable parameters of the extension pipelines. Raising any of
/// `rectify_tol`, `equivariance_tol`, `condition_limit`, `k2_limit` or
/// `k0_limit` loosens the per-vertex acceptance test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionOptions {
    pub shepard_power: f64,
    pub shepard_k: usize,
    pub rectify_tol: f64,
    pub max_iter: usize,
    pub equivariance_tol: f64,
    /// Largest accepted `σ_max/σ_min` of an extended frame before polar repair.
    pub condition_limit: f64,
    /// Smallest accepted injectivity margin of a rectified map.
    pub min_injectivity: f64,
    pub k2_limit: f64,
    pub k0_limit: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        Self {
            shepard_power: 2.0,
            shepard_k: 4,
            rectify_tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            equivariance_tol: 1e-10,
            condition_limit: 1e6,
            min_injectivity: 1e-6,
            k2_limit: 1e3,
            k0_limit: 1e3,
        }
    }
}

impl ExtensionOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("shepard_power", self.shepard_power),
            ("rectify_tol", self.rectify_tol),
            ("equivariance_tol", self.equivariance_tol),
            ("condition_limit", self.condition_limit),
            ("min_injectivity", self.min_injectivity),
            ("k2_limit", self.k2_limit),
            ("k0_limit", self.k0_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.shepard_k == 0 || self.max_iter == 0 {
            return Err(Error::InvalidArgument("shepard_k and max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rank-`n` subbundle of a trivial rank-`N` Hilbert bundle, given on `Z` by
/// isometric `N × n` frames.
#[derive(Debug, Clone)]
pub struct FrameGerm {
    pub rank: usize,
    pub ambient_dim: usize,
    pub frames: MapFamily,
}

impl FrameGerm {
    pub fn validate(&self, base: &BaseComplex) -> Result<()> {
        if self.rank == 0 || self.rank > self.ambient_dim {
            return Err(Error::InvalidGerm("rank must lie in 1..=ambient dimension".into()));
        }
        let id = Matrix::identity(self.rank, self.rank);
        for x in base.z_vertices() {
            let f = self.frames.get(&x).ok_or(Error::MissingVertex(x))?;
            if f.shape() != (self.ambient_dim, self.rank) {
                return Err(Error::InvalidGerm(format!("frame at vertex {x} has the wrong shape")));
            }
            let err = linalg::spectral_norm(&(f.adjoint() * f - &id));
            if !(err <= GERM_TOL) {
                return Err(Error::InvalidGerm(format!("frame at vertex {x} is not isometric (error {err:e})")));
            }
        }
        Ok(())
    }
}

/// Subalgebra bundle of a trivial algebra bundle with fiber `ambient`, given
/// on `Z` by unital embeddings of the semisimple `model`.
#[derive(Debug, Clone)]
pub struct AlgebraGerm {
    pub model: Arc<Algebra>,
    pub ambient: Arc<Algebra>,
    pub maps: MapFamily,
    pub star_mode: bool,
}

impl AlgebraGerm {
    fn fiber_map(&self, m: Matrix) -> FiberMap {
        FiberMap { source: Arc::clone(&self.model), target: Arc::clone(&self.ambient), matrix: m }
    }

    pub fn validate(&self, base: &BaseComplex) -> Result<()> {
        if self.star_mode && (self.model.involution().is_none() || self.ambient.involution().is_none()) {
            return Err(Error::MissingInvolution);
        }
        for x in base.z_vertices() {
            let m = self.maps.get(&x).ok_or(Error::MissingVertex(x))?;
            let phi = FiberMap::new(Arc::clone(&self.model), Arc::clone(&self.ambient), m.clone())?;
            let defect = multiplicativity_defect(&phi);
            let unit = self.ambient.element_norm(&(phi.apply(self.model.unit()) - self.ambient.unit()));
            if !(defect <= GERM_TOL && unit <= GERM_TOL) {
                return Err(Error::InvalidGerm(format!(
                    "map at vertex {x} is not a unital homomorphism (defect {defect:e}, unit error {unit:e})"
                )));
            }
            if !(injectivity_margin(&phi) > 0.0) {
                return Err(Error::InvalidGerm(format!("map at vertex {x} is not injective")));
            }
        }
        Ok(())
    }
}

/// Per-vertex record of an extension run. Fields that do not apply to the
/// pipeline that produced the record are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexDiagnostics {
    pub vertex: usize,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub distance_to_z: f64,
    pub in_z: bool,
    pub in_w: bool,
    pub passed: bool,
    /// multiplicativity defect before rectification
    pub initial_defect: Option<f64>,
    /// multiplicativity defect after rectification
    pub final_defect: Option<f64>,
    pub iterations: Option<usize>,
    pub status: Option<RectifyStatus>,
    pub equivariance_defect: f64,
    pub injectivity_margin: f64,
    /// `‖FᴴF − I‖` of the repaired frame (vertices of `W` only)
    pub isometry_defect: Option<f64>,
    /// coefficientwise distance to the germ (vertices of `Z` only)
    pub restriction_defect: Option<f64>,
    pub k2: Option<f64>,
    pub k0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeModulus {
    pub a: usize,
    pub b: usize,
    pub modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Above,
}

/// One named invariant of an extension result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub passed: bool,
}

impl InvariantCheck {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtMost, limit, passed: value <= limit }
    }

    fn above(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::Above, limit, passed: value > limit }
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionResult {
    pub radius: f64,
    /// the neighborhood `W ⊇ Z`, sorted
    pub w: Vec<usize>,
    pub z_size: usize,
    pub vertex_count: usize,
    /// extended maps (algebra mode) or frames (Hilbert mode) on `W`
    pub maps: MapFamily,
    pub diagnostics: Vec<VertexDiagnostics>,
    /// measured on `W` in algebra mode
    pub bounds: Option<UniformBounds>,
    pub edge_moduli: Vec<EdgeModulus>,
    pub checks: Vec<InvariantCheck>,
}

impl ExtensionResult {
    /// `W = Z` although `Z ≠ X`: nothing could be extended.
    pub fn is_degenerate(&self) -> bool {
        self.w.len() == self.z_size && self.z_size < self.vertex_count
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_iterations(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.in_w).filter_map(|d| d.iterations).max().unwrap_or(0)
    }
}

fn coords(base: &BaseComplex, x: usize) -> (Option<f64>, Option<f64>) {
    base.coordinates().map_or((None, None), |c| (Some(c[x][0]), Some(c[x][1])))
}

fn restriction_defect(base: &BaseComplex, x: usize, germ: &MapFamily, out: &MapFamily) -> Option<f64> {
    if !base.in_z(x) {
        return None;
    }
    Some(out.get(&x).map_or(f64::INFINITY, |m| linalg::max_abs_diff(m, &germ[&x])))
}

fn worst<'a>(values: impl Iterator<Item = &'a Option<f64>>) -> f64 {
    values.flatten().copied().fold(0.0, f64::max)
}

fn check_fiber_sizes(action: &GroupAction, source: usize, target: usize) -> Result<()> {
    if action.source_dim() != source || action.target_dim() != target {
        return Err(Error::InvalidAction(format!(
            "fiber actions have sizes {}/{}, expected {source}/{target}",
            action.source_dim(),
            action.target_dim()
        )));
    }
    Ok(())
}

/// Extends an isometric frame germ from `Z` to a neighborhood `W`: Shepard
/// extension, group averaging, a conditioning test that defines `W`, and
/// polar repair on `W`.
pub fn extend_frame_bundle(
    base: &BaseComplex,
    germ: &FrameGerm,
    action: &GroupAction,
    opts: &ExtensionOptions,
) -> Result<ExtensionResult> {
    opts.validate()?;
    germ.validate(base)?;
    base.check_action(action)?;
    check_fiber_sizes(action, germ.rank, germ.ambient_dim)?;

    let extended = shepard_extend(base, &germ.frames, opts.shepard_power, opts.shepard_k)?;
    let averaged = average_map_family(action, &extended)?;
    let sigmas: Vec<(f64, f64)> = averaged
        .values()
        .map(|f| {
            let sv = linalg::singular_values(f);
            (sv[0], *sv.last().expect("frames have columns"))
        })
        .collect();
    let ok: Vec<bool> = sigmas.iter().map(|&(max, min)| min > 0.0 && max < opts.condition_limit * min).collect();
    let (radius, w) = extension_radius(base, &ok)?;

    let repaired: Vec<(usize, Matrix)> =
        w.par_iter().map(|&x| polar_isometry(&averaged[&x]).map(|f| (x, f))).collect::<Result<_>>()?;
    let maps: MapFamily = repaired.into_iter().collect();
    let id = Matrix::identity(germ.rank, germ.rank);

    let mut diagnostics = Vec::with_capacity(base.vertex_count());
    for x in 0..base.vertex_count() {
        let in_w = maps.contains_key(&x);
        let (cx, cy) = coords(base, x);
        let equivariance_defect = if in_w {
            vertex_equivariance_defect(action, &maps, x)?
        } else {
            vertex_equivariance_defect(action, &averaged, x)?
        };
        diagnostics.push(VertexDiagnostics {
            vertex: x,
            x: cx,
            y: cy,
            distance_to_z: base.distance_to_z(x),
            in_z: base.in_z(x),
            in_w,
            passed: ok[x],
            initial_defect: None,
            final_defect: None,
            iterations: None,
            status: None,
            equivariance_defect,
            injectivity_margin: sigmas[x].1,
            isometry_defect: maps.get(&x).map(|f| linalg::spectral_norm(&(f.adjoint() * f - &id))),
            restriction_defect: restriction_defect(base, x, &germ.frames, &maps),
            k2: None,
            k0: None,
        });
    }
    let in_w = || diagnostics.iter().filter(|d| d.in_w);
    let checks = vec![
        InvariantCheck::at_most(
            "restriction_on_z",
            worst(diagnostics.iter().map(|d| &d.restriction_defect)),
            RESTRICTION_TOL,
        ),
        InvariantCheck::at_most("isometry_on_w", worst(diagnostics.iter().map(|d| &d.isometry_defect)), ISOMETRY_TOL),
        InvariantCheck::at_most(
            "equivariance_on_w",
            in_w().map(|d| d.equivariance_defect).fold(0.0, f64::max),
            opts.equivariance_tol,
        ),
    ];
    let edge_moduli = frame_norm_continuity_report(base, &maps);
    Ok(ExtensionResult {
        radius,
        w,
        z_size: base.z_vertices().len(),
        vertex_count: base.vertex_count(),
        maps,
        diagnostics,
        bounds: None,
        edge_moduli,
        checks,
    })
}

struct VertexOutcome {
    initial: f64,
    map: Matrix,
    final_defect: f64,
    iterations: usize,
    status: RectifyStatus,
    margin: f64,
    bounds: UniformBounds,
    unit_defect: f64,
}

/// Extends an algebra-subbundle germ from `Z` to a neighborhood `W`: Shepard
/// extension of the embeddings, unitalization, group averaging and fiberwise
/// rectification against the canonical (star-symmetrized in star mode)
/// separability idempotent of the model fiber. `W` is the largest distance
/// sublevel set of `Z` on which every rectified map converged, is injective,
/// satisfies the uniform bounds and is equivariant.
pub fn extend_algebra_subbundle(
    base: &BaseComplex,
    germ: &AlgebraGerm,
    action: &GroupAction,
    opts: &ExtensionOptions,
) -> Result<ExtensionResult> {
    opts.validate()?;
    let mut e = separability_idempotent(&germ.model)?;
    germ.validate(base)?;
    base.check_action(action)?;
    check_fiber_sizes(action, germ.model.dim(), germ.ambient.dim())?;
    action.check_automorphisms(&germ.model, &germ.ambient)?;
    if germ.star_mode {
        e = star_symmetrize(&e)?;
    }

    let extended = shepard_extend(base, &germ.maps, opts.shepard_power, opts.shepard_k)?;
    let unital: MapFamily = extended.into_iter().map(|(x, m)| (x, unitalize(&germ.fiber_map(m)).matrix)).collect();
    let averaged = average_map_family(action, &unital)?;

    let outcomes: Vec<VertexOutcome> = averaged
        .par_iter()
        .map(|(_, m)| {
            let phi = germ.fiber_map(m.clone());
            let res = rectify(&phi, &e, germ.star_mode, opts.rectify_tol, opts.max_iter)?;
            let unit_defect = germ.ambient.element_norm(&(res.map.apply(germ.model.unit()) - germ.ambient.unit()));
            Ok(VertexOutcome {
                initial: res.defect_trace[0],
                final_defect: res.final_defect(),
                iterations: res.iterations,
                status: res.status,
                margin: injectivity_margin(&res.map),
                bounds: UniformBounds::of_map(&res.map),
                unit_defect,
                map: res.map.matrix,
            })
        })
        .collect::<Result<_>>()?;
    let rectified: MapFamily = outcomes.iter().enumerate().map(|(x, o)| (x, o.map.clone())).collect();
    let equivariance: Vec<f64> = (0..base.vertex_count())
        .into_par_iter()
        .map(|x| vertex_equivariance_defect(action, &rectified, x))
        .collect::<Result<_>>()?;

    let ok: Vec<bool> = outcomes
        .iter()
        .zip(&equivariance)
        .map(|(o, &eq)| {
            o.status == RectifyStatus::Converged
                && o.margin > opts.min_injectivity
                && o.bounds.k2 <= opts.k2_limit
                && o.bounds.k0 <= opts.k0_limit
                && eq <= opts.equivariance_tol
        })
        .collect();
    let (radius, w) = extension_radius(base, &ok)?;
    let maps: MapFamily = w.iter().map(|&x| (x, rectified[&x].clone())).collect();
    let bounds = measure_uniform_bounds(&germ.model, &germ.ambient, &maps)?;

    let diagnostics: Vec<VertexDiagnostics> = outcomes
        .iter()
        .enumerate()
        .map(|(x, o)| {
            let (cx, cy) = coords(base, x);
            VertexDiagnostics {
                vertex: x,
                x: cx,
                y: cy,
                distance_to_z: base.distance_to_z(x),
                in_z: base.in_z(x),
                in_w: maps.contains_key(&x),
                passed: ok[x],
                initial_defect: Some(o.initial),
                final_defect: Some(o.final_defect),
                iterations: Some(o.iterations),
                status: Some(o.status),
                equivariance_defect: equivariance[x],
                injectivity_margin: o.margin,
                isometry_defect: None,
                restriction_defect: restriction_defect(base, x, &germ.maps, &maps),
                k2: Some(o.bounds.k2),
                k0: Some(o.bounds.k0),
            }
        })
        .collect();
    let in_w = |f: &dyn Fn(usize) -> f64| w.iter().map(|&x| f(x)).fold(0.0, f64::max);
    let min_margin = w.iter().map(|&x| outcomes[x].margin).fold(f64::INFINITY, f64::min);
    let checks = vec![
        InvariantCheck::at_most(
            "restriction_on_z",
            worst(diagnostics.iter().map(|d| &d.restriction_defect)),
            RESTRICTION_TOL,
        ),
        InvariantCheck::at_most("multiplicativity_on_w", in_w(&|x| outcomes[x].final_defect), opts.rectify_tol),
        InvariantCheck::at_most("unitality_on_w", in_w(&|x| outcomes[x].unit_defect), GERM_TOL),
        InvariantCheck::at_most("equivariance_on_w", in_w(&|x| equivariance[x]), opts.equivariance_tol),
        InvariantCheck::above("injectivity_on_w", min_margin, 0.0),
        InvariantCheck::at_most("k2_on_w", bounds.k2, opts.k2_limit),
        InvariantCheck::at_most("k0_on_w", bounds.k0, opts.k0_limit),
    ];
    let edge_moduli = norm_continuity_report(base, &germ.model, &germ.ambient, &maps)?;
    Ok(ExtensionResult {
        radius,
        w,
        z_size: base.z_vertices().len(),
        vertex_count: base.vertex_count(),
        maps,
        diagnostics,
        bounds: Some(bounds),
        edge_moduli,
        checks,
    })
}

/// Worst [`UniformBounds`] over a family of maps; trivial for an empty family.
pub fn measure_uniform_bounds(source: &Arc<Algebra>, target: &Arc<Algebra>, maps: &MapFamily) -> Result<UniformBounds> {
    maps.values().try_fold(UniformBounds::TRIVIAL, |acc, m| {
        let phi = FiberMap::new(Arc::clone(source), Arc::clone(target), m.clone())?;
        Ok(acc.join(UniformBounds::of_map(&phi)))
    })
}

fn edge_moduli(base: &BaseComplex, norms: &std::collections::BTreeMap<usize, Vec<f64>>) -> Vec<EdgeModulus> {
    base.edges()
        .iter()
        .filter_map(|e| {
            let (na, nb) = (norms.get(&e.a)?, norms.get(&e.b)?);
            let jump = na.iter().zip(nb).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            Some(EdgeModulus { a: e.a, b: e.b, modulus: jump / e.length })
        })
        .collect()
}

/// Discrete Lipschitz modulus of the pulled-back norm along every edge with
/// both endpoints in the family: `max_u |‖φ_a(u)‖ − ‖φ_b(u)‖| / length` over
/// an orthonormal basis `u` of the source.
pub fn norm_continuity_report(
    base: &BaseComplex,
    source: &Arc<Algebra>,
    target: &Arc<Algebra>,
    maps: &MapFamily,
) -> Result<Vec<EdgeModulus>> {
    let basis = source.orthonormal_basis();
    let mut norms = std::collections::BTreeMap::new();
    for (&x, m) in maps {
        let phi = FiberMap::new(Arc::clone(source), Arc::clone(target), m.clone())?;
        norms.insert(x, basis.iter().map(|u| target.element_norm(&phi.apply(u))).collect());
    }
    Ok(edge_moduli(base, &norms))
}

/// [`norm_continuity_report`] for frames, whose pulled-back norm is
/// `‖F u‖` on standard basis vectors.
pub fn frame_norm_continuity_report(base: &BaseComplex, frames: &MapFamily) -> Vec<EdgeModulus> {
    let norms = frames.iter().map(|(&x, f)| (x, f.column_iter().map(|c| c.norm()).collect())).collect();
    edge_moduli(base, &norms)
}
