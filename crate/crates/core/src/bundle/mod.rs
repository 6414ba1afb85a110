//! Discretized base spaces and the extension pipelines that grow a subbundle
//! given on a closed subset `Z` to a metric neighborhood `W ⊇ Z`.

mod extend;
mod pipeline;

pub use extend::{extension_radius, polar_isometry, shepard_extend, POLAR_RANK_TOL};
pub use pipeline::{
    extend_algebra_subbundle, extend_frame_bundle, frame_norm_continuity_report, measure_uniform_bounds,
    norm_continuity_report, AlgebraGerm, EdgeModulus, ExtensionOptions, ExtensionResult, FrameGerm, InvariantCheck,
    Relation, VertexDiagnostics, RESTRICTION_TOL,
};

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::equivariance::GroupAction;
use crate::error::{Error, Result};

/// Relative tolerance when comparing shortest-path distances.
pub const DISTANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// Weighted graph with its shortest-path metric and a distinguished nonempty
/// vertex subset `Z`.
#[derive(Debug, Clone)]
pub struct BaseComplex {
    vertex_count: usize,
    edges: Vec<Edge>,
    metric: Vec<f64>,
    z: Vec<bool>,
    dist_to_z: Vec<f64>,
    coordinates: Option<Vec<[f64; 2]>>,
}

impl BaseComplex {
    pub fn new(vertex_count: usize, edges: Vec<Edge>, z: &[usize], coordinates: Option<Vec<[f64; 2]>>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidBase("no vertices".into()));
        }
        let mut graph = UnGraph::<(), f64>::with_capacity(vertex_count, edges.len());
        for _ in 0..vertex_count {
            graph.add_node(());
        }
        for e in &edges {
            if e.a >= vertex_count || e.b >= vertex_count || e.a == e.b {
                return Err(Error::InvalidBase(format!("bad edge ({}, {})", e.a, e.b)));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::InvalidBase(format!("edge ({}, {}) has non-positive length", e.a, e.b)));
            }
            graph.add_edge(NodeIndex::new(e.a), NodeIndex::new(e.b), e.length);
        }
        if let Some(c) = &coordinates {
            if c.len() != vertex_count {
                return Err(Error::DimensionMismatch { expected: vertex_count, actual: c.len() });
            }
        }
        let mut metric = vec![0.0; vertex_count * vertex_count];
        for x in 0..vertex_count {
            let dist = dijkstra(&graph, NodeIndex::new(x), None, |e| *e.weight());
            if dist.len() != vertex_count {
                return Err(Error::InvalidBase("graph is not connected".into()));
            }
            for (node, d) in dist {
                metric[x * vertex_count + node.index()] = d;
            }
        }
        // shortest paths are symmetric up to summation order; pin them exactly
        for x in 0..vertex_count {
            for y in 0..x {
                let d = metric[x * vertex_count + y].min(metric[y * vertex_count + x]);
                metric[x * vertex_count + y] = d;
                metric[y * vertex_count + x] = d;
            }
        }
        let mut mask = vec![false; vertex_count];
        for &v in z {
            if v >= vertex_count {
                return Err(Error::MissingVertex(v));
            }
            mask[v] = true;
        }
        if !mask.iter().any(|&b| b) {
            return Err(Error::InvalidBase("Z is empty".into()));
        }
        let dist_to_z = (0..vertex_count)
            .map(|x| {
                (0..vertex_count)
                    .filter(|&y| mask[y])
                    .map(|y| metric[x * vertex_count + y])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Ok(Self { vertex_count, edges, metric, z: mask, dist_to_z, coordinates })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.metric[x * self.vertex_count + y]
    }

    pub fn distance_to_z(&self, x: usize) -> f64 {
        self.dist_to_z[x]
    }

    pub fn in_z(&self, x: usize) -> bool {
        self.z[x]
    }

    pub fn z_mask(&self) -> &[bool] {
        &self.z
    }

    pub fn z_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count).filter(|&x| self.z[x]).collect()
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    pub fn max_distance_to_z(&self) -> f64 {
        self.dist_to_z.iter().copied().fold(0.0, f64::max)
    }

    /// Checks that the action's base permutations preserve `Z` and are
    /// isometries of the metric, so that distance sublevel sets of `Z` are
    /// invariant.
    pub fn check_action(&self, action: &GroupAction) -> Result<()> {
        if action.vertex_count() != self.vertex_count {
            return Err(Error::DimensionMismatch { expected: self.vertex_count, actual: action.vertex_count() });
        }
        action.check_preserves(&self.z)?;
        let n = self.vertex_count;
        for g in 0..action.order() {
            for x in 0..n {
                for y in 0..n {
                    let d = self.distance(x, y);
                    let moved = self.distance(action.act(g, x), action.act(g, y));
                    if (d - moved).abs() > DISTANCE_TOL * d.max(1.0) {
                        return Err(Error::InvalidAction(format!("element {g} is not an isometry of the base")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// `n` equally spaced points of `[lo, hi]`, placed symmetrically about the
/// midpoint so that reflections and quarter turns of a square grid map grid
/// points exactly onto grid points.
fn symmetric_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let c = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let steps = (n - 1) as f64;
    (0..n).map(|i| c + half * (2.0 * i as f64 - steps) / steps).collect()
}

/// `nx × ny` grid graph on a rectangle, vertex `(i, j)` at index `j·nx + i`,
/// with edge lengths equal to the physical grid spacing.
pub fn make_grid_base(
    nx: usize,
    ny: usize,
    rect: GridBox,
    z_predicate: impl Fn(f64, f64) -> bool,
) -> Result<BaseComplex> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidBase("grid needs at least two points per side".into()));
    }
    if !(rect.x_max > rect.x_min && rect.y_max > rect.y_min) {
        return Err(Error::InvalidBase("grid box has no interior".into()));
    }
    let xs = symmetric_points(rect.x_min, rect.x_max, nx);
    let ys = symmetric_points(rect.y_min, rect.y_max, ny);
    let hx = (rect.x_max - rect.x_min) / (nx - 1) as f64;
    let hy = (rect.y_max - rect.y_min) / (ny - 1) as f64;
    let idx = |i: usize, j: usize| j * nx + i;
    let mut edges = Vec::with_capacity(2 * nx * ny);
    let mut coords = Vec::with_capacity(nx * ny);
    let mut z = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            coords.push([xs[i], ys[j]]);
            if z_predicate(xs[i], ys[j]) {
                z.push(idx(i, j));
            }
            if i + 1 < nx {
                edges.push(Edge { a: idx(i, j), b: idx(i + 1, j), length: hx });
            }
            if j + 1 < ny {
                edges.push(Edge { a: idx(i, j), b: idx(i, j + 1), length: hy });
            }
        }
    }
    if z.is_empty() {
        return Err(Error::InvalidBase("Z predicate matches no grid vertex".into()));
    }
    BaseComplex::new(nx * ny, edges, &z, Some(coords))
}

/// Path graph `v_0 – v_1 – … – v_{n−1}` with unit edge lengths.
pub fn make_path_base(n: usize, z: &[usize]) -> Result<BaseComplex> {
    let edges = (1..n).map(|i| Edge { a: i - 1, b: i, length: 1.0 }).collect();
    let coords = (0..n).map(|i| [i as f64, 0.0]).collect();
    BaseComplex::new(n, edges, z, Some(coords))
}

/// Counterclockwise quarter turn of a square grid about its center.
pub fn grid_quarter_turn(nx: usize, ny: usize) -> Result<Vec<usize>> {
    if nx != ny {
        return Err(Error::InvalidAction("quarter turns need a square grid".into()));
    }
    let n = nx;
    let mut perm = vec![0; n * n];
    for j in 0..n {
        for i in 0..n {
            // (x, y) ↦ (−y, x)
            perm[j * n + i] = i * n + (n - 1 - j);
        }
    }
    Ok(perm)
}

/// Reflection `x ↦ −x` of a grid about its vertical center line.
pub fn grid_reflection_x(nx: usize, ny: usize) -> Vec<usize> {
    let mut perm = vec![0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            perm[j * nx + i] = j * nx + (nx - 1 - i);
        }
    }
    perm
}
