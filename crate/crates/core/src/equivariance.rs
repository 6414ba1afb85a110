//! Finite group actions on a discretized base and on fibers, group averaging
//! of map families, and equivariance diagnostics.
//!
//! A family assigns to vertices `x` linear maps `F(x): S → T`. With fiber
//! actions `α_u` on `S` and `β_u` on `T`, the family is equivariant when
//! `β_u F(x) α_u⁻¹ = F(u·x)` for all `u` and `x`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::numfmt::MatrixText;
use crate::Scalar;

/// Vertex-indexed family of matrices.
pub type MapFamily = BTreeMap<usize, Matrix>;

/// Relative tolerance for the homomorphism and automorphism checks.
pub const ACTION_TOL: f64 = 1e-12;
/// Tolerance on `g^n = id` for cyclic generators.
pub const ORDER_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GroupAction {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    base_perm: Vec<Vec<usize>>,
    source_fiber: Vec<Matrix>,
    target_fiber: Vec<Matrix>,
}

fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() / scale
}

impl GroupAction {
    /// Validates the multiplication table as a group and checks that the base
    /// permutations and both fiber actions are homomorphisms.
    pub fn new(
        table: Vec<Vec<usize>>,
        base_perm: Vec<Vec<usize>>,
        source_fiber: Vec<Matrix>,
        target_fiber: Vec<Matrix>,
    ) -> Result<Self> {
        let n = table.len();
        let bad = |msg: String| Err(Error::InvalidAction(msg));
        if n == 0 {
            return bad("empty group".into());
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&g| g >= n)) {
            return bad("multiplication table is not square over the element indices".into());
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return bad(format!("multiplication is not associative on ({a}, {b}, {c})"));
                    }
                }
            }
        }
        let identity = match (0..n).find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g)) {
            Some(e) => e,
            None => return bad("no identity element".into()),
        };
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            match (0..n).find(|&h| table[g][h] == identity && table[h][g] == identity) {
                Some(h) => inverse.push(h),
                None => return bad(format!("element {g} has no inverse")),
            }
        }
        if base_perm.len() != n || source_fiber.len() != n || target_fiber.len() != n {
            return bad("every element needs a base permutation and two fiber matrices".into());
        }
        let vertices = base_perm[0].len();
        for (g, perm) in base_perm.iter().enumerate() {
            let mut seen = vec![false; vertices];
            if perm.len() != vertices {
                return bad(format!("permutation {g} has the wrong length"));
            }
            for &x in perm {
                if x >= vertices || seen[x] {
                    return bad(format!("base action of element {g} is not a permutation"));
                }
                seen[x] = true;
            }
        }
        for fiber in [&source_fiber, &target_fiber] {
            let shape = fiber[0].shape();
            if shape.0 != shape.1 || fiber.iter().any(|m| m.shape() != shape) {
                return bad("fiber actions must be square matrices of one size".into());
            }
        }
        let action = Self { table, identity, inverse, base_perm, source_fiber, target_fiber };
        for g in 0..n {
            for h in 0..n {
                let gh = action.table[g][h];
                if (0..vertices).any(|x| action.base_perm[gh][x] != action.base_perm[g][action.base_perm[h][x]]) {
                    return bad(format!("base action is not a homomorphism on ({g}, {h})"));
                }
                for (name, fiber) in [("source", &action.source_fiber), ("target", &action.target_fiber)] {
                    if rel_diff(&fiber[gh], &(&fiber[g] * &fiber[h])) > ACTION_TOL {
                        return bad(format!("{name} fiber action is not a homomorphism on ({g}, {h})"));
                    }
                }
            }
        }
        Ok(action)
    }

    /// Trivial action of the one-element group.
    pub fn trivial(vertices: usize, source_dim: usize, target_dim: usize) -> Self {
        Self::new(
            vec![vec![0]],
            vec![(0..vertices).collect()],
            vec![Matrix::identity(source_dim, source_dim)],
            vec![Matrix::identity(target_dim, target_dim)],
        )
        .expect("the trivial action is valid")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn compose(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn vertex_count(&self) -> usize {
        self.base_perm[0].len()
    }

    /// `g·x`
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.base_perm[g][x]
    }

    pub fn source_fiber(&self, g: usize) -> &Matrix {
        &self.source_fiber[g]
    }

    pub fn target_fiber(&self, g: usize) -> &Matrix {
        &self.target_fiber[g]
    }

    pub fn source_dim(&self) -> usize {
        self.source_fiber[0].nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.target_fiber[0].nrows()
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut o: Vec<usize> = (0..self.order()).map(|g| self.act(g, x)).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Checks that a vertex subset (as a membership mask) is invariant.
    pub fn check_preserves(&self, members: &[bool]) -> Result<()> {
        if members.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch { expected: self.vertex_count(), actual: members.len() });
        }
        for g in 0..self.order() {
            for (x, &inside) in members.iter().enumerate() {
                if inside && !members[self.act(g, x)] {
                    return Err(Error::InvalidAction(format!("element {g} moves vertex {x} out of the subset")));
                }
            }
        }
        Ok(())
    }

    /// Checks that both fiber actions act by unital algebra automorphisms.
    pub fn check_automorphisms(&self, source: &Algebra, target: &Algebra) -> Result<()> {
        for (name, alg, fiber) in [("source", source, &self.source_fiber), ("target", target, &self.target_fiber)] {
            if fiber[0].nrows() != alg.dim() {
                return Err(Error::InvalidAction(format!("{name} fiber action has the wrong size")));
            }
            for (g, m) in fiber.iter().enumerate() {
                check_automorphism(alg, m).map_err(|msg| Error::InvalidAction(format!("{name} element {g}: {msg}")))?;
            }
        }
        Ok(())
    }

    pub fn document(&self) -> GroupActionDocument {
        GroupActionDocument {
            table: self.table.clone(),
            base_permutations: self.base_perm.clone(),
            source_fiber: self.source_fiber.iter().map(MatrixText::from_matrix).collect(),
            target_fiber: self.target_fiber.iter().map(MatrixText::from_matrix).collect(),
        }
    }
}

fn check_automorphism(alg: &Algebra, m: &Matrix) -> std::result::Result<(), String> {
    let unit_err = (m * alg.unit() - alg.unit()).norm();
    if unit_err > ACTION_TOL * alg.unit().norm().max(1.0) {
        return Err(format!("not unital (error {unit_err:e})"));
    }
    let scale = m.norm().powi(2).max(1.0);
    for i in 0..alg.dim() {
        let mi = m.column(i).into_owned();
        for j in 0..alg.dim() {
            let mj = m.column(j).into_owned();
            let lhs = m * alg.mul_unchecked(&alg.basis(i), &alg.basis(j));
            let rhs = alg.mul_unchecked(&mi, &mj);
            if (lhs - rhs).norm() > ACTION_TOL * scale {
                return Err(format!("not multiplicative on (b_{i}, b_{j})"));
            }
        }
    }
    Ok(())
}

/// Text form of a [`GroupAction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupActionDocument {
    pub table: Vec<Vec<usize>>,
    pub base_permutations: Vec<Vec<usize>>,
    pub source_fiber: Vec<MatrixText>,
    pub target_fiber: Vec<MatrixText>,
}

impl GroupActionDocument {
    pub fn to_action(&self) -> Result<GroupAction> {
        let source = self.source_fiber.iter().map(MatrixText::to_matrix).collect::<Result<Vec<_>>>()?;
        let target = self.target_fiber.iter().map(MatrixText::to_matrix).collect::<Result<Vec<_>>>()?;
        GroupAction::new(self.table.clone(), self.base_permutations.clone(), source, target)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("action documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}

/// The cyclic group `ℤ/n` generated by a vertex permutation and one matrix per
/// fiber. When `fibers` is given, the generators must be algebra automorphisms.
pub fn make_cyclic_action(
    n: usize,
    base_perm: &[usize],
    source_gen: &Matrix,
    target_gen: &Matrix,
    fibers: Option<(&Algebra, &Algebra)>,
) -> Result<GroupAction> {
    if n == 0 {
        return Err(Error::InvalidAction("cyclic order must be positive".into()));
    }
    let mut perms = vec![(0..base_perm.len()).collect::<Vec<_>>()];
    let mut src = vec![Matrix::identity(source_gen.nrows(), source_gen.ncols())];
    let mut tgt = vec![Matrix::identity(target_gen.nrows(), target_gen.ncols())];
    for k in 1..=n {
        let prev = &perms[k - 1];
        let next: Vec<usize> = prev.iter().map(|&x| base_perm[x]).collect();
        let s = source_gen * &src[k - 1];
        let t = target_gen * &tgt[k - 1];
        if k == n {
            if next.iter().enumerate().any(|(x, &y)| x != y) {
                return Err(Error::InvalidAction(format!("base permutation does not have order dividing {n}")));
            }
            if rel_diff(&s, &src[0]) > ORDER_TOL || rel_diff(&t, &tgt[0]) > ORDER_TOL {
                return Err(Error::InvalidAction(format!("fiber generator does not have order dividing {n}")));
            }
        } else {
            perms.push(next);
            src.push(s);
            tgt.push(t);
        }
    }
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let action = GroupAction::new(table, perms, src, tgt)?;
    if let Some((source, target)) = fibers {
        action.check_automorphisms(source, target)?;
    }
    Ok(action)
}

fn gather(family: &MapFamily, x: usize) -> Result<&Matrix> {
    family.get(&x).ok_or(Error::MissingVertex(x))
}

/// `x ↦ (1/|U|) Σ_u β_u⁻¹ F(u·x) α_u`, on every vertex of the family.
pub fn average_map_family(action: &GroupAction, family: &MapFamily) -> Result<MapFamily> {
    let weight = Scalar::new(1.0 / action.order() as f64, 0.0);
    let mut out = MapFamily::new();
    for &x in family.keys() {
        let mut acc: Option<Matrix> = None;
        for u in 0..action.order() {
            let f = gather(family, action.act(u, x))?;
            let term = action.target_fiber(action.inverse(u)) * f * action.source_fiber(u);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        out.insert(x, acc.expect("groups are nonempty") * weight);
    }
    Ok(out)
}

/// `max_u ‖β_u F(x) α_u⁻¹ − F(u·x)‖` at one vertex.
pub fn vertex_equivariance_defect(action: &GroupAction, family: &MapFamily, x: usize) -> Result<f64> {
    let f = gather(family, x)?;
    let mut worst: f64 = 0.0;
    for u in 0..action.order() {
        let moved = action.target_fiber(u) * f * action.source_fiber(action.inverse(u));
        let there = gather(family, action.act(u, x))?;
        worst = worst.max(linalg::spectral_norm(&(moved - there)));
    }
    Ok(worst)
}

pub fn equivariance_defect(action: &GroupAction, family: &MapFamily) -> Result<f64> {
    family
        .keys()
        .map(|&x| vertex_equivariance_defect(action, family, x))
        .try_fold(0.0, |acc: f64, d| d.map(|d| acc.max(d)))
}

/// Uniform-weight average over `samples` equally spaced angles of the circle.
pub fn haar_average_circle(samples: usize, family: impl Fn(f64) -> Matrix) -> Result<Matrix> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let mut acc = family(0.0);
    for k in 1..samples {
        acc += family(TAU * k as f64 / samples as f64);
    }
    Ok(acc / Scalar::new(samples as f64, 0.0))
}

/// Restriction of a family to a vertex subset.
pub fn restrict(family: &MapFamily, keep: impl Fn(usize) -> bool) -> MapFamily {
    family.iter().filter(|(&x, _)| keep(x)).map(|(&x, m)| (x, m.clone())).collect()
}
