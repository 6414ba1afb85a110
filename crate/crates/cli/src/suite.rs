//! Seeded property suite over every invariant of the library. Failures are
//! report content, not errors.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use prolong_core::algebra::{
    direct_sum, dual_numbers, make_matrix_algebra, product_of_matrix_algebras, semisimplicity_check,
    separability_idempotent, star_symmetrize, Algebra, DivisionRing, GroundField, TensorCoeffs, SEMISIMPLICITY_TOL,
};
use prolong_core::bundle::{extension_radius, make_path_base, polar_isometry, shepard_extend};
use prolong_core::embedding::{block_diagonal_embedding, inner_automorphism};
use prolong_core::equivariance::{average_map_family, equivariance_defect, make_cyclic_action, MapFamily};
use prolong_core::linalg::{self, max_abs_diff, real, Matrix};
use prolong_core::numfmt::Real;
use prolong_core::random::{gaussian_matrix, random_invertible, random_unitary, unit_noise};
use prolong_core::rectifier::{
    multiplicativity_defect, rectify, star_of_map, tau_sa_step, tau_step, unitalize, FiberMap, RectifyStatus,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use prolong_core::Scalar;

/// Largest total dimension of the enumerated semisimple algebras.
pub const MAX_PRODUCT_DIM: usize = 32;

fn ring_dim(r: DivisionRing) -> usize {
    match r {
        DivisionRing::Real => 1,
        DivisionRing::Complex => 2,
        DivisionRing::Quaternion => 4,
    }
}

/// Every product of matrix algebras over the division rings available for
/// `field` with total dimension at most `max_dim`, one per isomorphism class.
pub fn enumerate_products(field: GroundField, max_dim: usize) -> Vec<Vec<(usize, DivisionRing)>> {
    let rings: &[DivisionRing] = match field {
        GroundField::Real => &[DivisionRing::Real, DivisionRing::Complex, DivisionRing::Quaternion],
        GroundField::Complex => &[DivisionRing::Complex],
    };
    let mut kinds = Vec::new();
    for &r in rings {
        let unit = if field == GroundField::Complex { 1 } else { ring_dim(r) };
        for n in 1.. {
            if n * n * unit > max_dim {
                break;
            }
            kinds.push(((n, r), n * n * unit));
        }
    }
    fn go(
        kinds: &[((usize, DivisionRing), usize)],
        i: usize,
        room: usize,
        cur: &mut Vec<(usize, DivisionRing)>,
        out: &mut Vec<Vec<(usize, DivisionRing)>>,
    ) {
        if i == kinds.len() {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        let (kind, dim) = kinds[i];
        let mut pushed = 0;
        loop {
            go(kinds, i + 1, room - pushed * dim, cur, out);
            if (pushed + 1) * dim > room {
                break;
            }
            cur.push(kind);
            pushed += 1;
        }
        cur.truncate(cur.len() - pushed);
    }
    let mut out = Vec::new();
    go(&kinds, 0, max_dim, &mut Vec::new(), &mut out);
    out
}

/// `(1/n) Σ e_ij ⊗ e_ji` in the matrix-unit basis of `M_n`.
pub fn matrix_unit_idempotent(n: usize) -> Matrix {
    let mut e = Matrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            e[(i * n + j, j * n + i)] = real(1.0 / n as f64);
        }
    }
    e
}

pub fn complex_matrix_algebra(n: usize) -> Arc<Algebra> {
    Arc::new(make_matrix_algebra(n, GroundField::Complex, DivisionRing::Complex).expect("M_n(ℂ) exists"))
}

/// A source algebra for the contraction experiments together with its
/// unital block embedding into `M₆`.
pub struct ContractionSource {
    pub name: &'static str,
    pub source: Arc<Algebra>,
    pub embedding: FiberMap,
}

/// `ℂ²`, `M₂`, `M₃` and `ℂ ⊕ M₂`, each unitally embedded in `M₆`.
pub fn contraction_sources() -> Vec<ContractionSource> {
    let c = DivisionRing::Complex;
    let target = complex_matrix_algebra(6);
    type Spec = (&'static str, Vec<(usize, DivisionRing)>, Vec<(usize, usize)>);
    let specs: [Spec; 4] = [
        ("C2", vec![(1, c), (1, c)], vec![(1, 3), (1, 3)]),
        ("M2", vec![(2, c)], vec![(2, 3)]),
        ("M3", vec![(3, c)], vec![(3, 2)]),
        ("C+M2", vec![(1, c), (2, c)], vec![(1, 2), (2, 2)]),
    ];
    specs
        .into_iter()
        .map(|(name, blocks, layout)| {
            let source = Arc::new(product_of_matrix_algebras(GroundField::Complex, &blocks).expect("valid blocks"));
            let embedding = block_diagonal_embedding(&source, &target, &layout).expect("valid layout");
            ContractionSource { name, source, embedding }
        })
        .collect()
}

/// Outcome of one noisy-embedding trial.
#[derive(Debug, Clone)]
pub struct ContractionTrial {
    pub initial_defect: f64,
    pub one_step_defect: f64,
    pub defect_trace: Vec<f64>,
    pub iterations: usize,
    pub status: RectifyStatus,
    /// `‖rectify(φ) − φ‖`
    pub distance: f64,
}

/// Perturbs the embedding by `ε` times unit-Frobenius Gaussian noise, then
/// takes one correction step and a full rectification.
pub fn contraction_trial(rng: &mut ChaCha8Rng, src: &ContractionSource, eps: f64) -> ContractionTrial {
    let e = separability_idempotent(&src.source).expect("semisimple source");
    let emb = &src.embedding;
    let noise = unit_noise(rng, emb.target.dim(), emb.source.dim(), GroundField::Complex);
    let phi = emb.with_matrix(&emb.matrix + noise * real(eps));
    let one_step_defect = multiplicativity_defect(&tau_step(&phi, &e));
    let res = rectify(&phi, &e, false, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid arguments");
    ContractionTrial {
        initial_defect: res.defect_trace[0],
        one_step_defect,
        distance: res.map.distance(&phi),
        iterations: res.iterations,
        status: res.status,
        defect_trace: res.defect_trace,
    }
}

/// Successive-defect pairs are excluded from the slope fit once the second
/// defect reaches this level, where round-off rather than the quadratic law
/// determines its size.
pub const SLOPE_FLOOR: f64 = 1e-11;

/// Least-squares slope of `ln d_{n+1}` against `ln d_n` over all successive
/// pairs with `d_{n+1} ≥ SLOPE_FLOOR`.
pub fn fitted_slope<'a>(traces: impl IntoIterator<Item = &'a [f64]>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = traces
        .into_iter()
        .flat_map(|t| t.windows(2).filter(|w| w[1] >= SLOPE_FLOOR && w[0] > 0.0).map(|w| (w[0].ln(), w[1].ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// A unital *-homomorphism `src → M₆` moved by a random unitary conjugation.
pub fn random_homomorphism(rng: &mut ChaCha8Rng, src: &ContractionSource) -> FiberMap {
    let u = random_unitary(rng, 6, GroundField::Complex);
    let conj = inner_automorphism(&src.embedding.target, &u).expect("unitaries are invertible");
    src.embedding.with_matrix(conj * &src.embedding.matrix)
}

/// Largest coefficientwise change of a homomorphism under `τ`, `τ_sa`,
/// unitalization and rectification.
pub fn fixed_point_change(phi: &FiberMap) -> f64 {
    let e = star_symmetrize(&separability_idempotent(&phi.source).expect("semisimple")).expect("*-algebra");
    let steps = [
        tau_step(phi, &e),
        tau_sa_step(phi, &e).expect("*-algebras"),
        unitalize(phi),
        rectify(phi, &e, false, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid").map,
        rectify(phi, &e, true, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid").map,
    ];
    steps.iter().map(|s| max_abs_diff(&s.matrix, &phi.matrix)).fold(0.0, f64::max)
}

/// A `ℤ/n` action cycling `n` vertices, acting on `M₆` by conjugation with a
/// random unitary of order `n` and trivially on the source.
pub fn cyclic_conjugation_action(
    rng: &mut ChaCha8Rng,
    n: usize,
    src: &Arc<Algebra>,
    tgt: &Arc<Algebra>,
) -> prolong_core::equivariance::GroupAction {
    let size = tgt.realization().expect("matrix algebra")[0].nrows();
    let mut w = Matrix::zeros(size, size);
    for k in 0..size {
        w[(k, k)] = Scalar::from_polar(1.0, std::f64::consts::TAU * (k % n) as f64 / n as f64);
    }
    let u = random_unitary(rng, size, GroundField::Complex);
    let g = &u * w * u.adjoint();
    let beta = inner_automorphism(tgt, &g).expect("invertible");
    let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    make_cyclic_action(n, &perm, &Matrix::identity(src.dim(), src.dim()), &beta, Some((src, tgt)))
        .expect("order-n unitary conjugation")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// largest measured value over all cases (for `fraction` suites, the
    /// observed success fraction)
    pub worst: Real,
    pub limit: Real,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

struct Collector {
    name: &'static str,
    limit: f64,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Collector {
    fn new(name: &'static str, limit: f64) -> Self {
        Self { name, limit, cases: 0, failures: 0, worst: 0.0 }
    }

    fn record(&mut self, value: f64) {
        self.cases += 1;
        if !(value <= self.limit) {
            self.failures += 1;
        }
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            name: self.name.into(),
            cases: self.cases,
            failures: self.failures,
            worst: Real(self.worst),
            limit: Real(self.limit),
            passed: self.failures == 0 && self.cases > 0,
        }
    }
}

fn fraction_outcome(name: &str, cases: usize, good: usize, required: f64) -> SuiteOutcome {
    let frac = good as f64 / cases.max(1) as f64;
    SuiteOutcome {
        name: name.into(),
        cases,
        failures: cases - good,
        worst: Real(frac),
        limit: Real(required),
        passed: cases > 0 && frac >= required,
    }
}

/// Independent stream for suite `k`, so suites do not perturb each other.
fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Runs every property with `trials` random cases each (deterministic
/// enumerations run in full regardless of `trials`).
pub fn run_property_suite(seed: u64, trials: usize) -> SuiteReport {
    let trials = trials.max(1);
    let mut suites = Vec::new();

    // separability of every product of matrix algebras
    let mut sep = Collector::new("separability_defects", 1e-10);
    let mut ss = Collector::new("semisimplicity_oracle", 0.0);
    for field in [GroundField::Real, GroundField::Complex] {
        for blocks in enumerate_products(field, MAX_PRODUCT_DIM) {
            let a = Arc::new(product_of_matrix_algebras(field, &blocks).expect("valid blocks"));
            match separability_idempotent(&a) {
                Ok(e) => sep.record(e.defects().max()),
                Err(_) => sep.record(f64::INFINITY),
            }
            let with_nilpotent = direct_sum(&a, &dual_numbers(field)).expect("same field");
            let wrong = !semisimplicity_check(&a, SEMISIMPLICITY_TOL).semisimple
                || semisimplicity_check(&with_nilpotent, SEMISIMPLICITY_TOL).semisimple;
            ss.record(if wrong { 1.0 } else { 0.0 });
        }
    }
    suites.push(sep.finish());
    suites.push(ss.finish());

    let mut oracle = Collector::new("matrix_unit_oracle", 1e-12);
    for n in 1..=4 {
        let e = separability_idempotent(&complex_matrix_algebra(n)).expect("semisimple");
        oracle.record(max_abs_diff(&e.coeffs, &matrix_unit_idempotent(n)));
    }
    suites.push(oracle.finish());

    let mut rng = stream(seed, 1);
    let mut aut = Collector::new("automorphism_invariance", 1e-9);
    for t in 0..trials {
        let n = 1 + t % 4;
        let m = complex_matrix_algebra(n);
        let e = separability_idempotent(&m).expect("semisimple");
        let g = random_invertible(&mut rng, n, GroundField::Complex);
        let alpha = inner_automorphism(&m, &g).expect("invertible");
        aut.record(max_abs_diff(&TensorCoeffs::apply_map(&alpha, &e.coeffs), &e.coeffs));
    }
    suites.push(aut.finish());

    let mut flip = Collector::new("flip_star", 1e-12);
    for a in shipped_star_algebras() {
        let e = star_symmetrize(&separability_idempotent(&a).expect("semisimple")).expect("*-algebra");
        flip.record(e.flip_star_defect().expect("*-algebra"));
    }
    suites.push(flip.finish());

    // rectifier
    let sources = contraction_sources();
    let mut rng = stream(seed, 2);
    let (mut good, mut cases) = (0, 0);
    let mut iters = Collector::new("rectify_iterations", 6.0);
    let mut final_defect = Collector::new("rectify_final_defect", 1e-12);
    let mut dist = Collector::new("rectify_distance_ratio", 5.0);
    let mut traces = Vec::new();
    for t in 0..trials {
        let src = &sources[t % sources.len()];
        let eps = [1e-2, 1e-3, 1e-4][(t / sources.len()) % 3];
        let trial = contraction_trial(&mut rng, src, eps);
        cases += 1;
        if trial.one_step_defect <= 10.0 * trial.initial_defect.powi(2) {
            good += 1;
        }
        iters.record(trial.iterations as f64);
        final_defect.record(if trial.status == RectifyStatus::Converged {
            *trial.defect_trace.last().expect("nonempty")
        } else {
            f64::INFINITY
        });
        if eps <= 1e-3 {
            dist.record(trial.distance / trial.initial_defect);
        }
        traces.push(trial.defect_trace);
    }
    suites.push(fraction_outcome("quadratic_contraction", cases, good, 0.95));
    suites.push(iters.finish());
    suites.push(final_defect.finish());
    if dist.cases > 0 {
        suites.push(dist.finish());
    }
    let slope = fitted_slope(traces.iter().map(|t| t.as_slice()));
    // too few pairs above the round-off floor to fit a slope is not a failure
    let deviation = slope.map_or(0.0, |s| (s - 2.0).abs());
    suites.push(SuiteOutcome {
        name: "contraction_slope_deviation".into(),
        cases: traces.len(),
        failures: usize::from(!(deviation <= 0.15)),
        worst: Real(deviation),
        limit: Real(0.15),
        passed: deviation <= 0.15,
    });

    let mut rng = stream(seed, 3);
    let mut fixed = Collector::new("homomorphism_fixed_points", 1e-14);
    for t in 0..trials {
        fixed.record(fixed_point_change(&random_homomorphism(&mut rng, &sources[t % sources.len()])));
    }
    suites.push(fixed.finish());

    let mut rng = stream(seed, 4);
    let mut star_pres = Collector::new("star_preservation", 1e-10);
    let mut sa_commute = Collector::new("symmetrized_step_star_commutation", 1e-12);
    for t in 0..trials {
        let src = &sources[t % sources.len()];
        let e = star_symmetrize(&separability_idempotent(&src.source).expect("semisimple")).expect("*-algebra");
        let emb = &src.embedding;
        let noise = unit_noise(&mut rng, emb.target.dim(), emb.source.dim(), GroundField::Complex) * real(1e-3);
        let phi = emb.with_matrix(&emb.matrix + noise);
        let lhs = star_of_map(&tau_sa_step(&phi, &e).expect("*")).expect("*");
        let rhs = tau_sa_step(&star_of_map(&phi).expect("*"), &e).expect("*");
        sa_commute.record(max_abs_diff(&lhs.matrix, &rhs.matrix));
        let sym = phi.with_matrix((&phi.matrix + star_of_map(&phi).expect("*").matrix) * real(0.5));
        let out = rectify(&sym, &e, true, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid").map;
        star_pres.record(max_abs_diff(&out.matrix, &star_of_map(&out).expect("*").matrix));
    }
    suites.push(star_pres.finish());
    suites.push(sa_commute.finish());

    // equivariance
    let mut rng = stream(seed, 5);
    let mut avg_eq = Collector::new("averaging_equivariance", 1e-12);
    let mut avg_idem = Collector::new("averaging_idempotence", 1e-13);
    let mut rect_eq = Collector::new("rectified_equivariance", 1e-10);
    for t in 0..trials {
        let src = &sources[t % sources.len()];
        let n = 2 + t % 3;
        let act = cyclic_conjugation_action(&mut rng, n, &src.source, &src.embedding.target);
        let fam: MapFamily = (0..n)
            .map(|x| {
                let noise = unit_noise(&mut rng, 36, src.source.dim(), GroundField::Complex) * real(1e-3);
                (x, &src.embedding.matrix + noise)
            })
            .collect();
        let avg = average_map_family(&act, &fam).expect("complete orbit");
        avg_eq.record(equivariance_defect(&act, &avg).expect("complete orbit"));
        let twice = average_map_family(&act, &avg).expect("complete orbit");
        avg_idem.record(avg.iter().map(|(x, m)| max_abs_diff(m, &twice[x])).fold(0.0, f64::max));
        let e = separability_idempotent(&src.source).expect("semisimple");
        let rectified: MapFamily = avg
            .iter()
            .map(|(&x, m)| {
                let phi = src.embedding.with_matrix(m.clone());
                (x, rectify(&phi, &e, false, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid").map.matrix)
            })
            .collect();
        rect_eq.record(equivariance_defect(&act, &rectified).expect("complete orbit"));
    }
    suites.push(avg_eq.finish());
    suites.push(avg_idem.finish());
    suites.push(rect_eq.finish());

    // bundle engine
    let mut rng = stream(seed, 6);
    let mut shepard = Collector::new("shepard_non_expansive", 0.0);
    let mut monotone = Collector::new("monotone_neighborhood", 0.0);
    let mut polar = Collector::new("polar_isometric", 1e-12);
    for _ in 0..trials {
        let len = rng.random_range(2..16);
        let z: Vec<usize> = (0..len).filter(|&i| i == 0 || rng.random_bool(0.3)).collect();
        let base = make_path_base(len, &z).expect("connected path");
        let values: MapFamily = z.iter().map(|&v| (v, gaussian_matrix(&mut rng, 2, 3, GroundField::Complex))).collect();
        let k = rng.random_range(1..5);
        let ext = shepard_extend(&base, &values, 2.0, k).expect("valid arguments");
        let sup = |f: &MapFamily| f.values().map(linalg::spectral_norm).fold(0.0, f64::max);
        shepard.record((sup(&ext) - sup(&values) * (1.0 + 1e-12)).max(0.0));

        let big: Vec<bool> = (0..len).map(|i| base.in_z(i) || rng.random_bool(0.8)).collect();
        let small: Vec<bool> =
            big.iter().enumerate().map(|(i, &b)| b && (base.in_z(i) || rng.random_bool(0.7))).collect();
        let (_, w_big) = extension_radius(&base, &big).expect("Z passes");
        let (_, w_small) = extension_radius(&base, &small).expect("Z passes");
        monotone.record(w_small.iter().filter(|x| !w_big.contains(x)).count() as f64);

        let cols = rng.random_range(1..4);
        let rows = cols + rng.random_range(0..3);
        let f = gaussian_matrix(&mut rng, rows, cols, GroundField::Complex);
        let q = polar_isometry(&f).expect("full rank almost surely");
        polar.record(max_abs_diff(&(q.adjoint() * &q), &Matrix::identity(cols, cols)));
    }
    suites.push(shepard.finish());
    suites.push(monotone.finish());
    suites.push(polar.finish());

    let passed = suites.iter().all(|s| s.passed);
    SuiteReport { seed, trials, passed, suites }
}

/// The *-algebras shipped with the scenarios and used throughout the suite.
pub fn shipped_star_algebras() -> Vec<Arc<Algebra>> {
    let c = DivisionRing::Complex;
    let mut out: Vec<Arc<Algebra>> = (1..=4).map(complex_matrix_algebra).collect();
    for blocks in [vec![(1, c), (1, c)], vec![(1, c), (2, c)], vec![(2, c), (2, c)]] {
        out.push(Arc::new(product_of_matrix_algebras(GroundField::Complex, &blocks).expect("valid")));
    }
    for (n, r) in [(1, DivisionRing::Quaternion), (2, DivisionRing::Real), (2, DivisionRing::Complex)] {
        out.push(Arc::new(make_matrix_algebra(n, GroundField::Real, r).expect("valid")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        // partitions of ≤ 32 into block dimensions {1,4,9,16,25} over ℂ
        assert_eq!(enumerate_products(GroundField::Complex, MAX_PRODUCT_DIM).len(), 350);
        // over ℝ block dimensions are n²·{1,2,4}
        assert_eq!(enumerate_products(GroundField::Real, MAX_PRODUCT_DIM).len(), 6494);
        assert_eq!(enumerate_products(GroundField::Complex, 4).len(), 5);
    }

    #[test]
    fn slope_fit_recovers_exponent() {
        let traces: Vec<Vec<f64>> =
            [1e-2, 3e-3, 1e-4].iter().map(|&d0: &f64| vec![d0, 2.0 * d0 * d0, 8.0 * d0.powi(4), 1e-16]).collect();
        let s = fitted_slope(traces.iter().map(|t| t.as_slice())).unwrap();
        assert!((s - 2.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn smoke_run_passes() {
        let report = run_property_suite(0, 1);
        assert!(report.passed, "{}", report.to_json());
        assert_eq!(report.trials, 1);
        assert!(report.suites.iter().all(|s| s.cases > 0));
    }
}
