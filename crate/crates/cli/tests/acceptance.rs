//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Exits nonzero when
//! any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prolong_cli::scenario::{exit, load_scenario, run_scenario, Germ, Scenario};
use prolong_cli::suite::{
    complex_matrix_algebra, contraction_sources, contraction_trial, cyclic_conjugation_action, enumerate_products,
    fitted_slope, fixed_point_change, matrix_unit_idempotent, random_homomorphism, shipped_star_algebras,
    MAX_PRODUCT_DIM,
};
use prolong_core::algebra::{
    product_of_matrix_algebras, separability_idempotent, star_symmetrize, GroundField, TensorCoeffs,
};
use prolong_core::embedding::inner_automorphism;
use prolong_core::equivariance::{average_map_family, equivariance_defect, MapFamily};
use prolong_core::linalg::{max_abs_diff, real, Matrix};
use prolong_core::random::{random_invertible, unit_noise};
use prolong_core::rectifier::{
    multiplicativity_defect, rectify, FiberMap, RectifyStatus, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

const SEED: u64 = 0;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn criterion_1() -> Verdict {
    let mut worst = 0.0f64;
    let mut count = 0;
    for field in [GroundField::Real, GroundField::Complex] {
        for blocks in enumerate_products(field, MAX_PRODUCT_DIM) {
            let alg = Arc::new(product_of_matrix_algebras(field, &blocks).expect("valid blocks"));
            worst = worst.max(separability_idempotent(&alg).map_or(f64::INFINITY, |e| e.defects().max()));
            count += 1;
        }
    }
    let mut oracle = 0.0f64;
    for n in 1..=4 {
        let e = separability_idempotent(&complex_matrix_algebra(n)).expect("semisimple");
        oracle = oracle.max(max_abs_diff(&e.coeffs, &matrix_unit_idempotent(n)));
    }
    verdict(
        worst <= 1e-10 && oracle <= 1e-12,
        format!("{count} products, worst defect {worst:.2e} (≤ 1e-10); M_n(ℂ) oracle gap {oracle:.2e} (≤ 1e-12)"),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let m4 = complex_matrix_algebra(4);
    let e = separability_idempotent(&m4).expect("semisimple");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g = random_invertible(&mut rng, 4, GroundField::Complex);
        let alpha = inner_automorphism(&m4, &g).expect("invertible");
        worst = worst.max(max_abs_diff(&TensorCoeffs::apply_map(&alpha, &e.coeffs), &e.coeffs));
    }
    verdict(worst <= 1e-9, format!("100 inner automorphisms of M₄, worst change {worst:.2e} (≤ 1e-9)"))
}

fn criterion_3() -> Verdict {
    let algebras = shipped_star_algebras();
    let worst = algebras
        .iter()
        .map(|a| {
            let e = star_symmetrize(&separability_idempotent(a).expect("semisimple")).expect("*-algebra");
            e.flip_star_defect().expect("*-algebra")
        })
        .fold(0.0, f64::max);
    verdict(worst <= 1e-12, format!("{} *-algebras, worst ‖e* − σ(e)‖ {worst:.2e} (≤ 1e-12)", algebras.len()))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    let mut lines = Vec::new();
    for src in contraction_sources() {
        let mut traces = Vec::new();
        let mut worst_fraction = 1.0f64;
        let (mut max_iter, mut worst_final) = (0, 0.0f64);
        let mut all_converged = true;
        for eps in [1e-2, 1e-3, 1e-4] {
            let mut good = 0;
            for _ in 0..200 {
                let t = contraction_trial(&mut rng, &src, eps);
                if t.one_step_defect <= 10.0 * t.initial_defect.powi(2) {
                    good += 1;
                }
                all_converged &= t.status == RectifyStatus::Converged;
                max_iter = max_iter.max(t.iterations);
                worst_final = worst_final.max(*t.defect_trace.last().expect("nonempty"));
                traces.push(t.defect_trace);
            }
            worst_fraction = worst_fraction.min(good as f64 / 200.0);
        }
        let slope = fitted_slope(traces.iter().map(|t| t.as_slice()));
        let slope_ok = slope.is_some_and(|s| (s - 2.0).abs() <= 0.15);
        let src_ok = worst_fraction >= 0.95 && all_converged && max_iter <= 6 && worst_final <= 1e-12 && slope_ok;
        ok &= src_ok;
        lines.push(format!(
            "{}: quadratic {:.1}%, ≤{} iterations, final ≤ {:.1e}, slope {:.3}",
            src.name,
            100.0 * worst_fraction,
            max_iter,
            worst_final,
            slope.unwrap_or(f64::NAN)
        ));
    }
    verdict(ok, lines.join("; "))
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut count = 0;
    for src in contraction_sources() {
        worst = worst.max(fixed_point_change(&src.embedding));
        for _ in 0..50 {
            worst = worst.max(fixed_point_change(&random_homomorphism(&mut rng, &src)));
        }
        count += 51;
    }
    verdict(worst <= 1e-14, format!("{count} homomorphisms, worst change {worst:.2e} (≤ 1e-14)"))
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut avg_worst, mut rect_worst) = (0.0f64, 0.0f64);
    let mut count = 0;
    for src in contraction_sources() {
        let e = separability_idempotent(&src.source).expect("semisimple");
        for n in [2, 3, 4] {
            for _ in 0..5 {
                let act = cyclic_conjugation_action(&mut rng, n, &src.source, &src.embedding.target);
                let noisy: MapFamily = (0..n)
                    .map(|x| {
                        let dims = (src.embedding.target.dim(), src.source.dim());
                        let noise = unit_noise(&mut rng, dims.0, dims.1, GroundField::Complex) * real(1e-3);
                        (x, &src.embedding.matrix + noise)
                    })
                    .collect();
                let avg = average_map_family(&act, &noisy).expect("complete orbit");
                avg_worst = avg_worst.max(equivariance_defect(&act, &avg).expect("complete orbit"));
                let rectified: MapFamily = avg
                    .iter()
                    .map(|(&x, m)| {
                        let phi = src.embedding.with_matrix(m.clone());
                        (x, rectify(&phi, &e, false, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid").map.matrix)
                    })
                    .collect();
                rect_worst = rect_worst.max(equivariance_defect(&act, &rectified).expect("complete orbit"));
                count += 1;
            }
        }
    }
    verdict(
        avg_worst <= 1e-12 && rect_worst <= 1e-10,
        format!("{count} families: averaged {avg_worst:.2e} (≤ 1e-12), rectified {rect_worst:.2e} (≤ 1e-10)"),
    )
}

/// Largest coefficientwise gap between the output and the germ on `Z`.
fn restriction_gap(scenario: &Scenario, maps: &MapFamily) -> f64 {
    let germ = match &scenario.germ {
        Germ::Algebra(g) => &g.maps,
        Germ::Frames(g) => &g.frames,
    };
    germ.iter().map(|(x, m)| maps.get(x).map_or(f64::INFINITY, |out| max_abs_diff(out, m))).fold(0.0, f64::max)
}

fn grid_step(scenario: &Scenario) -> f64 {
    let b = &scenario.config.base;
    ((b.rect[1] - b.rect[0]) / (b.nx - 1) as f64).min((b.rect[3] - b.rect[2]) / (b.ny - 1) as f64)
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let scenario = load_scenario(&scenario_path("circle-c2-in-m4-z4")).expect("shipped scenario validates");
    let dir = tempfile::tempdir().expect("temporary directory");
    let outcome = run_scenario(&scenario, dir.path()).expect("scenario runs");
    let elapsed = start.elapsed().as_secs_f64();
    let Germ::Algebra(germ) = &scenario.germ else { return verdict(false, "not an algebra scenario") };
    let res = &outcome.result;
    let restriction = restriction_gap(&scenario, &res.maps);
    let mult = res
        .maps
        .values()
        .map(|m| multiplicativity_defect(&FiberMap::new(germ.model.clone(), germ.ambient.clone(), m.clone()).unwrap()))
        .fold(0.0, f64::max);
    let equiv = equivariance_defect(&scenario.action, &res.maps).unwrap_or(f64::INFINITY);
    let (k2, k0) = res.bounds.map_or((f64::NAN, f64::NAN), |b| (b.k2, b.k0));
    let step = grid_step(&scenario);
    verdict(
        outcome.exit_code == exit::SUCCESS
            && res.radius >= step
            && restriction <= 1e-14
            && mult <= 1e-10
            && equiv <= 1e-10
            && k2.is_finite()
            && k0.is_finite()
            && elapsed < 10.0,
        format!(
            "radius {:.2} (grid step {step:.2}), |W| {}, restriction {restriction:.1e}, multiplicativity {mult:.1e}, \
             equivariance {equiv:.1e}, K2 {k2:.6}, K0 {k0:.6}, {elapsed:.2} s",
            res.radius,
            res.w.len()
        ),
    )
}

fn criterion_8() -> Verdict {
    let scenario = load_scenario(&scenario_path("tangent-circle-hilbert")).expect("shipped scenario validates");
    let dir = tempfile::tempdir().expect("temporary directory");
    let outcome = run_scenario(&scenario, dir.path()).expect("scenario runs");
    let res = &outcome.result;
    let isometry = res
        .maps
        .values()
        .map(|f| max_abs_diff(&(f.adjoint() * f), &Matrix::identity(f.ncols(), f.ncols())))
        .fold(0.0, f64::max);
    let equiv = equivariance_defect(&scenario.action, &res.maps).unwrap_or(f64::INFINITY);
    let restriction = restriction_gap(&scenario, &res.maps);
    verdict(
        outcome.exit_code == exit::SUCCESS
            && res.radius > 0.0
            && res.maps.len() == res.w.len()
            && isometry <= 1e-12
            && equiv <= 1e-10
            && restriction <= 1e-14,
        format!(
            "radius {:.2}, |W| {}, isometry {isometry:.1e}, equivariance {equiv:.1e}, restriction {restriction:.1e}",
            res.radius,
            res.w.len()
        ),
    )
}

fn run_binary(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_prolong")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_9() -> Verdict {
    let path = scenario_path("degenerate-split-projection");
    let dir = tempfile::tempdir().expect("temporary directory");
    let out = dir.path().join("reports");
    let (code, _) = run_binary(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let scenario = load_scenario(&path).expect("shipped scenario validates");
    let res = run_scenario(&scenario, &dir.path().join("direct")).expect("scenario runs").result;
    let w_is_z = res.w.len() == res.z_size && res.diagnostics.iter().all(|d| d.in_w == d.in_z);

    // no claimed W vertex, in any shipped scenario, carries an over-tolerance map
    let mut worst_claimed = 0.0f64;
    for name in ["degenerate-split-projection", "circle-c2-in-m4-z4"] {
        let s = load_scenario(&scenario_path(name)).expect("shipped scenario validates");
        let tol = s.config.options.rectify_tol;
        let r = run_scenario(&s, &dir.path().join(name)).expect("scenario runs").result;
        for d in r.diagnostics.iter().filter(|d| d.in_w) {
            worst_claimed = worst_claimed.max(d.final_defect.unwrap_or(f64::INFINITY) / tol);
        }
    }
    verdict(
        code == exit::DEGENERATE_STRICT && w_is_z && worst_claimed <= 1.0,
        format!(
            "exit {code} (expected {}), W = Z: {w_is_z}, worst claimed defect {worst_claimed:.2} × tolerance",
            exit::DEGENERATE_STRICT
        ),
    )
}

fn read_reports(dir: &Path) -> Vec<Vec<u8>> {
    let mut names: Vec<_> = std::fs::read_dir(dir).expect("report directory").map(|e| e.unwrap().path()).collect();
    names.sort();
    names.iter().map(|p| std::fs::read(p).expect("report file")).collect()
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut identical = true;
    let mut files = 0;
    for name in ["circle-c2-in-m4-z4", "tangent-circle-hilbert", "degenerate-split-projection"] {
        let path = scenario_path(name);
        let runs: Vec<_> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("{name}-{k}"));
                let (code, stdout) = run_binary(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
                (code, stdout, read_reports(&out))
            })
            .collect();
        files += runs[0].2.len();
        identical &= runs[0] == runs[1] && runs[0].2.len() == 3;
    }
    let suites: Vec<_> = (0..2).map(|_| run_binary(&["suite", "--seed", "0", "--trials", "2"])).collect();
    identical &= suites[0] == suites[1] && suites[0].0 == exit::SUCCESS;
    verdict(identical, format!("{files} scenario report files and the seed-0 suite report byte-identical on rerun"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("separability of every product of matrix algebras", criterion_1),
        ("automorphism invariance of the canonical idempotent", criterion_2),
        ("star symmetrization", criterion_3),
        ("rectifier contraction", criterion_4),
        ("homomorphisms are fixed points", criterion_5),
        ("equivariance of averaging and rectification", criterion_6),
        ("circle-c2-in-m4-z4 algebra extension", criterion_7),
        ("tangent-circle-hilbert frame extension", criterion_8),
        ("degenerate soundness", criterion_9),
        ("determinism", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = check();
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {} ({:.1} s)", k + 1, v.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!v.passed);
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
