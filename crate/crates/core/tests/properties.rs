use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prolong_core::algebra::{
    direct_sum, dual_numbers, make_matrix_algebra, product_of_matrix_algebras, semisimplicity_check,
    separability_idempotent, star_symmetrize, Algebra, AlgebraDocument, DivisionRing, GroundField, TensorCoeffs,
};
use prolong_core::bundle::{extension_radius, make_grid_base, make_path_base, polar_isometry, shepard_extend, GridBox};
use prolong_core::embedding::{block_diagonal_embedding, inner_automorphism};
use prolong_core::equivariance::{
    average_map_family, equivariance_defect, make_cyclic_action, restrict, GroupAction, MapFamily,
};
use prolong_core::linalg::{self, max_abs_diff, real, Matrix};
use prolong_core::random::{gaussian_matrix, random_invertible, random_unitary, unit_noise};
use prolong_core::rectifier::{rectify, star_of_map, tau_sa_step, tau_step, FiberMap};

fn ring() -> impl Strategy<Value = DivisionRing> {
    prop_oneof![Just(DivisionRing::Real), Just(DivisionRing::Complex), Just(DivisionRing::Quaternion)]
}

/// Products of matrix algebras over ℝ with total dimension ≤ 32.
fn real_blocks() -> impl Strategy<Value = Vec<(usize, DivisionRing)>> {
    prop::collection::vec((1usize..=3, ring()), 1..=3).prop_filter("total dimension at most 32", |blocks| {
        blocks.iter().map(|&(n, r)| n * n * ring_dim(r)).sum::<usize>() <= 32
    })
}

fn ring_dim(r: DivisionRing) -> usize {
    match r {
        DivisionRing::Real => 1,
        DivisionRing::Complex => 2,
        DivisionRing::Quaternion => 4,
    }
}

fn complex_m(n: usize) -> Arc<Algebra> {
    Arc::new(make_matrix_algebra(n, GroundField::Complex, DivisionRing::Complex).unwrap())
}

fn c_plus_m2() -> Arc<Algebra> {
    Arc::new(
        product_of_matrix_algebras(GroundField::Complex, &[(1, DivisionRing::Complex), (2, DivisionRing::Complex)])
            .unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn constructed_algebras_pass_validation_and_are_separable(blocks in real_blocks()) {
        let a = Arc::new(product_of_matrix_algebras(GroundField::Real, &blocks).unwrap());
        // re-validating the raw data re-checks associativity, unit and involution
        let again = Algebra::new(
            a.field(), a.dim(), a.structure_constants().to_vec(), a.unit().clone(),
            a.involution().cloned(), None,
        );
        prop_assert!(again.is_ok());
        let e = separability_idempotent(&a).unwrap();
        let d = e.defects();
        prop_assert!(d.centrality <= 1e-10 && d.unit <= 1e-10, "{:?}", d);
        let s = star_symmetrize(&e).unwrap();
        prop_assert!(s.flip_star_defect().unwrap() <= 1e-12);
    }

    #[test]
    fn semisimplicity_oracle(blocks in real_blocks()) {
        let a = product_of_matrix_algebras(GroundField::Real, &blocks).unwrap();
        prop_assert!(semisimplicity_check(&a, 1e-8).semisimple);
        let with_nilpotent = direct_sum(&a, &dual_numbers(GroundField::Real)).unwrap();
        prop_assert!(!semisimplicity_check(&with_nilpotent, 1e-8).semisimple);
    }

    #[test]
    fn documents_round_trip(blocks in real_blocks()) {
        let a = product_of_matrix_algebras(GroundField::Real, &blocks).unwrap();
        let doc = AlgebraDocument::from_algebra(&a);
        let back = AlgebraDocument::from_json(&doc.to_json()).unwrap().to_algebra().unwrap();
        prop_assert_eq!(back.structure_constants(), a.structure_constants());
        prop_assert_eq!(back.unit(), a.unit());
    }

    #[test]
    fn inner_automorphisms_fix_the_canonical_idempotent(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = complex_m(n);
        let e = separability_idempotent(&m).unwrap();
        let g = random_invertible(&mut rng, n, GroundField::Complex);
        let alpha = inner_automorphism(&m, &g).unwrap();
        let moved = TensorCoeffs::apply_map(&alpha, &e.coeffs);
        prop_assert!(max_abs_diff(&moved, &e.coeffs) <= 1e-9);
    }

    #[test]
    fn star_is_involutive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = c_plus_m2();
        let x = gaussian_matrix(&mut rng, a.dim(), 1, GroundField::Complex).column(0).into_owned();
        let back = a.star(&a.star(&x).unwrap()).unwrap();
        prop_assert!((back - &x).norm() <= 1e-14 * x.norm().max(1.0));

        let m4 = complex_m(4);
        let phi = FiberMap::new(Arc::clone(&a), m4.clone(), gaussian_matrix(&mut rng, 16, a.dim(), GroundField::Complex)).unwrap();
        let twice = star_of_map(&star_of_map(&phi).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&twice.matrix, &phi.matrix) <= 1e-14);
    }

    #[test]
    fn star_conjugated_step_differs_by_a_commutator(seed in any::<u64>()) {
        // With e* = σ(e) and e central, (τφ)*(a) − τ(φ*)(a) = [S, φ*(a)] where
        // S = Σ E_ij φ*(b_i) φ*(b_j); this vanishes at homomorphisms but is of
        // first order in the defect elsewhere.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = c_plus_m2();
        let tgt = complex_m(6);
        let e = star_symmetrize(&separability_idempotent(&src).unwrap()).unwrap();
        let emb = block_diagonal_embedding(&src, &tgt, &[(1, 2), (2, 2)]).unwrap();
        let noise = unit_noise(&mut rng, tgt.dim(), src.dim(), GroundField::Complex) * real(1e-3);
        let phi = emb.with_matrix(&emb.matrix + noise);

        let psi = star_of_map(&phi).unwrap();
        let images: Vec<_> = (0..src.dim()).map(|i| psi.apply(&src.basis(i))).collect();
        let mut s = tgt.zero();
        for i in 0..src.dim() {
            for j in 0..src.dim() {
                s += tgt.multiply(&images[i], &images[j]).unwrap() * e.coeffs[(i, j)];
            }
        }
        let lhs = star_of_map(&tau_step(&phi, &e)).unwrap();
        let rhs = tau_step(&psi, &e);
        for k in 0..src.dim() {
            let gap = lhs.matrix.column(k) - rhs.matrix.column(k);
            let commutator = tgt.multiply(&s, &images[k]).unwrap() - tgt.multiply(&images[k], &s).unwrap();
            prop_assert!((gap - commutator).norm() <= 1e-12);
        }

        // at a homomorphism both sides agree exactly
        let lhs = star_of_map(&tau_step(&emb, &e)).unwrap();
        let rhs = tau_step(&star_of_map(&emb).unwrap(), &e);
        prop_assert!(max_abs_diff(&lhs.matrix, &rhs.matrix) <= 1e-12);
    }

    #[test]
    fn symmetrized_step_commutes_with_star_and_preserves_self_star_maps(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = c_plus_m2();
        let tgt = complex_m(6);
        let e = star_symmetrize(&separability_idempotent(&src).unwrap()).unwrap();
        let emb = block_diagonal_embedding(&src, &tgt, &[(1, 2), (2, 2)]).unwrap();
        let noise = unit_noise(&mut rng, tgt.dim(), src.dim(), GroundField::Complex) * real(1e-3);
        let phi = emb.with_matrix(&emb.matrix + noise);

        let lhs = star_of_map(&tau_sa_step(&phi, &e).unwrap()).unwrap();
        let rhs = tau_sa_step(&star_of_map(&phi).unwrap(), &e).unwrap();
        prop_assert!(max_abs_diff(&lhs.matrix, &rhs.matrix) <= 1e-12);

        let sym = phi.with_matrix((&phi.matrix + star_of_map(&phi).unwrap().matrix) * real(0.5));
        let out = rectify(&sym, &e, true, 1e-12, 50).unwrap().map;
        let out_star = star_of_map(&out).unwrap();
        prop_assert!(max_abs_diff(&out.matrix, &out_star.matrix) <= 1e-10);
    }

    #[test]
    fn averaging_is_idempotent_equivariant_and_commutes_with_restriction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let rect = GridBox { x_min: -1.0, x_max: 1.0, y_min: -1.0, y_max: 1.0 };
        let base = make_grid_base(n, n, rect, |x, y| x.abs() + y.abs() > 1.4).unwrap();
        let perm = prolong_core::bundle::grid_quarter_turn(n, n).unwrap();
        // a unitary of order 4 on each fiber: u·diag(1, i, −1, −i)·u⁻¹
        let order4 = |rng: &mut ChaCha8Rng, d: usize| {
            let u = random_unitary(rng, d, GroundField::Complex);
            let mut diag = Matrix::zeros(d, d);
            for k in 0..d {
                diag[(k, k)] = prolong_core::Scalar::i().powu(k as u32);
            }
            &u * diag * u.adjoint()
        };
        let (a, b) = (order4(&mut rng, 2), order4(&mut rng, 3));
        let act = make_cyclic_action(4, &perm, &a, &b, None).unwrap();
        base.check_action(&act).unwrap();
        let fam: MapFamily = (0..n * n).map(|x| (x, gaussian_matrix(&mut rng, 3, 2, GroundField::Complex))).collect();
        let avg = average_map_family(&act, &fam).unwrap();
        prop_assert!(equivariance_defect(&act, &avg).unwrap() <= 1e-12);
        let twice = average_map_family(&act, &avg).unwrap();
        for (x, m) in &avg {
            prop_assert!(max_abs_diff(m, &twice[x]) <= 1e-13);
        }
        let on_z = |x: usize| base.in_z(x);
        let left = restrict(&avg, on_z);
        let right = average_map_family(&act, &restrict(&fam, on_z)).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn shepard_is_non_expansive(seed in any::<u64>(), len in 2usize..12, k in 1usize..5, power in 0.5f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<usize> = (0..len).filter(|&i| rand::Rng::random_bool(&mut rng, 0.4) || i == 0).collect();
        let base = make_path_base(len, &z).unwrap();
        let values: MapFamily = z.iter().map(|&v| (v, gaussian_matrix(&mut rng, 2, 2, GroundField::Complex))).collect();
        let sup = |f: &MapFamily| f.values().map(linalg::spectral_norm).fold(0.0, f64::max);
        let ext = shepard_extend(&base, &values, power, k).unwrap();
        prop_assert_eq!(ext.len(), len);
        prop_assert!(sup(&ext) <= sup(&values) * (1.0 + 1e-12));
        for &v in &z {
            prop_assert_eq!(&ext[&v], &values[&v]);
        }
    }

    #[test]
    fn shrinking_the_pass_set_never_enlarges_w(seed in any::<u64>(), len in 2usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = make_path_base(len, &[0]).unwrap();
        let big: Vec<bool> = (0..len).map(|i| i == 0 || rand::Rng::random_bool(&mut rng, 0.8)).collect();
        let small: Vec<bool> = big.iter().enumerate().map(|(i, &b)| b && (i == 0 || rand::Rng::random_bool(&mut rng, 0.7))).collect();
        let (r_big, w_big) = extension_radius(&base, &big).unwrap();
        let (r_small, w_small) = extension_radius(&base, &small).unwrap();
        prop_assert!(r_small <= r_big);
        prop_assert!(w_small.iter().all(|x| w_big.contains(x)));
        prop_assert!(w_small.contains(&0));
    }

    #[test]
    fn polar_output_is_isometric(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
        prop_assume!(cols <= rows);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = gaussian_matrix(&mut rng, rows, cols, GroundField::Complex);
        let q = polar_isometry(&f).unwrap();
        prop_assert!(max_abs_diff(&(q.adjoint() * &q), &Matrix::identity(cols, cols)) <= 1e-12);
        let again = polar_isometry(&q).unwrap();
        prop_assert!(max_abs_diff(&again, &q) <= 1e-12);
    }
}

#[test]
fn rectifying_an_equivariant_family_keeps_it_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let src = c_plus_m2();
    let tgt = complex_m(6);
    let e = separability_idempotent(&src).unwrap();
    let emb = block_diagonal_embedding(&src, &tgt, &[(1, 2), (2, 2)]).unwrap();
    // ℤ/3 cycling three vertices, acting on M₆ by conjugation with a unitary of order 3
    let mut w = Matrix::zeros(6, 6);
    for k in 0..6 {
        w[(k, k)] = prolong_core::Scalar::from_polar(1.0, std::f64::consts::TAU * (k % 3) as f64 / 3.0);
    }
    let u = random_unitary(&mut rng, 6, GroundField::Complex);
    let g = &u * w * u.adjoint();
    let beta = inner_automorphism(&tgt, &g).unwrap();
    let act = make_cyclic_action(3, &[1, 2, 0], &Matrix::identity(5, 5), &beta, Some((&src, &tgt))).unwrap();
    let fam: MapFamily =
        (0..3).map(|x| (x, &emb.matrix + unit_noise(&mut rng, 36, 5, GroundField::Complex) * real(1e-3))).collect();
    let avg = average_map_family(&act, &fam).unwrap();
    assert!(equivariance_defect(&act, &avg).unwrap() <= 1e-12);
    let rectified: MapFamily = avg
        .iter()
        .map(|(&x, m)| {
            let phi = FiberMap::new(Arc::clone(&src), Arc::clone(&tgt), m.clone()).unwrap();
            (x, rectify(&phi, &e, false, 1e-12, 50).unwrap().map.matrix)
        })
        .collect();
    assert!(equivariance_defect(&act, &rectified).unwrap() <= 1e-10);
}

#[test]
fn trivial_action_is_the_one_element_group() {
    let act = GroupAction::trivial(4, 2, 3);
    assert_eq!(act.order(), 1);
    assert_eq!(act.orbit(2), vec![2]);
}
