mod common;

use common::*;
use degreelab::contraction::{self_intersections, span_closure, zero_class_checks, ZeroClassCheck, ZERO_TOL};
use degreelab::ergodic::{exact_exponents, exponent_sum_check, lyapunov_exponents};
use degreelab::lattice::{
    adjoint_pushforward, pullback_expansion_form, pushpull_defect, spectral_analysis,
};
use degreelab::linalg::RatMatrix;
use degreelab::models::SurfacePoint;
use degreelab::{IntersectionLattice, NefRule};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rational_class(rank: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-60i64..60, 1i64..25).prop_map(|(n, d)| rat(n, d)), rank)
}

#[test]
fn adjointness_is_exact_for_every_family() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(1000));
    for (name, m) in builtins() {
        let pull = m.pullback_rat();
        let push = adjoint_pushforward(&pull, &m.lattice).unwrap();
        let rank = m.lattice.rank;
        runner
            .run(&(rational_class(rank), rational_class(rank)), |(a, b)| {
                let lhs = m.lattice.pair_exact(&pull.apply(&a), &b).unwrap();
                let rhs = m.lattice.pair_exact(&a, &push.apply(&b)).unwrap();
                prop_assert_eq!(lhs, rhs, "{}", name);
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn subleading_eigenvalues_are_bounded_by_sqrt_lambda2() {
    for (name, m) in small_degree() {
        let r = spectral_analysis(&m.pullback_rat(), m.lambda2, &m.lattice, 1e-9).unwrap();
        assert!(r.second_modulus <= (m.lambda2 as f64).sqrt() + 1e-9, "{name}");
        assert!(r.sqrt_lambda2_bound_ok && r.simple_root, "{name}");
    }
    // Power maps have rank one and no subleading eigenvalue, and r1^2 = lambda2.
    for d in [2, 3] {
        let m = power(d);
        assert!(matches!(
            spectral_analysis(&m.pullback_rat(), m.lambda2, &m.lattice, 1e-9),
            Err(degreelab::Error::HypothesisViolation(_))
        ));
    }
}

#[test]
fn pushforward_has_the_same_characteristic_polynomial() {
    for (name, m) in builtins() {
        let pull = m.pullback_rat();
        let push = adjoint_pushforward(&pull, &m.lattice).unwrap();
        assert_eq!(pull.char_poly(), push.char_poly(), "{name}");
    }
}

#[test]
fn pushpull_defects() {
    let zero = |m: &degreelab::SurfaceMapModel| pushpull_defect(&m.pullback_rat(), &m.lattice, m.lambda2).unwrap();
    assert!(zero(&torus([[0, 1], [2, 2]])).is_zero());
    assert!(zero(&power(2)).is_zero());
    assert_eq!(zero(&skew_y2_x()), RatMatrix::from_ints(&[vec![3]]));
}

#[test]
fn expansion_form_is_psd_for_builtins() {
    for (name, m) in builtins() {
        let q = pullback_expansion_form(&m.pullback_rat(), &m.lattice, m.lambda2, 1e-9);
        assert!(q.is_ok_and(|q| q.psd), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// `<Ma, Ma> - lambda2 <a, a> = a^T Q a` for the expansion form `Q`.
    #[test]
    fn expansion_form_identity(idx in 0usize..11, a in rational_class(4)) {
        let (_, m) = &builtins()[idx];
        let a = &a[..m.lattice.rank];
        let pull = m.pullback_rat();
        let q = pullback_expansion_form(&pull, &m.lattice, m.lambda2, 1e-9).unwrap().q;
        let ma = pull.apply(a);
        let lhs = m.lattice.pair_exact(&ma, &ma).unwrap()
            - m.lattice.pair_exact(a, a).unwrap() * BigRational::from_integer(BigInt::from(m.lambda2));
        let qa = q.apply(a);
        let rhs: BigRational = a.iter().zip(&qa).map(|(x, y)| x * y).sum();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn preimages_map_back(seed in any::<u64>(), idx in 0usize..4) {
        let m = vec![skew_y3_x2(), secant_deg(3), torus([[0, 1], [2, 2]]), power(2)].swap_remove(idx);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = m.random_point(&mut rng);
        let pre = m.preimages(&p).unwrap();
        for q in pre {
            let back = m.evaluate(&q.point).unwrap();
            prop_assert!(back.dist(&p) < 1e-8, "{:?} -> {:?} vs {:?}", q.point, back, p);
        }
    }

    #[test]
    fn torus_map_is_affine(z in prop::array::uniform4(-1.0f64..1.0), w in prop::array::uniform4(-1.0f64..1.0)) {
        let m = torus([[0, 1], [2, 2]]);
        let pt = |v: [f64; 4]| SurfacePoint::torus(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]));
        let sum = [z[0] + w[0], z[1] + w[1], z[2] + w[2], z[3] + w[3]];
        let (SurfacePoint::Torus(fz), SurfacePoint::Torus(fw)) = (m.evaluate(&pt(z)).unwrap(), m.evaluate(&pt(w)).unwrap()) else {
            unreachable!()
        };
        let added = SurfacePoint::torus(fz[0] + fw[0], fz[1] + fw[1]);
        prop_assert!(m.evaluate(&pt(sum)).unwrap().dist(&added) < 1e-12);
    }

    #[test]
    fn exponent_sum_rule_for_gaussian_matrices(
        a in prop::array::uniform4((-3i64..=3, -3i64..=3)),
        seed in any::<u64>(),
    ) {
        let Ok(m) = torus_gauss([[a[0], a[1]], [a[2], a[3]]]) else {
            return Ok(());
        };
        let exact = exact_exponents(&m).unwrap();
        prop_assert!(exponent_sum_check(&exact, m.lambda2).pass);
        prop_assert!(exact.chi_plus >= exact.chi_minus);
        let r = lyapunov_exponents(&m, 10_000, 2, seed).unwrap();
        if r.hyperbolic {
            prop_assert!(exponent_sum_check(&r.monte_carlo, m.lambda2).pass);
            prop_assert!(r.deviation < 1e-3, "deviation {}", r.deviation);
            // chi+ = log r1 / 2 with r1 the spectral radius on the Hermitian model.
            let s = spectral_analysis(&m.pullback_rat(), m.lambda2, &m.lattice, 1e-9).unwrap();
            prop_assert!((exact.chi_plus - 0.5 * s.r1.ln()).abs() < 1e-9);
        }
    }

    /// Both invariant classes of a hyperbolic torus map are isotropic, and the
    /// pushforward eigenvalue test then passes.
    #[test]
    fn torus_zero_case_duality(a in prop::array::uniform4((-3i64..=3, -3i64..=3))) {
        let Ok(m) = torus_gauss([[a[0], a[1]], [a[2], a[3]]]) else {
            return Ok(());
        };
        let Ok(si) = self_intersections(&m, 1e-9) else {
            // r1^2 = lambda2: eigenvalues of equal modulus.
            return Ok(());
        };
        prop_assert_eq!(si.alpha_plus_sq.abs() < ZERO_TOL, si.alpha_minus_sq.abs() < ZERO_TOL);
        if si.alpha_plus_sq.abs() < ZERO_TOL {
            match zero_class_checks(&m, &si, ZERO_TOL, 1e-8).unwrap() {
                ZeroClassCheck::Checked { residual, pass, .. } => prop_assert!(pass && residual < 1e-8),
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn negative_definiteness_ignores_unimodular_basis_changes(
        diag in prop::collection::vec(1i64..6, 3),
        off in prop::array::uniform3(-2i64..=2),
        ops in prop::collection::vec((0usize..3, 0usize..3, -3i64..=3), 0..12),
    ) {
        let g = RatMatrix::from_ints(&[
            vec![-diag[0], off[0], off[1]],
            vec![off[0], -diag[1], off[2]],
            vec![off[1], off[2], -diag[2]],
        ]);
        let mut u = RatMatrix::identity(3);
        for (i, j, k) in ops {
            if i != j {
                let mut e = RatMatrix::identity(3).rows().to_vec();
                e[i][j] = rat(k, 1);
                u = RatMatrix::new(e).mul(&u);
            }
        }
        prop_assert_eq!(u.determinant(), rat(1, 1));
        prop_assert_eq!(g.is_negative_definite(), u.mul(&g).mul(&u.transpose()).is_negative_definite());
    }

    #[test]
    fn orbit_closure_is_idempotent(idx in 0usize..11, seeds in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 0..3)) {
        let (_, m) = &builtins()[idx];
        let rank = m.lattice.rank;
        let pull = m.pullback_rat();
        let push = adjoint_pushforward(&pull, &m.lattice).unwrap();
        let seeds: Vec<Vec<BigRational>> = seeds.iter().map(|s| s[..rank].iter().map(|&x| rat(x, 1)).collect()).collect();
        let once = span_closure(&seeds, &m.lattice, &push, &pull, 20).unwrap();
        prop_assert!(once.stabilized);
        let twice = span_closure(&once.basis_exact, &m.lattice, &push, &pull, 20).unwrap();
        prop_assert_eq!(&once.basis_exact, &twice.basis_exact);
        prop_assert_eq!(once.gram_negative_definite, twice.gram_negative_definite);
    }
}

#[test]
fn synthetic_negative_definite_lattice() {
    let lat = IntersectionLattice::new(
        vec![vec![-1, 0], vec![0, -2]],
        vec!["e1".into(), "e2".into()],
        NefRule::CustomHalfspaces(None),
        vec![1, 0],
    )
    .unwrap();
    let id = RatMatrix::identity(2);
    let cl = span_closure(&[vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]], &lat, &id, &id, 3).unwrap();
    assert_eq!(cl.gram_negative_definite, degreelab::contraction::Definiteness::NegativeDefinite);
}
