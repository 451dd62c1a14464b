mod common;

use common::*;
use degreelab::contraction::{contraction_report, integrality_check, ZeroClassCheck};
use degreelab::ergodic::{exponent_sum_check, haar_invariance_check, lyapunov_exponents};
use degreelab::lattice::spectral_analysis;
use degreelab::models::FactorSpec;
use degreelab::stability::{check_one_stability, lambda1_estimate, symbolic_degree_sequence, Verdict};
use degreelab::{build_model, Error, FamilyParams};

#[test]
fn secant_dynamical_degrees() {
    for d in 2..=6u64 {
        let m = secant_deg(d as usize);
        assert_eq!(m.lambda2, d - 1);
        let r = spectral_analysis(&m.pullback_rat(), m.lambda2, &m.lattice, 1e-9).unwrap();
        let k = (d - 1) as f64;
        let closed = (k + (k * (k + 4.0)).sqrt()) / 2.0;
        assert!((r.r1 - closed).abs() < 1e-9, "d={d}: {} vs {closed}", r.r1);
        assert!(r.alpha_nef);
    }
}

#[test]
fn skew_degrees_and_preimage_count() {
    let m = skew_y3_x2();
    assert_eq!(m.lambda2, 2);
    let r = spectral_analysis(&m.pullback_rat(), m.lambda2, &m.lattice, 1e-9).unwrap();
    assert!((r.r1 - 3.0).abs() < 1e-12);
    let est = m.topological_degree_mc(1000, 42).unwrap();
    assert_eq!(est.modal_count, 2);
    assert!(est.agreement >= 0.99);
}

#[test]
fn secant_stability_and_rejection() {
    let m = secant(&[0.0, -1.0, 0.0, 1.0]);
    assert_eq!(m.indeterminacy.len(), 7);
    let r = check_one_stability(&m, 50, 1e-9).unwrap();
    assert_eq!(r.verdict, Verdict::NoObstructionUpTo { horizon: 50 });
    // z^2 (z - 1) = z^3 - z^2.
    let err = build_model(&FamilyParams::Secant { p: vec![c(0.0), c(0.0), c(-1.0), c(1.0)] }).unwrap_err();
    let Error::ModelRejected(msg) = err else { panic!("{err:?}") };
    assert!(msg.contains("not squarefree") && msg.contains("repeated root 0"), "{msg}");
}

#[test]
fn degree_sequences_against_matrix_powers() {
    let m = skew_y2_x();
    let ds = symbolic_degree_sequence(&m, 3).unwrap();
    assert_eq!(ds.degrees, vec![2, 4, 8]);
    assert_eq!(degreelab::stability::matrix_degree_prediction(&m, 3).unwrap(), vec![2, 4, 8]);
    assert!(lambda1_estimate(&ds).unwrap().consistent_with(2.0));
    let ss = build_model(&FamilyParams::CremonaComposite { factors: vec![FactorSpec::Sigma, FactorSpec::Sigma] }).unwrap();
    assert_eq!(symbolic_degree_sequence(&sigma(), 2).unwrap().degrees, vec![2, 1]);
    assert_eq!(symbolic_degree_sequence(&ss, 1).unwrap().degrees, vec![1]);
}

#[test]
fn torus_example() {
    let m = torus([[0, 1], [2, 2]]);
    assert_eq!(m.lambda2, 4);
    let s3 = 3f64.sqrt();
    let r = spectral_analysis(&m.pullback_rat(), m.lambda2, &m.lattice, 1e-9).unwrap();
    assert!((r.r1 - (4.0 + 2.0 * s3)).abs() < 1e-9);
    let ly = lyapunov_exponents(&m, 10_000, 4, 2024).unwrap();
    assert!((ly.exact.chi_plus - (1.0 + s3).ln()).abs() < 1e-12);
    assert!((ly.exact.chi_minus - (s3 - 1.0).ln()).abs() < 1e-12);
    assert!(ly.deviation < 1e-3);
    assert!(exponent_sum_check(&ly.exact, 4).pass && exponent_sum_check(&ly.monte_carlo, 4).pass);
    assert!(haar_invariance_check(&m, 3).unwrap().bijective);
    let c = contraction_report(&m, 1e-9, 1e-8, 10).unwrap();
    assert!(c.zero_case && !c.integrality.lambda1_integer);
    let ZeroClassCheck::Checked { observed, .. } = c.pushforward_eigen_check else { panic!() };
    assert!((observed - 4.0 / (4.0 + 2.0 * s3)).abs() < 1e-8);
}

#[test]
fn integrality_examples() {
    let sq = power(2);
    let r = integrality_check(&sq.pullback_rat().char_poly(), 2.0, 4);
    assert!(r.lambda1_integer && r.ratio_integer);
    let sec = secant_deg(3);
    let r1 = 1.0 + 3f64.sqrt();
    assert!(!integrality_check(&sec.pullback_rat().char_poly(), r1, 2).lambda1_integer);
}
