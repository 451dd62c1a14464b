//! The zero self-intersection case: self-intersections of the invariant
//! classes, the pushforward eigenvalue test, integrality obstructions, the
//! span of exceptional image classes and spurious indeterminacy points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{adjoint_pushforward, invariant_classes, CohomClass, IntersectionLattice, InvariantClasses};
use crate::linalg::RatMatrix;
use crate::models::{IndeterminacyEntry, SurfaceMapModel, SurfacePoint};
use crate::poly::RatPoly;

/// Default tolerance for zero tests on floats derived from exact matrices.
pub const ZERO_TOL: f64 = 1e-9;
/// Default tolerance of the pushforward eigenvalue test.
pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SelfIntersections {
    pub alpha_plus_sq: f64,
    pub alpha_minus_sq: f64,
    pub classes: InvariantClasses,
}

pub fn self_intersections(m: &SurfaceMapModel, tol: f64) -> Result<SelfIntersections> {
    let classes = invariant_classes(&m.pullback_rat(), m.lambda2, &m.lattice, &m.lattice.kahler_class(), tol)?;
    Ok(SelfIntersections {
        alpha_plus_sq: m.lattice.pair(&classes.alpha_plus, &classes.alpha_plus)?,
        alpha_minus_sq: m.lattice.pair(&classes.alpha_minus, &classes.alpha_minus)?,
        classes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingStatus {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingCheck {
    pub point: SurfacePoint,
    pub image_class: Option<Vec<i64>>,
    /// `<alpha+, class of f(p)>`.
    pub pairing: Option<f64>,
    /// `Pass` when the pairing vanishes.
    pub status: PairingStatus,
}

fn pairing_checks(
    entries: &[IndeterminacyEntry],
    lattice: &IntersectionLattice,
    alpha_plus: &CohomClass,
    tol: f64,
) -> Result<Vec<PairingCheck>> {
    entries
        .iter()
        .map(|e| {
            let pairing = match &e.image_class {
                Some(c) => Some(lattice.pair(alpha_plus, &CohomClass::from_ints(c))?),
                None => None,
            };
            let status = match pairing {
                None => PairingStatus::Unknown,
                Some(x) if x.abs() < tol => PairingStatus::Pass,
                Some(_) => PairingStatus::Fail,
            };
            Ok(PairingCheck { point: e.point, image_class: e.image_class.clone(), pairing, status })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroClassCheck {
    NotApplicable {
        alpha_plus_sq: f64,
    },
    Checked {
        /// `lambda2 / r1`.
        expected: f64,
        /// `<f_* alpha+, omega> / <alpha+, omega>`.
        observed: f64,
        /// Max-norm of `f_* alpha+ - expected alpha+`.
        residual: f64,
        pass: bool,
        pairings: Vec<PairingCheck>,
        note: String,
    },
}

/// When `(alpha+)^2 = 0`, tests `f_* alpha+ = (lambda2 / r1) alpha+` and the
/// vanishing of `<alpha+, f(p)>` over `I_f`.
pub fn zero_class_checks(
    m: &SurfaceMapModel,
    si: &SelfIntersections,
    zero_tol: f64,
    tol: f64,
) -> Result<ZeroClassCheck> {
    if si.alpha_plus_sq.abs() >= zero_tol {
        return Ok(ZeroClassCheck::NotApplicable { alpha_plus_sq: si.alpha_plus_sq });
    }
    let alpha = &si.classes.alpha_plus;
    let push = adjoint_pushforward(&m.pullback_rat(), &m.lattice)?.to_f64();
    let a = nalgebra::DVector::from_column_slice(&alpha.coords);
    let image = CohomClass::new((&push * &a).iter().copied().collect());
    let expected = m.lambda2 as f64 / si.classes.r1;
    let omega = m.lattice.kahler_class();
    let observed = m.lattice.pair(&image, &omega)? / m.lattice.pair(alpha, &omega)?;
    let residual = image
        .coords
        .iter()
        .zip(&alpha.coords)
        .map(|(x, y)| (x - expected * y).abs())
        .fold(0.0, f64::max);
    let pairings = pairing_checks(&m.indeterminacy, &m.lattice, alpha, zero_tol)?;
    let pass = residual < tol && pairings.iter().all(|p| p.status != PairingStatus::Fail);
    let unknown = pairings.iter().filter(|p| p.status == PairingStatus::Unknown).count();
    let mut note = "conditions on (alpha+)^2, f_* alpha+ and <alpha+, f(p)> are checked; the condition over all modifications has no finite certificate and is not checked".to_string();
    if unknown > 0 {
        note.push_str(&format!("; {unknown} indeterminacy points have unknown image classes"));
    }
    Ok(ZeroClassCheck::Checked { expected, observed, residual, pass, pairings, note })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Integrality {
    pub lambda1_integer: bool,
    pub ratio_integer: bool,
    /// The exact value of `lambda1` when it is an integer.
    pub lambda1_exact: Option<i64>,
    pub obstruction: Option<String>,
}

/// Decides whether `r1` and `lambda2 / r1` are integers. The characteristic
/// polynomial is monic with integer coefficients, so a rational root is an
/// integer and `r1` is rational iff the integer nearest to it is an exact
/// root. The float `r1` only locates the candidate.
pub fn integrality_check(cp: &RatPoly, r1: f64, lambda2: u64) -> Integrality {
    let k = r1.round();
    let lambda1_exact = (k.abs() < 1e15)
        .then_some(k as i64)
        .filter(|&k| cp.eval(&BigRational::from_integer(BigInt::from(k))).is_zero());
    let ratio_integer = lambda1_exact.is_some_and(|k| k != 0 && (lambda2 as i64) % k == 0);
    let obstruction = match (lambda1_exact, ratio_integer) {
        (Some(_), true) => None,
        (None, _) => Some(format!(
            "lambda1 = {r1} is irrational, so alpha+ is not the class of an effective divisor with zero self-intersection"
        )),
        (Some(k), false) => Some(format!(
            "lambda2 / lambda1 = {lambda2}/{k} is not an integer, so alpha+ is not the class of an effective divisor with zero self-intersection"
        )),
    };
    Integrality { lambda1_integer: lambda1_exact.is_some(), ratio_integer, lambda1_exact, obstruction }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    NotApplicable,
    NegativeDefinite,
    NotNegativeDefinite,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitClosure {
    /// Reduced row echelon basis of the stabilized span.
    pub classes: Vec<CohomClass>,
    #[serde(skip)]
    pub basis_exact: Vec<Vec<BigRational>>,
    pub iterations: usize,
    pub stabilized: bool,
    pub full_rank: bool,
    pub gram_negative_definite: Definiteness,
    /// Image classes that were not declared and could not be seeded.
    pub unknown_seeds: usize,
    pub note: Option<String>,
}

fn rref_rows(rows: Vec<Vec<BigRational>>, rank: usize) -> Vec<Vec<BigRational>> {
    if rows.is_empty() {
        return rows;
    }
    debug_assert!(rows.iter().all(|r| r.len() == rank));
    RatMatrix::new(rows).rref().0.rows().to_vec()
}

/// Smallest subspace containing `seeds` and stable under `push` and `pull`,
/// with the exact Sylvester test of the restricted Gram matrix.
pub fn span_closure(
    seeds: &[Vec<BigRational>],
    lattice: &IntersectionLattice,
    push: &RatMatrix,
    pull: &RatMatrix,
    cap: usize,
) -> Result<OrbitClosure> {
    for s in seeds {
        if s.len() != lattice.rank {
            return Err(Error::DimensionMismatch { expected: lattice.rank, got: s.len() });
        }
    }
    let mut basis = rref_rows(seeds.iter().filter(|s| s.iter().any(|x| !x.is_zero())).cloned().collect(), lattice.rank);
    let mut iterations = 0;
    let mut stabilized = basis.is_empty();
    while !stabilized && iterations < cap {
        iterations += 1;
        let mut rows = basis.clone();
        for b in &basis {
            rows.push(push.apply(b));
            rows.push(pull.apply(b));
        }
        let next = rref_rows(rows, lattice.rank);
        stabilized = next.len() == basis.len();
        basis = next;
    }
    let full_rank = basis.len() == lattice.rank;
    let gram_negative_definite = if basis.is_empty() {
        Definiteness::NotApplicable
    } else {
        let b = RatMatrix::new(basis.clone());
        let restricted = b.mul(&lattice.gram_rat()).mul(&b.transpose());
        if restricted.is_negative_definite() {
            Definiteness::NegativeDefinite
        } else {
            Definiteness::NotNegativeDefinite
        }
    };
    let note = if full_rank {
        Some("the span is the whole lattice, where the pairing has a positive direction, so it cannot be negative definite".into())
    } else if !stabilized {
        Some(format!("the span did not stabilize within {cap} iterations"))
    } else {
        None
    };
    Ok(OrbitClosure {
        classes: basis
            .iter()
            .map(|r| CohomClass::new(r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()))
            .collect(),
        basis_exact: basis,
        iterations,
        stabilized,
        full_rank,
        gram_negative_definite,
        unknown_seeds: 0,
        note,
    })
}

/// Closure of the declared classes of `f(I_f)` under both matrix actions.
pub fn exceptional_orbit_closure(m: &SurfaceMapModel, cap: usize) -> Result<OrbitClosure> {
    let pull = m.pullback_rat();
    let push = adjoint_pushforward(&pull, &m.lattice)?;
    let seeds: Vec<Vec<BigRational>> = m
        .indeterminacy
        .iter()
        .filter_map(|e| e.image_class.as_ref())
        .map(|c| c.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let unknown = m.indeterminacy.iter().filter(|e| e.image_class.is_none()).count();
    let mut out = span_closure(&seeds, &m.lattice, &push, &pull, cap)?;
    out.unknown_seeds = unknown;
    if unknown > 0 && out.note.is_none() {
        out.note = Some(format!("{unknown} image classes are unknown and were left out of the span"));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpuriousStatus {
    Spurious,
    NotSpurious,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpuriousEntry {
    pub point: SurfacePoint,
    pub pairing: Option<f64>,
    pub status: SpuriousStatus,
}

/// Classifies each `p` in `I_f` by whether `<alpha+, f(p)>` vanishes.
pub fn spurious_points(
    entries: &[IndeterminacyEntry],
    lattice: &IntersectionLattice,
    alpha_plus: &CohomClass,
    tol: f64,
) -> Result<Vec<SpuriousEntry>> {
    Ok(pairing_checks(entries, lattice, alpha_plus, tol)?
        .into_iter()
        .map(|c| SpuriousEntry {
            point: c.point,
            pairing: c.pairing,
            status: match c.status {
                PairingStatus::Pass => SpuriousStatus::Spurious,
                PairingStatus::Fail => SpuriousStatus::NotSpurious,
                PairingStatus::Unknown => SpuriousStatus::Unknown,
            },
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub alpha_plus_sq: f64,
    pub alpha_minus_sq: f64,
    pub zero_case: bool,
    pub pushforward_eigen_check: ZeroClassCheck,
    pub integrality: Integrality,
    pub orbit_closure: OrbitClosure,
    pub spurious: Vec<SpuriousEntry>,
}

/// All of the above. `zero_tol` decides vanishing self-intersections and
/// pairings, `eigen_tol` bounds the pushforward eigenvalue residual.
pub fn contraction_report(
    m: &SurfaceMapModel,
    zero_tol: f64,
    eigen_tol: f64,
    cap: usize,
) -> Result<ContractionReport> {
    let si = self_intersections(m, zero_tol)?;
    let cp = m.pullback_rat().char_poly();
    Ok(ContractionReport {
        alpha_plus_sq: si.alpha_plus_sq,
        alpha_minus_sq: si.alpha_minus_sq,
        zero_case: si.alpha_plus_sq.abs() < zero_tol,
        pushforward_eigen_check: zero_class_checks(m, &si, zero_tol, eigen_tol)?,
        integrality: integrality_check(&cp, si.classes.r1, m.lambda2),
        orbit_closure: exceptional_orbit_closure(m, cap)?,
        spurious: spurious_points(&m.indeterminacy, &m.lattice, &si.classes.alpha_plus, zero_tol)?,
    })
}
