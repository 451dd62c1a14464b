//! Algebraic stability up to a horizon, and exact degree sequences of iterates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::lift::{compose_lifts, reduce_lift};
use crate::models::{ExactPoint, SurfaceMapModel, SurfacePoint};
use crate::poly::MPoly;

/// Cap on the total number of monomials in a composed lift.
pub const MONOMIAL_BUDGET: usize = 1_000_000;
/// Cap on the degree of a composed lift.
pub const DEGREE_BUDGET: u32 = 200;
/// Exact orbits switch to floating point past this many bits.
const EXACT_BITS_BUDGET: u64 = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// No orbit met the indeterminacy set within the horizon. Not a proof of
    /// stability.
    NoObstructionUpTo { horizon: usize },
    CollisionAt { step: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitEntry {
    /// Index of the starting point in `I_f^-`.
    pub orbit: usize,
    pub n: usize,
    pub point: SurfacePoint,
    pub exact: Option<String>,
    pub hit_indeterminacy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub horizon: usize,
    pub tolerance: f64,
    pub orbit_log: Vec<OrbitEntry>,
    pub verdict: Verdict,
    pub note: String,
}

fn exact_bits(p: &ExactPoint) -> u64 {
    let bits = |r: &num_rational::BigRational| r.numer().bits() + r.denom().bits();
    match p {
        ExactPoint::Proj(v) => v.iter().map(bits).sum(),
        ExactPoint::BiProj(a, b) => a.iter().chain(b).map(bits).sum(),
    }
}

/// Follows every point of `I_f^- = f(E_f)` for `n <= horizon` steps and
/// tests membership in `I_f`, exactly while the orbit stays rational and
/// small, with relative tolerance `tol` otherwise.
pub fn check_one_stability(m: &SurfaceMapModel, horizon: usize, tol: f64) -> Result<StabilityReport> {
    let mut log = Vec::new();
    let mut first_hit: Option<usize> = None;
    for (k, (p0, e0)) in m.inverse_indeterminacy().into_iter().enumerate() {
        let mut p = p0;
        let mut exact = e0;
        for n in 0..=horizon {
            if exact.as_ref().is_some_and(|e| exact_bits(e) > EXACT_BITS_BUDGET) {
                exact = None;
            }
            let hit = match &exact {
                Some(e) => m.is_indeterminate_exact(e),
                None => m.is_indeterminate(&p, tol),
            };
            log.push(OrbitEntry {
                orbit: k,
                n,
                point: p,
                exact: exact.as_ref().map(|e| e.to_string()),
                hit_indeterminacy: hit,
            });
            if hit {
                first_hit = Some(first_hit.map_or(n, |h| h.min(n)));
                break;
            }
            if n == horizon {
                break;
            }
            match &exact {
                Some(e) => {
                    let next = m.evaluate_exact(e)?;
                    p = next.to_float();
                    exact = Some(next);
                }
                None => p = m.evaluate_tol(&p, tol)?,
            }
            if !p.is_finite() {
                return Err(Error::Resource {
                    step: n + 1,
                    what: "orbit left the floating-point range".into(),
                });
            }
        }
    }
    let verdict = match first_hit {
        Some(step) => Verdict::CollisionAt { step },
        None => Verdict::NoObstructionUpTo { horizon },
    };
    let note = match verdict {
        Verdict::NoObstructionUpTo { horizon } => format!(
            "no forward orbit of f(E_f) meets I_f within {horizon} steps; this does not certify stability for all n, and deciding it in general is an open problem"
        ),
        Verdict::CollisionAt { step } => {
            format!("an orbit of f(E_f) lands in I_f after {step} steps, so f is not 1-stable")
        }
    };
    Ok(StabilityReport { horizon, tolerance: tol, orbit_log: log, verdict, note })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeSequence {
    /// `degrees[n-1] = deg f^n`.
    pub degrees: Vec<u32>,
    pub symbolic: bool,
}

/// Degrees of `f, f^2, ..., f^{n_max}` from exact composition of the
/// homogeneous lift followed by removal of the common factor.
pub fn symbolic_degree_sequence(m: &SurfaceMapModel, n_max: usize) -> Result<DegreeSequence> {
    let lift = m.exact_lift().ok_or_else(|| {
        Error::Unsupported(format!(
            "the {} family has no rational homogeneous lift on P^2",
            m.tag()
        ))
    })?;
    lift_degree_sequence(lift, n_max)
}

pub fn lift_degree_sequence(lift: &[MPoly; 3], n_max: usize) -> Result<DegreeSequence> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let base = reduce_lift(lift);
    let d1 = base.iter().filter_map(MPoly::degree).max().unwrap_or(0);
    let mut degrees = vec![d1];
    let mut cur = base.clone();
    for step in 2..=n_max {
        let prev = *degrees.last().expect("nonempty");
        if d1 * prev > DEGREE_BUDGET {
            return Err(Error::Resource {
                step,
                what: format!("composed degree {} exceeds {DEGREE_BUDGET}", d1 * prev),
            });
        }
        let composed = compose_lifts(&base, &cur);
        let terms: usize = composed.iter().map(MPoly::num_terms).sum();
        if terms > MONOMIAL_BUDGET {
            return Err(Error::Resource {
                step,
                what: format!("{terms} monomials exceed the budget of {MONOMIAL_BUDGET}"),
            });
        }
        cur = reduce_lift(&composed);
        degrees.push(cur.iter().filter_map(MPoly::degree).max().unwrap_or(0));
    }
    Ok(DegreeSequence { degrees, symbolic: true })
}

/// Degrees predicted by powers of a rank-one pullback matrix `[d]`.
pub fn matrix_degree_prediction(m: &SurfaceMapModel, n_max: usize) -> Option<Vec<u64>> {
    (m.lattice.rank == 1).then(|| {
        let d = m.pullback[0][0] as u64;
        (1..=n_max as u32).map(|n| d.pow(n)).collect()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda1Estimate {
    /// `deg f^n / deg f^{n-1}` at the last step.
    pub ratio: f64,
    /// `(deg f^n)^{1/n}` at the last step.
    pub root: f64,
}

impl Lambda1Estimate {
    /// Within 10% of the supplied spectral radius.
    pub fn consistent_with(&self, r1: f64) -> bool {
        (self.ratio - r1).abs() <= 0.1 * r1.abs()
    }
}

pub fn lambda1_estimate(ds: &DegreeSequence) -> Result<Lambda1Estimate> {
    let n = ds.degrees.len();
    if n < 2 {
        return Err(Error::InvalidInput("at least two degrees are required".into()));
    }
    let last = ds.degrees[n - 1] as f64;
    Ok(Lambda1Estimate {
        ratio: last / ds.degrees[n - 2] as f64,
        root: last.powf(1.0 / n as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::cremona::{composite_lift, CremonaFactor};
    use crate::models::{build_model, Coeff, FactorSpec, FamilyParams};
    use num_complex::Complex64;

    fn c(x: f64) -> Coeff {
        Coeff(Complex64::new(x, 0.0))
    }

    fn skew_y2_x() -> SurfaceMapModel {
        build_model(&FamilyParams::PolynomialSkew { q: vec![vec![c(0.0), c(0.0), c(1.0)], vec![c(1.0)]] })
            .unwrap()
    }

    #[test]
    fn skew_map_is_stable_up_to_horizon() {
        let r = check_one_stability(&skew_y2_x(), 50, 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::NoObstructionUpTo { horizon: 50 });
        assert_eq!(r.orbit_log.len(), 51);
        assert!(r.orbit_log.iter().all(|e| e.exact.as_deref() == Some("[0 : 1 : 0]")));
    }

    #[test]
    fn sigma_collides_immediately() {
        let m = build_model(&FamilyParams::CremonaComposite { factors: vec![FactorSpec::Sigma] }).unwrap();
        let r = check_one_stability(&m, 10, 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::CollisionAt { step: 0 });
    }

    #[test]
    fn torus_is_vacuously_stable() {
        let g = |x| crate::models::GaussCoeff(crate::models::GaussInt::new(x, 0));
        let m = build_model(&FamilyParams::TorusEndo { a: [[g(0), g(1)], [g(2), g(2)]], v: None }).unwrap();
        let r = check_one_stability(&m, 5, 1e-8).unwrap();
        assert!(r.orbit_log.is_empty());
        assert_eq!(r.verdict, Verdict::NoObstructionUpTo { horizon: 5 });
    }

    #[test]
    fn degree_sequences() {
        assert_eq!(symbolic_degree_sequence(&skew_y2_x(), 3).unwrap().degrees, vec![2, 4, 8]);
        let sq = build_model(&FamilyParams::Power { degree: 2 }).unwrap();
        assert_eq!(symbolic_degree_sequence(&sq, 4).unwrap().degrees, vec![2, 4, 8, 16]);
        let sigma = composite_lift(&[CremonaFactor::Sigma]);
        assert_eq!(lift_degree_sequence(&sigma, 2).unwrap().degrees, vec![2, 1]);
    }

    #[test]
    fn degree_budget_names_the_step() {
        let sq = build_model(&FamilyParams::Power { degree: 3 }).unwrap();
        let err = symbolic_degree_sequence(&sq, 6).unwrap_err();
        assert_eq!(err, Error::Resource { step: 5, what: "composed degree 243 exceeds 200".into() });
    }

    #[test]
    fn estimates() {
        let est = |d: &[u32]| lambda1_estimate(&DegreeSequence { degrees: d.to_vec(), symbolic: true }).unwrap();
        let e = est(&[2, 4, 8]);
        assert_eq!((e.ratio, e.root), (2.0, 2.0));
        assert!(e.consistent_with(2.0));
        let e = est(&[2, 1]);
        assert_eq!(e.ratio, 0.5);
        assert!(!e.consistent_with(2.0));
        assert!((est(&[3, 9, 27]).ratio - 3.0).abs() < 1e-15);
    }
}
