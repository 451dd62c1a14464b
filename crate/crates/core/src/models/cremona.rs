//! Birational maps of `P^2` written as compositions of the standard quadratic
//! involution `sigma = [yz : xz : xy]` and invertible integer linear maps.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::poly::MPoly;

use super::lift::{compose_lifts, reduce_lift, PlaneLift};
use super::point::{ExactPoint, SurfacePoint};
use super::torus::{integer_adjugate, integer_det};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CremonaFactor {
    Sigma,
    Linear(IntMatrix),
}

impl CremonaFactor {
    pub fn lift(&self) -> [MPoly; 3] {
        let v = MPoly::var;
        match self {
            CremonaFactor::Sigma => [v(1).mul(&v(2)), v(0).mul(&v(2)), v(0).mul(&v(1))],
            CremonaFactor::Linear(l) => [0, 1, 2].map(|i| {
                MPoly::from_terms((0..3).map(|j| {
                    let mut e = [0u32; 3];
                    e[j] = 1;
                    (e, BigInt::from(l[i][j]))
                }))
            }),
        }
    }

    fn inverse(&self) -> CremonaFactor {
        match self {
            CremonaFactor::Sigma => CremonaFactor::Sigma,
            CremonaFactor::Linear(l) => CremonaFactor::Linear(integer_adjugate(l)),
        }
    }

    fn indeterminacy(&self) -> Vec<ExactPoint> {
        match self {
            CremonaFactor::Sigma => vec![
                ExactPoint::proj_ints(1, 0, 0),
                ExactPoint::proj_ints(0, 1, 0),
                ExactPoint::proj_ints(0, 0, 1),
            ],
            CremonaFactor::Linear(_) => Vec::new(),
        }
    }
}

/// Reduced lift of `factors[n-1] o ... o factors[0]`.
pub fn composite_lift(factors: &[CremonaFactor]) -> [MPoly; 3] {
    let mut acc = [MPoly::var(0), MPoly::var(1), MPoly::var(2)];
    for f in factors {
        acc = reduce_lift(&compose_lifts(&f.lift(), &acc));
    }
    acc
}

fn inverse_factors(factors: &[CremonaFactor]) -> Vec<CremonaFactor> {
    factors.iter().rev().map(CremonaFactor::inverse).collect()
}

fn vanishes(lift: &[MPoly; 3], p: &ExactPoint) -> bool {
    let ExactPoint::Proj(v) = p else { return false };
    lift.iter().all(|f| num_traits::Zero::is_zero(&f.eval_rational(v)))
}

/// Candidate indeterminacy points of the composite: those of the first
/// factor, and preimages under each prefix of the later factors' points.
/// Only candidates at which the reduced lift vanishes exactly are kept.
fn indeterminacy_candidates(factors: &[CremonaFactor]) -> Result<Vec<ExactPoint>> {
    let mut cands: Vec<ExactPoint> = Vec::new();
    for k in 0..factors.len() {
        let prefix_inv = PlaneLift::from_exact(composite_lift(&inverse_factors(&factors[..k])))?;
        for q in factors[k].indeterminacy() {
            if let Ok(p) = prefix_inv.eval_exact(&q) {
                if !cands.contains(&p) {
                    cands.push(p);
                }
            }
        }
    }
    let full = composite_lift(factors);
    Ok(cands.into_iter().filter(|p| vanishes(&full, p)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CremonaMap {
    pub factors: Vec<CremonaFactor>,
    pub lift: PlaneLift,
    pub inverse_lift: PlaneLift,
    pub indeterminacy: Vec<ExactPoint>,
    /// Indeterminacy of the inverse, which is where the contracted curves go.
    pub inverse_indeterminacy: Vec<ExactPoint>,
    pub sigma_count: usize,
}

impl CremonaMap {
    pub fn new(factors: Vec<CremonaFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ModelRejected("at least one factor is required".into()));
        }
        for f in &factors {
            if let CremonaFactor::Linear(l) = f {
                if l.len() != 3 || l.iter().any(|r| r.len() != 3) {
                    return Err(Error::ModelRejected("linear factors must be 3x3".into()));
                }
                if integer_det(l) == 0 {
                    return Err(Error::ModelRejected("linear factor is singular".into()));
                }
            }
        }
        let inv = inverse_factors(&factors);
        Ok(CremonaMap {
            lift: PlaneLift::from_exact(composite_lift(&factors))?,
            inverse_lift: PlaneLift::from_exact(composite_lift(&inv))?,
            indeterminacy: indeterminacy_candidates(&factors)?,
            inverse_indeterminacy: indeterminacy_candidates(&inv)?,
            sigma_count: factors.iter().filter(|f| **f == CremonaFactor::Sigma).count(),
            factors,
        })
    }

    pub fn degree(&self) -> u32 {
        self.lift.degree
    }

    pub fn preimage(&self, p: &SurfacePoint, tol: f64) -> Result<SurfacePoint> {
        self.inverse_lift.eval(p, tol)
    }
}
