//! Power maps `[x^d : y^d : z^d]` of `P^2`. Degree one is the identity.

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::MPoly;

use super::lift::PlaneLift;
use super::point::SurfacePoint;
use super::Preimage;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerMap {
    pub degree: u32,
    pub lift: PlaneLift,
}

impl PowerMap {
    pub fn new(degree: u32) -> Result<Self> {
        if degree == 0 {
            return Err(Error::ModelRejected("degree must be positive".into()));
        }
        let mono = |v: usize| {
            let mut e = [0u32; 3];
            e[v] = degree;
            MPoly::monomial(BigInt::from(1), e)
        };
        Ok(PowerMap { degree, lift: PlaneLift::from_exact([mono(0), mono(1), mono(2)])? })
    }

    /// `d`-th roots of the two non-pivot coordinates, pivot fixed to one.
    pub fn preimages(&self, p: &SurfacePoint) -> Result<Vec<Preimage>> {
        let SurfacePoint::Proj(v) = p.normalized() else {
            return Err(Error::InvalidInput("expected a point of P^2".into()));
        };
        let d = self.degree;
        let pivot = v.iter().position(|z| *z == C::new(1.0, 0.0)).expect("normalized");
        let others: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
        let roots = |w: C| -> Vec<(C, usize)> {
            if w.norm() == 0.0 {
                return vec![(C::default(), d as usize)];
            }
            let r = w.powf(1.0 / d as f64);
            (0..d)
                .map(|k| (r * C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64), 1))
                .collect()
        };
        let mut out = Vec::new();
        for (u, mu) in roots(v[others[0]]) {
            for (w, mw) in roots(v[others[1]]) {
                let mut q = [C::new(1.0, 0.0); 3];
                q[others[0]] = u;
                q[others[1]] = w;
                out.push(Preimage {
                    point: SurfacePoint::Proj(q).normalized(),
                    multiplicity: mu * mw,
                });
            }
        }
        Ok(out)
    }
}
