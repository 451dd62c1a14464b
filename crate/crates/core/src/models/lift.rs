//! Homogeneous lifts `[F0 : F1 : F2]` of plane rational maps.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::multivariate::Exp;
use crate::poly::MPoly;

use super::point::{ExactPoint, SurfacePoint};

type C = Complex64;

/// Homogeneous polynomial with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    pub terms: Vec<(Exp, C)>,
}

impl CPoly {
    pub fn from_mpoly(p: &MPoly) -> Self {
        use num_traits::ToPrimitive;
        CPoly {
            terms: p
                .terms()
                .map(|(e, c)| (*e, C::new(c.to_f64().unwrap_or(f64::NAN), 0.0)))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[C; 3]) -> C {
        self.terms
            .iter()
            .map(|(e, c)| c * x[0].powu(e[0]) * x[1].powu(e[1]) * x[2].powu(e[2]))
            .sum()
    }

    pub fn partial(&self, v: usize) -> CPoly {
        CPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[v] > 0)
                .map(|(e, c)| {
                    let mut d = *e;
                    d[v] -= 1;
                    (d, c * e[v] as f64)
                })
                .collect(),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneLift {
    pub degree: u32,
    pub complex: [CPoly; 3],
    /// Integer lift, available when every coefficient is rational.
    pub exact: Option<[MPoly; 3]>,
}

impl PlaneLift {
    pub fn from_exact(exact: [MPoly; 3]) -> Result<Self> {
        let degree = exact
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .ok_or_else(|| Error::InvalidInput("all lift components vanish".into()))?;
        for p in &exact {
            if !p.is_zero() && (!p.is_homogeneous() || p.degree() != Some(degree)) {
                return Err(Error::InvalidInput(
                    "lift components must be homogeneous of a common degree".into(),
                ));
            }
        }
        let complex = [
            CPoly::from_mpoly(&exact[0]),
            CPoly::from_mpoly(&exact[1]),
            CPoly::from_mpoly(&exact[2]),
        ];
        Ok(PlaneLift { degree, complex, exact: Some(exact) })
    }

    /// Bound on `|F_i(p)|` over unit sup-norm `p`.
    pub fn scale(&self) -> f64 {
        self.complex.iter().map(CPoly::l1_norm).fold(0.0, f64::max)
    }

    pub fn eval_raw(&self, p: &[C; 3]) -> [C; 3] {
        [self.complex[0].eval(p), self.complex[1].eval(p), self.complex[2].eval(p)]
    }

    /// Image of a normalized point, or an indeterminacy error when every
    /// component is below `tol` relative to the coefficient scale.
    pub fn eval(&self, p: &SurfacePoint, tol: f64) -> Result<SurfacePoint> {
        let SurfacePoint::Proj(v) = p.normalized() else {
            return Err(Error::InvalidInput("expected a point of P^2".into()));
        };
        let img = self.eval_raw(&v);
        let m = img.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m <= tol * self.scale() {
            return Err(Error::Indeterminate(format!("all components vanish at {v:?}")));
        }
        Ok(SurfacePoint::Proj(img).normalized())
    }

    pub fn eval_exact(&self, p: &ExactPoint) -> Result<ExactPoint> {
        let exact = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::Unsupported("lift has non-rational coefficients".into()))?;
        let ExactPoint::Proj(v) = p else {
            return Err(Error::InvalidInput("expected a point of P^2".into()));
        };
        let img = [exact[0].eval_rational(v), exact[1].eval_rational(v), exact[2].eval_rational(v)];
        if img.iter().all(|x| x.is_zero()) {
            return Err(Error::Indeterminate(format!("all components vanish at {p}")));
        }
        Ok(ExactPoint::proj(img).expect("nonzero"))
    }

    /// Jacobian determinant of the affine map `(x, y) -> (F0/F2, F1/F2)` at
    /// `z = 1`.
    pub fn affine_jacobian(&self, x: C, y: C) -> Result<C> {
        let p = [x, y, C::new(1.0, 0.0)];
        let f = self.eval_raw(&p);
        if f[2].norm() == 0.0 {
            return Err(Error::Indeterminate("image leaves the affine chart".into()));
        }
        let d = |i: usize, v: usize| self.complex[i].partial(v).eval(&p);
        // d(Fi/F2)/dv = (dFi F2 - Fi dF2) / F2^2
        let q = |i: usize, v: usize| (d(i, v) * f[2] - f[i] * d(2, v)) / (f[2] * f[2]);
        Ok(q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0))
    }
}

/// Integer lift `[F0 : F1 : F2]` of a polynomial self-map of `C^2` given by
/// two bivariate polynomials with rational coefficients `c[i][j] x^i y^j`.
pub fn homogenize_affine_map(
    components: [&[Vec<BigRational>]; 2],
) -> Result<[MPoly; 3]> {
    use num_integer::Integer;
    let deg_of = |c: &[Vec<BigRational>]| {
        let mut d = None;
        for (i, row) in c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    d = Some(d.map_or(i + j, |m: usize| m.max(i + j)));
                }
            }
        }
        d
    };
    let d = components
        .iter()
        .filter_map(|c| deg_of(c))
        .max()
        .ok_or_else(|| Error::InvalidInput("map components vanish".into()))?;
    let lcm = components
        .iter()
        .flat_map(|c| c.iter().flatten())
        .fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()));
    let hom = |c: &[Vec<BigRational>]| {
        MPoly::from_terms(c.iter().enumerate().flat_map(|(i, row)| {
            let lcm = lcm.clone();
            row.iter().enumerate().map(move |(j, v)| {
                let n = (v * BigRational::from_integer(lcm.clone())).to_integer();
                ([i as u32, j as u32, (d - i - j) as u32], n)
            })
        }))
    };
    Ok([
        hom(components[0]),
        hom(components[1]),
        MPoly::monomial(lcm.clone(), [0, 0, d as u32]),
    ])
}

/// `outer(inner)`: the lift of `f_outer o f_inner` before cancellation.
pub fn compose_lifts(outer: &[MPoly; 3], inner: &[MPoly; 3]) -> [MPoly; 3] {
    [outer[0].compose(inner), outer[1].compose(inner), outer[2].compose(inner)]
}

/// Divides the three components by their polynomial gcd and common integer
/// content, and makes the leading nonzero component's leading coefficient
/// positive.
pub fn reduce_lift(f: &[MPoly; 3]) -> [MPoly; 3] {
    let g = MPoly::gcd_many(f);
    let mut out = f.clone();
    if !g.is_zero() && g.degree() != Some(0) {
        for p in out.iter_mut() {
            *p = p.exact_div(&g).expect("gcd divides every component");
        }
    }
    use num_integer::Integer;
    let content = out.iter().fold(BigInt::zero(), |acc, p| acc.gcd(&p.integer_content()));
    if !content.is_zero() && content != BigInt::from(1) {
        for p in out.iter_mut() {
            *p = p.exact_div(&MPoly::constant(content.clone())).expect("content divides");
        }
    }
    let negative = out
        .iter()
        .find(|p| !p.is_zero())
        .and_then(|p| p.terms().last().map(|(_, c)| c.sign() == num_bigint::Sign::Minus))
        .unwrap_or(false);
    if negative {
        for p in out.iter_mut() {
            *p = p.neg();
        }
    }
    out
}
