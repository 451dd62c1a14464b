//! Polynomial skew maps `(x, y) -> (y, Q(x, y))` of the plane, extended to `P^2`.

use num_complex::Complex64;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::poly::roots::{effective_degree, find_roots, RootOptions};
use crate::poly::{f64_to_rat, MPoly};

use super::lift::{homogenize_affine_map, CPoly, PlaneLift};
use super::point::SurfacePoint;
use super::Preimage;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct SkewMap {
    /// `q[i][j]` is the coefficient of `x^i y^j`.
    pub q: Vec<Vec<C>>,
    pub degree: usize,
    /// Highest power of `x` in `Q`; this is the topological degree.
    pub x_degree: usize,
    pub lift: PlaneLift,
}

fn nonzero(c: &C) -> bool {
    c.norm() != 0.0
}

impl SkewMap {
    pub fn new(q: Vec<Vec<C>>) -> Result<Self> {
        let coeff = |i: usize, j: usize| q.get(i).and_then(|r| r.get(j)).copied().unwrap_or_default();
        let mut degree = 0;
        let mut x_degree = 0;
        let mut any = false;
        for (i, row) in q.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if nonzero(c) {
                    any = true;
                    degree = degree.max(i + j);
                    x_degree = x_degree.max(i);
                }
            }
        }
        if !any || degree < 2 {
            return Err(Error::ModelRejected("Q must have degree at least 2".into()));
        }
        if !nonzero(&coeff(0, degree)) {
            return Err(Error::ModelRejected(format!(
                "the coefficient of y^{degree} in Q must be nonzero"
            )));
        }
        if nonzero(&coeff(degree, 0)) {
            return Err(Error::ModelRejected(format!(
                "the coefficient of x^{degree} in Q must vanish"
            )));
        }
        if x_degree == 0 {
            return Err(Error::ModelRejected(
                "Q must depend on x, otherwise the map is not dominant".into(),
            ));
        }

        let is_real = q.iter().flatten().all(|c| c.im == 0.0);
        let exact = if is_real {
            let rq: Vec<Vec<BigRational>> =
                q.iter().map(|r| r.iter().map(|c| f64_to_rat(c.re)).collect()).collect();
            let y_only = vec![vec![f64_to_rat(0.0), f64_to_rat(1.0)]];
            Some(homogenize_affine_map([&y_only, &rq])?)
        } else {
            None
        };
        let lift = match exact {
            Some(ex) => PlaneLift::from_exact(ex)?,
            None => {
                let d = degree as u32;
                let mut f1 = Vec::new();
                for (i, row) in q.iter().enumerate() {
                    for (j, c) in row.iter().enumerate() {
                        if nonzero(c) {
                            f1.push(([i as u32, j as u32, d - (i + j) as u32], *c));
                        }
                    }
                }
                let one = C::new(1.0, 0.0);
                PlaneLift {
                    degree: d,
                    complex: [
                        CPoly { terms: vec![([0, 1, d - 1], one)] },
                        CPoly { terms: f1 },
                        CPoly { terms: vec![([0, 0, d], one)] },
                    ],
                    exact: None,
                }
            }
        };
        Ok(SkewMap { q, degree, x_degree, lift })
    }

    pub fn exact_lift(&self) -> Option<&[MPoly; 3]> {
        self.lift.exact.as_ref()
    }

    /// Coefficients in `x` of `Q(x, a) - b`.
    fn fiber_poly(&self, a: C, b: C) -> Vec<C> {
        let mut out = vec![C::default(); self.x_degree + 1];
        for (i, row) in self.q.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                out[i] += c * a.powu(j as u32);
            }
        }
        out[0] -= b;
        out
    }

    /// Solutions of `f(x, y) = (a, b)`: `y = a` and `Q(x, a) = b`.
    pub fn preimages(&self, p: &SurfacePoint, opts: RootOptions) -> Result<Vec<Preimage>> {
        let (a, b) = p.to_affine().ok_or_else(|| {
            Error::Precondition("points on the line at infinity have no affine preimages".into())
        })?;
        let coeffs = self.fiber_poly(a, b);
        // The leading coefficient can only cancel against its own terms; the
        // constant term grows along backward orbits and says nothing here.
        let lead_scale: f64 = self.q[self.x_degree]
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm() * a.norm().powi(j as i32))
            .sum();
        if coeffs[self.x_degree].norm() <= 1e-13 * lead_scale {
            return Err(Error::DegreeDrop {
                expected: self.x_degree,
                got: effective_degree(&coeffs[..self.x_degree], 1e-13).unwrap_or(0),
            });
        }
        let roots = find_roots(&coeffs, opts)?;
        Ok(roots
            .into_iter()
            .map(|r| Preimage {
                point: SurfacePoint::affine(r.value, a),
                multiplicity: r.multiplicity,
            })
            .collect())
    }

    /// `|det Df|^2 = |dQ/dx|^2` in the affine chart.
    pub fn jacobian(&self, x: C, y: C) -> C {
        let mut dq = C::default();
        for (i, row) in self.q.iter().enumerate().skip(1) {
            for (j, c) in row.iter().enumerate() {
                dq += c * i as f64 * x.powu(i as u32 - 1) * y.powu(j as u32);
            }
        }
        -dq
    }

    /// Upper bound for the pushforward potential of the affine chart
    /// potential `u = (1/2) log(1 + |z|^2)`:
    /// `lambda1^{-1} f_* u - u <= (log((S + 1) / |k|) + (d_x / 2) log 3) / d`,
    /// where `S` is the sum of coefficient moduli and `k` the coefficient of
    /// `x^{d_x}`. Valid only when `k` does not involve `y`.
    pub fn gamma_minus_bound(&self) -> Option<f64> {
        let lead_row = &self.q[self.x_degree];
        if lead_row.iter().skip(1).any(nonzero) {
            return None;
        }
        let k = lead_row[0].norm();
        let s: f64 = self.q.iter().flatten().map(|c| c.norm()).sum();
        let d = self.degree as f64;
        Some(((s + 1.0) / k).ln() / d + (self.x_degree as f64) * 3f64.ln() / (2.0 * d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    /// `Q = y^2 + x`
    fn q_y2_x() -> Vec<Vec<C>> {
        vec![vec![c(0.0), c(0.0), c(1.0)], vec![c(1.0)]]
    }

    #[test]
    fn invariants() {
        let m = SkewMap::new(q_y2_x()).unwrap();
        assert_eq!((m.degree, m.x_degree), (2, 1));
        // Q = y^2 + x^2 has a nonzero x^d coefficient.
        let bad = vec![vec![c(0.0), c(0.0), c(1.0)], vec![], vec![c(1.0)]];
        assert!(matches!(SkewMap::new(bad), Err(Error::ModelRejected(_))));
        // Q = x^2 y: no y^d term.
        let bad = vec![vec![], vec![], vec![c(0.0), c(1.0)]];
        assert!(matches!(SkewMap::new(bad), Err(Error::ModelRejected(_))));
    }

    #[test]
    fn unique_preimage_of_linear_fiber() {
        let m = SkewMap::new(q_y2_x()).unwrap();
        let (a, b) = (C::new(0.3, -1.2), C::new(2.0, 0.7));
        let pre = m.preimages(&SurfacePoint::affine(a, b), RootOptions::default()).unwrap();
        assert_eq!(pre.len(), 1);
        let expected = SurfacePoint::affine(b - a * a, a);
        assert!(pre[0].point.dist(&expected) < 1e-12);
    }

    #[test]
    fn lift_is_homogeneous() {
        let m = SkewMap::new(q_y2_x()).unwrap();
        let ex = m.exact_lift().unwrap();
        assert_eq!(ex[0].to_string(), "yz");
        assert_eq!(ex[1].to_string(), "xz + y^2");
        assert_eq!(ex[2].to_string(), "z^2");
    }

    #[test]
    fn gamma_minus_bound_needs_constant_leading_coefficient() {
        assert!(SkewMap::new(q_y2_x()).unwrap().gamma_minus_bound().is_some());
        // Q = y^3 + x y: x coefficient is y.
        let q = vec![vec![c(0.0), c(0.0), c(0.0), c(1.0)], vec![c(0.0), c(1.0)]];
        assert!(SkewMap::new(q).unwrap().gamma_minus_bound().is_none());
    }
}
