//! The secant method `(x, y) -> (y, R(x, y))` for a polynomial `P`, as a map of
//! `P^1 x P^1`, where `R(x, y) = (y P(x) - x P(y)) / (P(x) - P(y))`.
//!
//! Both numerator and denominator carry the factor `x - y`. After cancelling
//! it, `R = N / D` with
//!
//! ```text
//! N(x, y) = -p0 + sum_{k>=2} p_k x y sum_{i+j=k-2} x^i y^j
//! D(x, y) =       sum_{k>=1} p_k     sum_{i+j=k-1} x^i y^j
//! ```
//!
//! both of bidegree `(d-1, d-1)`.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::roots::{effective_degree, find_roots, RootOptions};
use crate::poly::{f64_to_rat, rat_to_f64, GaussPoly, RatPoly};

use super::point::{ExactPoint, SurfacePoint};
use super::Preimage;

type C = Complex64;

/// Bihomogeneous form `sum c[i][j] x0^i x1^(m-i) y0^j y1^(m-j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiForm<T> {
    pub m: usize,
    pub c: Vec<Vec<T>>,
}

impl BiForm<C> {
    pub fn eval(&self, x: &[C; 2], y: &[C; 2]) -> C {
        let mut acc = C::default();
        for (i, row) in self.c.iter().enumerate() {
            let xi = x[0].powu(i as u32) * x[1].powu((self.m - i) as u32);
            for (j, c) in row.iter().enumerate() {
                acc += c * xi * y[0].powu(j as u32) * y[1].powu((self.m - j) as u32);
            }
        }
        acc
    }

    /// Coefficients `a_i` of `x0^i x1^(m-i)` after fixing `y`.
    pub fn in_x(&self, y: &[C; 2]) -> Vec<C> {
        self.c
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, c)| c * y[0].powu(j as u32) * y[1].powu((self.m - j) as u32))
                    .sum()
            })
            .collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.c.iter().flatten().map(|c| c.norm()).sum()
    }

    /// Partial derivative in the affine variable `x` at `(x, y)`, `x1 = y1 = 1`.
    fn dx_affine(&self, x: C, y: C) -> C {
        let mut acc = C::default();
        for (i, row) in self.c.iter().enumerate().skip(1) {
            for (j, c) in row.iter().enumerate() {
                acc += c * i as f64 * x.powu(i as u32 - 1) * y.powu(j as u32);
            }
        }
        acc
    }
}

impl BiForm<BigRational> {
    pub fn eval(&self, x: &[BigRational; 2], y: &[BigRational; 2]) -> BigRational {
        let pw = |b: &BigRational, e: usize| num_traits::pow(b.clone(), e);
        let mut acc = BigRational::zero();
        for (i, row) in self.c.iter().enumerate() {
            let xi = pw(&x[0], i) * pw(&x[1], self.m - i);
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    acc += c * &xi * pw(&y[0], j) * pw(&y[1], self.m - j);
                }
            }
        }
        acc
    }
}

fn numerator_denominator<T: Clone + Zero + std::ops::Neg<Output = T> + std::ops::AddAssign>(
    p: &[T],
) -> (BiForm<T>, BiForm<T>) {
    let d = p.len() - 1;
    let m = d - 1;
    let mut n = vec![vec![T::zero(); m + 1]; m + 1];
    let mut den = vec![vec![T::zero(); m + 1]; m + 1];
    n[0][0] = -p[0].clone();
    for (k, pk) in p.iter().enumerate() {
        if k >= 2 {
            for i in 0..=k - 2 {
                n[i + 1][k - 2 - i + 1] += pk.clone();
            }
        }
        if k >= 1 {
            for i in 0..k {
                den[i][k - 1 - i] += pk.clone();
            }
        }
    }
    (BiForm { m, c: n }, BiForm { m, c: den })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecantMap {
    /// Coefficients of `P`, constant term first.
    pub p: Vec<C>,
    pub degree: usize,
    pub num: BiForm<C>,
    pub den: BiForm<C>,
    /// Exact forms when `P` has real coefficients.
    pub exact: Option<(BiForm<BigRational>, BiForm<BigRational>)>,
    pub roots: Vec<C>,
    /// Roots of `P` that are rational, when `P` is.
    pub rational_roots: Vec<BigRational>,
}

fn gauss(c: &C) -> Complex<BigRational> {
    Complex::new(f64_to_rat(c.re), f64_to_rat(c.im))
}

impl SecantMap {
    pub fn new(p: Vec<C>) -> Result<Self> {
        let mut p = p;
        while p.last().is_some_and(|c| c.norm() == 0.0) {
            p.pop();
        }
        if p.len() < 3 {
            return Err(Error::ModelRejected("P must have degree at least 2".into()));
        }
        let degree = p.len() - 1;
        certify_squarefree(&p)?;

        let (num, den) = numerator_denominator(&p);
        let is_real = p.iter().all(|c| c.im == 0.0);
        let (exact, rational_roots) = if is_real {
            let rp: Vec<BigRational> = p.iter().map(|c| f64_to_rat(c.re)).collect();
            let roots = RatPoly::new(rp.clone())
                .rational_roots(1 << 20)
                .map(|v| v.into_iter().map(|(r, _)| r).collect())
                .unwrap_or_default();
            (Some(numerator_denominator(&rp)), roots)
        } else {
            (None, Vec::new())
        };
        let roots = find_roots(&p, RootOptions::default())?
            .into_iter()
            .map(|r| r.value)
            .collect();
        Ok(SecantMap { p, degree, num, den, exact, roots, rational_roots })
    }

    pub fn eval_p(&self, z: C) -> C {
        crate::poly::roots::horner(&self.p, z)
    }

    fn form_scale(&self) -> f64 {
        self.num.l1_norm().max(self.den.l1_norm())
    }

    pub fn evaluate(&self, pt: &SurfacePoint, tol: f64) -> Result<SurfacePoint> {
        let SurfacePoint::BiProj(x, y) = pt.normalized() else {
            return Err(Error::InvalidInput("expected a point of P1 x P1".into()));
        };
        let n = self.num.eval(&x, &y);
        let d = self.den.eval(&x, &y);
        if n.norm().max(d.norm()) <= tol * self.form_scale() {
            return Err(Error::Indeterminate(format!(
                "numerator and denominator vanish at {pt:?}"
            )));
        }
        Ok(SurfacePoint::BiProj(y, [n, d]).normalized())
    }

    pub fn evaluate_exact(&self, pt: &ExactPoint) -> Result<ExactPoint> {
        let (num, den) = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::Unsupported("P has non-real coefficients".into()))?;
        let ExactPoint::BiProj(x, y) = pt else {
            return Err(Error::InvalidInput("expected a point of P1 x P1".into()));
        };
        let n = num.eval(x, y);
        let d = den.eval(x, y);
        if n.is_zero() && d.is_zero() {
            return Err(Error::Indeterminate(format!("numerator and denominator vanish at {pt}")));
        }
        Ok(ExactPoint::biproj(y.clone(), [n, d]).expect("nonzero"))
    }

    /// Solutions of `f(x, y) = (a, b)`: `y = a` and `b1 N(x, a) - b0 D(x, a) = 0`,
    /// discarding common zeros of `N` and `D`.
    pub fn preimages(&self, pt: &SurfacePoint, opts: RootOptions, tol: f64) -> Result<Vec<Preimage>> {
        let SurfacePoint::BiProj(a, b) = pt.normalized() else {
            return Err(Error::InvalidInput("expected a point of P1 x P1".into()));
        };
        let nx = self.num.in_x(&a);
        let dx = self.den.in_x(&a);
        let coeffs: Vec<C> = nx.iter().zip(&dx).map(|(n, d)| b[1] * n - b[0] * d).collect();
        let m = self.degree - 1;
        let eff = effective_degree(&coeffs, 1e-13);
        if eff != Some(m) {
            return Err(Error::DegreeDrop { expected: m, got: eff.unwrap_or(0) });
        }
        let mut out = Vec::new();
        for r in find_roots(&coeffs, opts)? {
            let q = SurfacePoint::BiProj([r.value, C::new(1.0, 0.0)], a).normalized();
            if self.evaluate(&q, tol).is_ok() {
                out.push(Preimage { point: q, multiplicity: r.multiplicity });
            }
        }
        Ok(out)
    }

    /// `det Df = -dR/dx` in the affine chart.
    pub fn jacobian(&self, x: C, y: C) -> Result<C> {
        let one = C::new(1.0, 0.0);
        let n = self.num.eval(&[x, one], &[y, one]);
        let d = self.den.eval(&[x, one], &[y, one]);
        if d.norm() == 0.0 {
            return Err(Error::Indeterminate("image leaves the affine chart".into()));
        }
        let rx = (self.num.dx_affine(x, y) * d - n * self.den.dx_affine(x, y)) / (d * d);
        Ok(-rx)
    }

    /// Common zeros of `N` and `D` on `P1 x P1`. The resultant in `x` is a
    /// binary form of degree `2 (d-1)^2` in `y`; it is sampled at roots of
    /// unity and interpolated, and its missing degree accounts for roots at
    /// `y = infinity`.
    pub fn indeterminacy_points(&self) -> Result<Vec<SurfacePoint>> {
        let m = self.degree - 1;
        let k = 2 * m * m + 1;
        let one = C::new(1.0, 0.0);
        let samples: Vec<C> = (0..k)
            .map(|t| {
                let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / k as f64);
                sylvester_resultant(&self.num.in_x(&[w, one]), &self.den.in_x(&[w, one]))
            })
            .collect();
        let coeffs: Vec<C> = (0..k)
            .map(|j| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(t, s)| {
                        s * C::from_polar(1.0, -2.0 * std::f64::consts::PI * (t * j) as f64 / k as f64)
                    })
                    .sum::<C>()
                    / k as f64
            })
            .collect();
        let Some(eff) = effective_degree(&coeffs, 1e-10) else {
            return Err(Error::Numerical(
                "numerator and denominator share a common factor".into(),
            ));
        };
        let mut ys: Vec<[C; 2]> = Vec::new();
        if eff > 0 {
            for r in find_roots(&coeffs[..=eff], RootOptions::default())? {
                ys.push([r.value, one]);
            }
        }
        if eff < k - 1 {
            ys.push([one, C::default()]);
        }

        let tol = 1e-6 * self.form_scale();
        let mut out: Vec<SurfacePoint> = Vec::new();
        for y in ys {
            let y = normalize_pair(y);
            let nx = self.num.in_x(&y);
            let dx = self.den.in_x(&y);
            let base = if nx.iter().all(|c| c.norm() <= tol) { &dx } else { &nx };
            for x in binary_roots(base)? {
                let q = SurfacePoint::BiProj(x, y).normalized();
                let SurfacePoint::BiProj(xn, yn) = q else { unreachable!() };
                let vanish = self.num.eval(&xn, &yn).norm().max(self.den.eval(&xn, &yn).norm());
                if vanish <= tol && out.iter().all(|o| o.dist(&q) > 1e-6) {
                    out.push(q);
                }
            }
        }
        Ok(out)
    }

    /// Snaps a float point to a nearby rational one and keeps it only when the
    /// exact forms vanish there.
    pub fn certify_exact(&self, pt: &SurfacePoint) -> Option<ExactPoint> {
        let (num, den) = self.exact.as_ref()?;
        let SurfacePoint::BiProj(x, y) = pt.normalized() else { return None };
        let snap = |v: [C; 2]| -> Option<[BigRational; 2]> {
            Some([snap_rational(v[0], 1000)?, snap_rational(v[1], 1000)?])
        };
        let (xe, ye) = (snap(x)?, snap(y)?);
        (num.eval(&xe, &ye).is_zero() && den.eval(&xe, &ye).is_zero())
            .then(|| ExactPoint::biproj(xe, ye))
            .flatten()
    }
}

fn normalize_pair(v: [C; 2]) -> [C; 2] {
    match SurfacePoint::BiProj(v, [C::new(1.0, 0.0), C::new(1.0, 0.0)]).normalized() {
        SurfacePoint::BiProj(a, _) => a,
        _ => unreachable!(),
    }
}

/// Roots of the binary form `sum a_i x0^i x1^(m-i)`, including `[1 : 0]`
/// when the degree in `x` drops.
fn binary_roots(a: &[C]) -> Result<Vec<[C; 2]>> {
    let one = C::new(1.0, 0.0);
    let Some(eff) = effective_degree(a, 1e-10) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    if eff > 0 {
        for r in find_roots(&a[..=eff], RootOptions::default())? {
            out.push([r.value, one]);
        }
    }
    if eff + 1 < a.len() {
        out.push([one, C::default()]);
    }
    Ok(out)
}

/// Resultant of two binary forms of the same degree `m`, given by their
/// coefficients in increasing powers of `x0`.
fn sylvester_resultant(a: &[C], b: &[C]) -> C {
    let m = a.len() - 1;
    let n = 2 * m;
    if n == 0 {
        return C::new(1.0, 0.0);
    }
    let mut s = DMatrix::<C>::zeros(n, n);
    for r in 0..m {
        for (i, c) in a.iter().rev().enumerate() {
            s[(r, r + i)] = *c;
        }
        for (i, c) in b.iter().rev().enumerate() {
            s[(m + r, r + i)] = *c;
        }
    }
    s.determinant()
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only when it reproduces the float to near machine precision.
fn snap_rational(z: C, max_den: i64) -> Option<BigRational> {
    if z.im.abs() > 1e-9 {
        return None;
    }
    let x = z.re;
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= 1e-9 * x.abs().max(1.0) {
            return Some(BigRational::new(h1.into(), k1.into()));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Exact check that `P` has no repeated root: `gcd(P, P')` is constant.
fn certify_squarefree(p: &[C]) -> Result<()> {
    let gp = GaussPoly::new(p.iter().map(gauss).collect());
    let g = gp.gcd(&gp.derivative());
    if g.degree().unwrap_or(0) == 0 {
        return Ok(());
    }
    let gf: Vec<C> = g
        .coeffs()
        .iter()
        .map(|c| C::new(rat_to_f64(&c.re), rat_to_f64(&c.im)))
        .collect();
    let repeated: Vec<String> = find_roots(&gf, RootOptions::default())?
        .iter()
        .map(|r| format_complex(r.value))
        .collect();
    Err(Error::ModelRejected(format!(
        "P is not squarefree: gcd(P, P') = {} has degree {}, repeated root {}",
        format_gauss_poly(&g),
        g.degree().unwrap_or(0),
        repeated.join(", ")
    )))
}

fn format_complex(z: C) -> String {
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re}")
    } else {
        format!("{re}{}{}i", if im < 0.0 { "-" } else { "+" }, im.abs())
    }
}

fn format_gauss_poly(g: &GaussPoly) -> String {
    let mut parts = Vec::new();
    for (k, c) in g.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let coef = if c.im.is_zero() {
            c.re.to_string()
        } else {
            format!("({} + {}i)", c.re, c.im)
        };
        let mono = match k {
            0 => String::new(),
            1 => "z".into(),
            _ => format!("z^{k}"),
        };
        parts.push(match (k, c.is_one()) {
            (0, _) => coef,
            (_, true) => mono,
            _ => format!("{coef}*{mono}"),
        });
    }
    parts.join(" + ")
}
