//! Sparse integer polynomials in three variables, used for homogeneous lifts
//! `[F0 : F1 : F2]` of plane rational maps.
//!
//! The GCD is the recursive primitive polynomial remainder sequence: the
//! leading active variable is the main variable and coefficients live in the
//! remaining ones.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Exp = [u32; 3];

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MPoly {
    terms: BTreeMap<Exp, BigInt>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        MPoly::monomial(c, [0, 0, 0])
    }

    pub fn one() -> Self {
        MPoly::constant(1)
    }

    pub fn monomial(c: impl Into<BigInt>, e: Exp) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        MPoly { terms }
    }

    /// The coordinate function `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        MPoly::monomial(1, e)
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Exp, BigInt)>) -> Self {
        let mut p = MPoly::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exp, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn degree_in(&self, v: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[v]).max()
    }

    fn lead(&self) -> Option<(&Exp, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = MPoly::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn shift(&self, e: Exp) -> Self {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| ([t[0] + e[0], t[1] + e[1], t[2] + e[2]], c.clone()))
                .collect(),
        }
    }

    /// Substitutes `x_i -> subs[i]`. Powers are cached per variable.
    pub fn compose(&self, subs: &[MPoly; 3]) -> Self {
        let mut caches: [Vec<MPoly>; 3] = [vec![MPoly::one()], vec![MPoly::one()], vec![MPoly::one()]];
        let mut out = MPoly::zero();
        for (e, c) in &self.terms {
            let mut term = MPoly::constant(c.clone());
            for v in 0..3 {
                let k = e[v] as usize;
                while caches[v].len() <= k {
                    let next = caches[v].last().unwrap().mul(&subs[v]);
                    caches[v].push(next);
                }
                term = term.mul(&caches[v][k]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Integer content (gcd of coefficients), nonnegative.
    pub fn integer_content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let (eb, cb) = divisor.lead()?;
        let (eb, cb) = (*eb, cb.clone());
        let mut rem = self.clone();
        let mut quot = MPoly::zero();
        while let Some((er, cr)) = rem.lead() {
            if (0..3).any(|i| er[i] < eb[i]) {
                return None;
            }
            let (q, r) = cr.div_rem(&cb);
            if !r.is_zero() {
                return None;
            }
            let e = [er[0] - eb[0], er[1] - eb[1], er[2] - eb[2]];
            let t = MPoly::monomial(q, e);
            rem = rem.sub(&divisor.mul(&t));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Coefficient of `x_v^k`, as a polynomial in the other variables.
    fn coeff_in(&self, v: usize, k: u32) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[v] == k)
                .map(|(e, c)| {
                    let mut e = *e;
                    e[v] = 0;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    fn coeffs_in(&self, v: usize) -> Vec<MPoly> {
        let mut by_power: BTreeMap<u32, MPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut r = *e;
            r[v] = 0;
            by_power
                .entry(e[v])
                .or_default()
                .add_term(r, c.clone());
        }
        by_power.into_values().collect()
    }

    fn normalize_sign(self) -> Self {
        match self.lead() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self,
        }
    }

    /// Normalized greatest common divisor (positive leading coefficient in
    /// lex order). `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        gcd_rec(self, other, &active_vars(self, other))
    }

    /// GCD of several polynomials, with a shortcut when one is a monomial.
    pub fn gcd_many(polys: &[MPoly]) -> MPoly {
        let nonzero: Vec<&MPoly> = polys.iter().filter(|p| !p.is_zero()).collect();
        if nonzero.is_empty() {
            return MPoly::zero();
        }
        if nonzero.iter().any(|p| p.is_monomial()) {
            let c = nonzero
                .iter()
                .fold(BigInt::zero(), |acc, p| acc.gcd(&p.integer_content()));
            let mut e = [u32::MAX; 3];
            for p in &nonzero {
                for t in p.terms.keys() {
                    for i in 0..3 {
                        e[i] = e[i].min(t[i]);
                    }
                }
            }
            return MPoly::monomial(c, e);
        }
        let mut g = nonzero[0].clone();
        for p in &nonzero[1..] {
            g = g.gcd(p);
            if g.degree() == Some(0) {
                break;
            }
        }
        g
    }

    pub fn eval_complex(&self, x: &[Complex64; 3]) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let cf = c.to_f64().unwrap_or(f64::NAN);
            out += x[0].powu(e[0]) * x[1].powu(e[1]) * x[2].powu(e[2]) * cf;
        }
        out
    }

    pub fn eval_rational(&self, x: &[BigRational; 3]) -> BigRational {
        let mut out = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for i in 0..3 {
                t *= num_traits::pow(x[i].clone(), e[i] as usize);
            }
            out += t;
        }
        out
    }

    pub fn partial(&self, v: usize) -> Self {
        MPoly::from_terms(self.terms.iter().filter(|(e, _)| e[v] > 0).map(|(e, c)| {
            let mut d = *e;
            d[v] -= 1;
            (d, c * BigInt::from(e[v]))
        }))
    }

    /// Sum of absolute values of coefficients, as a float.
    pub fn l1_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }
}

fn active_vars(a: &MPoly, b: &MPoly) -> Vec<usize> {
    (0..3)
        .filter(|&v| a.degree_in(v).unwrap_or(0) > 0 || b.degree_in(v).unwrap_or(0) > 0)
        .collect()
}

/// Content with respect to `v` (a polynomial in `rest`) and the primitive part.
fn content_primitive(a: &MPoly, v: usize, rest: &[usize]) -> (MPoly, MPoly) {
    let coeffs = a.coeffs_in(v);
    let mut cont = MPoly::zero();
    for c in &coeffs {
        cont = gcd_rec(&cont, c, rest);
        if cont.degree() == Some(0) && cont.integer_content().is_one() {
            break;
        }
    }
    let mut prim = a.exact_div(&cont).expect("content divides");
    if prim.lead().is_some_and(|(_, c)| c.is_negative()) {
        prim = prim.neg();
        cont = cont.neg();
    }
    (cont, prim)
}

/// Pseudo-remainder of `f` by `g` with respect to `x_v`.
fn prem(f: &MPoly, g: &MPoly, v: usize) -> MPoly {
    let dg = g.degree_in(v).unwrap_or(0);
    let lc_g = g.coeff_in(v, dg);
    let mut r = f.clone();
    while let Some(dr) = r.degree_in(v) {
        if dr < dg || r.is_zero() {
            break;
        }
        let lc_r = r.coeff_in(v, dr);
        let mut e = [0; 3];
        e[v] = dr - dg;
        r = lc_g.mul(&r).sub(&lc_r.mul(&g.shift(e)));
    }
    r
}

fn gcd_rec(a: &MPoly, b: &MPoly, vars: &[usize]) -> MPoly {
    if a.is_zero() {
        return b.clone().normalize_sign();
    }
    if b.is_zero() {
        return a.clone().normalize_sign();
    }
    if vars.is_empty() {
        let ca = a.terms.get(&[0, 0, 0]).cloned().unwrap_or_default();
        let cb = b.terms.get(&[0, 0, 0]).cloned().unwrap_or_default();
        return MPoly::constant(ca.gcd(&cb));
    }
    if a.is_monomial() || b.is_monomial() {
        return MPoly::gcd_many(&[a.clone(), b.clone()]);
    }
    let v = vars[0];
    let rest = &vars[1..];
    let (ca, pa) = content_primitive(a, v, rest);
    let (cb, pb) = content_primitive(b, v, rest);
    let c = gcd_rec(&ca, &cb, rest);

    let (mut f, mut g) = if pa.degree_in(v) >= pb.degree_in(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    let pp = loop {
        if g.degree_in(v).unwrap_or(0) == 0 {
            break MPoly::one();
        }
        let r = prem(&f, &g, v);
        if r.is_zero() {
            break g;
        }
        let (_, rp) = content_primitive(&r, v, rest);
        f = g;
        g = rp;
    };
    c.mul(&pp).normalize_sign()
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        const NAMES: [&str; 3] = ["x", "y", "z"];
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let mag = c.abs();
            let is_const = e.iter().all(|&x| x == 0);
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
            }
            for i in 0..3 {
                match e[i] {
                    0 => {}
                    1 => write!(f, "{}", NAMES[i])?,
                    n => write!(f, "{}^{}", NAMES[i], n)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> MPoly {
        MPoly::var(0)
    }
    fn y() -> MPoly {
        MPoly::var(1)
    }
    fn z() -> MPoly {
        MPoly::var(2)
    }

    #[test]
    fn gcd_recovers_common_factor() {
        // g = x + 2y - z, a = g * (x^2 + yz), b = g * (y - 3z) * x
        let g = x().add(&y().scale(&2.into())).sub(&z());
        let a = g.mul(&x().mul(&x()).add(&y().mul(&z())));
        let b = g.mul(&y().sub(&z().scale(&3.into()))).mul(&x());
        assert_eq!(a.gcd(&b), g);
    }

    #[test]
    fn gcd_with_integer_content() {
        let a = x().mul(&y()).scale(&6.into()).add(&z().mul(&z()).scale(&4.into()));
        let b = a.scale(&3.into());
        let g = a.gcd(&b);
        assert_eq!(g, a);
        let c = x().scale(&4.into()).add(&y().scale(&6.into()));
        let d = x().scale(&6.into()).add(&y().scale(&9.into()));
        assert_eq!(c.gcd(&d), x().scale(&2.into()).add(&y().scale(&3.into())));
    }

    #[test]
    fn coprime_gcd_is_one() {
        let a = x().mul(&x()).add(&y().mul(&z()));
        let b = y().mul(&y()).sub(&x().mul(&z()));
        assert_eq!(a.gcd(&b), MPoly::one());
    }

    #[test]
    fn exact_division() {
        let a = x().add(&y());
        let b = x().sub(&z());
        let p = a.mul(&b);
        assert_eq!(p.exact_div(&a), Some(b.clone()));
        assert_eq!(p.add(&MPoly::one()).exact_div(&a), None);
    }

    #[test]
    fn compose_cremona_twice() {
        let sigma = [y().mul(&z()), x().mul(&z()), x().mul(&y())];
        let comp: Vec<MPoly> = sigma.iter().map(|p| p.compose(&sigma)).collect();
        let g = MPoly::gcd_many(&comp);
        assert_eq!(g, x().mul(&y()).mul(&z()));
        for (i, c) in comp.iter().enumerate() {
            assert_eq!(c.exact_div(&g).unwrap(), MPoly::var(i));
        }
    }

    #[test]
    fn pow_and_degree() {
        let p = x().add(&y()).pow(5);
        assert_eq!(p.degree(), Some(5));
        assert!(p.is_homogeneous());
        assert_eq!(p.num_terms(), 6);
        assert_eq!(p.terms.get(&[2, 3, 0]), Some(&BigInt::from(10)));
    }
}
