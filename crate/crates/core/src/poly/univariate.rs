//! Dense univariate polynomials over an exact field.
//!
//! Coefficients are stored little-endian (constant term first) and the
//! vector is kept trimmed, so the zero polynomial is the empty vector.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Exact coefficient field. Implemented for `BigRational` and Gaussian rationals.
pub trait Field: Num + Clone + FromPrimitive + fmt::Debug {}
impl<T: Num + Clone + FromPrimitive + fmt::Debug> Field for T {}

pub type RatPoly = Poly<BigRational>;
pub type GaussPoly = Poly<Complex<BigRational>>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![T::one()] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * T::from_usize(k).expect("small integer"))
            .collect();
        Poly::new(coeffs)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            None => Poly::zero(),
            Some(l) => {
                let inv = T::one() / l.clone();
                self.scale(&inv)
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).cloned().unwrap_or_else(T::zero);
                let b = other.coeffs.get(k).cloned().unwrap_or_else(T::zero);
                a - b
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = T::one() / divisor.lead().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Poly::zero(), Poly::zero());
        };
        if nd < dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd].clone() * lead_inv.clone();
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - c.clone() * d.clone();
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Square-free decomposition `p = c * s_1 * s_2^2 * ... * s_k^k` (Yun).
    /// Returns the monic factors `s_1, ..., s_k`; trivial factors are kept as `1`.
    pub fn squarefree_decomposition(&self) -> Vec<Self> {
        let mut factors = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return factors;
        }
        let f = self.monic();
        let fp = f.derivative();
        let mut a = f.gcd(&fp);
        let mut b = f.div_rem(&a).0;
        let mut c = fp.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        loop {
            let s = b.gcd(&d);
            factors.push(s.clone());
            b = b.div_rem(&s).0;
            if b.degree() == Some(0) {
                break;
            }
            c = d.div_rem(&s).0;
            d = c.sub(&b.derivative());
            a = a.div_rem(&s).0;
        }
        let _ = a;
        while factors.last().is_some_and(|s| s.degree() == Some(0)) && factors.len() > 1 {
            factors.pop();
        }
        factors
    }

    /// True when `gcd(p, p')` is a nonzero constant.
    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None => false,
            Some(0) => true,
            Some(_) => self.gcd(&self.derivative()).degree() == Some(0),
        }
    }
}

impl RatPoly {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rat_to_f64).collect()
    }

    /// Integer coefficients after clearing denominators and content, sign
    /// normalized so the leading coefficient is positive.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        use num_integer::Integer;
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !g.is_zero() {
            for c in ints.iter_mut() {
                *c /= &g;
            }
        }
        if ints.last().is_some_and(|l| l.is_negative()) {
            for c in ints.iter_mut() {
                *c = -c.clone();
            }
        }
        ints
    }

    /// Exact rational roots, each with its multiplicity, by the rational root
    /// test on the primitive integer form. `cap` bounds the divisor search.
    pub fn rational_roots(&self, cap: u64) -> Option<Vec<(BigRational, usize)>> {
        let mut p = self.clone();
        let mut roots = Vec::new();
        let mut zero_mult = 0;
        while p.coeffs.first().is_some_and(|c| c.is_zero()) {
            p = Poly::new(p.coeffs[1..].to_vec());
            zero_mult += 1;
        }
        if zero_mult > 0 {
            roots.push((BigRational::zero(), zero_mult));
        }
        if p.degree().unwrap_or(0) == 0 {
            return Some(roots);
        }
        let ints = p.primitive_integer();
        let a0 = ints[0].abs().to_u64()?;
        let an = ints.last().unwrap().abs().to_u64()?;
        let num_divs = divisors(a0, cap)?;
        let den_divs = divisors(an, cap)?;
        let mut candidates: Vec<BigRational> = Vec::new();
        for &n in &num_divs {
            for &d in &den_divs {
                let r = BigRational::new(BigInt::from(n), BigInt::from(d));
                candidates.push(r.clone());
                candidates.push(-r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            let mut mult = 0;
            let lin = Poly::new(vec![-r.clone(), BigRational::one()]);
            loop {
                if p.eval(&r).is_zero() {
                    p = p.div_rem(&lin).0;
                    mult += 1;
                } else {
                    break;
                }
            }
            if mult > 0 {
                roots.push((r, mult));
            }
        }
        Some(roots)
    }
}

fn divisors(n: u64, cap: u64) -> Option<Vec<u64>> {
    if n > cap {
        return None;
    }
    let mut out = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n.is_multiple_of(k) {
            out.push(k);
            if k * k != n {
                out.push(n / k);
            }
        }
        k += 1;
    }
    Some(out)
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or({
        // Ratio::to_f64 handles large operands; this branch only guards NaN.
        f64::NAN
    })
}

/// Exact rational value of a finite double.
pub fn f64_to_rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || k == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = RatPoly::from_ints(&[-1, 0, 1]);
        let b = RatPoly::from_ints(&[2, 1]);
        assert_eq!(a.gcd(&b), RatPoly::one());
    }

    #[test]
    fn squarefree_detects_repeated_root() {
        // z^2 (z - 1)
        let p = RatPoly::from_ints(&[0, 0, -1, 1]);
        assert!(!p.is_squarefree());
        let dec = p.squarefree_decomposition();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec[0], RatPoly::from_ints(&[-1, 1]));
        assert_eq!(dec[1], RatPoly::from_ints(&[0, 1]));
        assert!(RatPoly::from_ints(&[0, -1, 0, 1]).is_squarefree());
    }

    #[test]
    fn squarefree_of_product_of_powers() {
        // (x+2)^3 (x-1)
        let a = RatPoly::from_ints(&[2, 1]);
        let p = a.mul(&a).mul(&a).mul(&RatPoly::from_ints(&[-1, 1]));
        let dec = p.squarefree_decomposition();
        assert_eq!(dec.len(), 3);
        assert_eq!(dec[0], RatPoly::from_ints(&[-1, 1]));
        assert_eq!(dec[1], RatPoly::one());
        assert_eq!(dec[2], a);
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (2x - 1)^2 (x + 3) x
        let a = RatPoly::from_ints(&[-1, 2]);
        let p = a
            .mul(&a)
            .mul(&RatPoly::from_ints(&[3, 1]))
            .mul(&RatPoly::from_ints(&[0, 1]));
        let roots = p.rational_roots(1_000_000).unwrap();
        assert!(roots.contains(&(q(0), 1)));
        assert!(roots.contains(&(q(-3), 1)));
        assert!(roots.contains(&(BigRational::new(1.into(), 2.into()), 2)));
        // mu^2 - 8 mu + 4 has none
        assert!(RatPoly::from_ints(&[4, -8, 1])
            .rational_roots(1_000_000)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn division_identity() {
        let a = RatPoly::from_ints(&[5, -3, 0, 2, 7]);
        let b = RatPoly::from_ints(&[1, 0, 3]);
        let (qt, r) = a.div_rem(&b);
        assert_eq!(qt.mul(&b).sub(&r.scale(&q(-1))), a);
    }
}
