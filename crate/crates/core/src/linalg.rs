//! Small dense matrices over the rationals, plus the few floating-point
//! helpers the spectral code needs.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::{rat_to_f64, RatPoly};

pub type IntMatrix = Vec<Vec<i64>>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: Vec<Vec<BigRational>>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RatMatrix {
    pub fn new(rows: Vec<Vec<BigRational>>) -> Self {
        let n = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n), "ragged matrix");
        RatMatrix { rows }
    }

    pub fn from_ints(m: &[Vec<i64>]) -> Self {
        RatMatrix::new(m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    pub fn zeros(r: usize, c: usize) -> Self {
        RatMatrix {
            rows: vec![vec![BigRational::zero(); c]; r],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.rows[i][i] = BigRational::one();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.nrows(), self.ncols());
        RatMatrix {
            rows: (0..c)
                .map(|j| (0..r).map(|i| self.rows[i][j].clone()).collect())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols(), other.nrows());
        let (r, k, c) = (self.nrows(), self.ncols(), other.ncols());
        let mut out = RatMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let mut acc = BigRational::zero();
                for t in 0..k {
                    acc += &self.rows[i][t] * &other.rows[t][j];
                }
                out.rows[i][j] = acc;
            }
        }
        out
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.ncols(), v.len());
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        RatMatrix {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        RatMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|x| x * s).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn trace(&self) -> BigRational {
        (0..self.nrows()).map(|i| self.rows[i][i].clone()).sum()
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.nrows();
        assert_eq!(n, self.ncols());
        let mut a = self.rows.clone();
        let mut inv = RatMatrix::identity(n).rows;
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in 0..n {
                        let t = &f * &a[col][j];
                        a[r][j] -= t;
                        let t = &f * &inv[col][j];
                        inv[r][j] -= t;
                    }
                }
            }
        }
        Some(RatMatrix { rows: inv })
    }

    pub fn determinant(&self) -> BigRational {
        let n = self.nrows();
        let mut a = self.rows.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return BigRational::zero();
            };
            if piv != col {
                a.swap(col, piv);
                det = -det;
            }
            let p = a[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                if !a[r][col].is_zero() {
                    let f = &a[r][col] / &p;
                    for j in col..n {
                        let t = &f * &a[col][j];
                        a[r][j] -= t;
                    }
                }
            }
        }
        det
    }

    /// Monic characteristic polynomial `det(mu I - A)` by Faddeev–LeVerrier.
    pub fn char_poly(&self) -> RatPoly {
        let n = self.nrows();
        let mut c = vec![BigRational::zero(); n + 1];
        c[n] = BigRational::one();
        let mut m = RatMatrix::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&RatMatrix::identity(n).scale(&c[n - k + 1]));
            let am = self.mul(&m);
            c[n - k] = -am.trace() / rat(k as i64);
        }
        RatPoly::new(c)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let (r, c) = (self.nrows(), self.ncols());
        let mut a = self.rows.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..c {
            if row == r {
                break;
            }
            let Some(piv) = (row..r).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(row, piv);
            let p = a[row][col].clone();
            for j in 0..c {
                a[row][j] = &a[row][j] / &p;
            }
            for i in 0..r {
                if i != row && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in 0..c {
                        let t = &f * &a[row][j];
                        a[i][j] -= t;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        a.truncate(row);
        (RatMatrix { rows: a }, pivots)
    }

    /// Exact negative definiteness of a symmetric matrix by Sylvester's
    /// criterion: `(-1)^k` times the k-th leading minor is positive.
    pub fn is_negative_definite(&self) -> bool {
        let n = self.nrows();
        (1..=n).all(|k| {
            let minor = RatMatrix::new(self.rows[..k].iter().map(|r| r[..k].to_vec()).collect());
            let d = minor.determinant();
            if k % 2 == 0 {
                d.is_positive()
            } else {
                d.is_negative()
            }
        })
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| rat_to_f64(&self.rows[i][j]))
    }

    /// Integer entries, when every entry is integral and fits.
    pub fn to_ints(&self) -> Option<IntMatrix> {
        use num_traits::ToPrimitive;
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
                    .collect()
            })
            .collect()
    }
}

pub fn int_to_f64(m: &[Vec<i64>]) -> DMatrix<f64> {
    let r = m.len();
    let c = m.first().map_or(0, |x| x.len());
    DMatrix::from_fn(r, c, |i, j| m[i][j] as f64)
}

/// Unit vector spanning the (numerical) kernel of a square matrix: the right
/// singular vector of the smallest singular value.
pub fn null_vector(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    v_t.row(k).iter().copied().collect()
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_secant_matrix() {
        let m = RatMatrix::from_ints(&[vec![0, 2], vec![1, 2]]);
        assert_eq!(m.char_poly(), RatPoly::from_ints(&[-2, -2, 1]));
    }

    #[test]
    fn char_poly_matches_determinant_at_integers() {
        let m = RatMatrix::from_ints(&[vec![1, 2, 0], vec![-3, 4, 5], vec![2, 0, -1]]);
        let cp = m.char_poly();
        for t in -3..=3 {
            let shifted = RatMatrix::identity(3).scale(&rat(t)).sub(&m);
            assert_eq!(cp.eval(&rat(t)), shifted.determinant());
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let m = RatMatrix::from_ints(&[vec![0, 0, 0, 1], vec![0, -2, 0, 0], vec![0, 0, -2, 0], vec![1, 0, 0, 0]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMatrix::identity(4));
        assert!(RatMatrix::from_ints(&[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn sylvester_criterion() {
        assert!(RatMatrix::from_ints(&[vec![-1, 0], vec![0, -2]]).is_negative_definite());
        assert!(!RatMatrix::from_ints(&[vec![0, 1], vec![1, 0]]).is_negative_definite());
        assert!(!RatMatrix::from_ints(&[vec![1]]).is_negative_definite());
    }
}
