//! Points on the supported surfaces, in floating and exact form.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::poly::{f64_to_rat, rat_to_f64};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfacePoint {
    /// Homogeneous coordinates on `P^2`.
    Proj([C; 3]),
    /// A pair of points of `P^1`; affine coordinate `x = x0 / x1`.
    BiProj([C; 2], [C; 2]),
    /// A point of `C^2 / Z[i]^2`, real and imaginary parts in `[0, 1)`.
    Torus([C; 2]),
}

/// Divides by the coordinate of largest modulus (first one on ties), so the
/// representative has sup-norm one and a canonical phase.
fn normalize_slice(v: &mut [C]) -> bool {
    let (k, m) = v
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    // Rejects NaN as well.
    if !m.is_finite() || m.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return false;
    }
    let pivot = v[k];
    for z in v.iter_mut() {
        *z /= pivot;
    }
    v[k] = C::new(1.0, 0.0);
    true
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

pub fn reduce_torus(z: C) -> C {
    C::new(frac(z.re), frac(z.im))
}

/// Distance on the circle `R/Z`.
fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn proj_dist(p: &[C], q: &[C]) -> f64 {
    let (k, _) = p
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if q[k].norm() < 1e-300 {
        return f64::INFINITY;
    }
    let (pk, qk) = (p[k], q[k]);
    p.iter()
        .zip(q)
        .map(|(a, b)| (a / pk - b / qk).norm())
        .fold(0.0, f64::max)
}

impl SurfacePoint {
    pub fn proj(x: C, y: C, z: C) -> Self {
        SurfacePoint::Proj([x, y, z]).normalized()
    }

    /// The point `[x : y : 1]` of the affine chart `z = 1`.
    pub fn affine(x: C, y: C) -> Self {
        SurfacePoint::proj(x, y, C::new(1.0, 0.0))
    }

    pub fn biproj_affine(x: C, y: C) -> Self {
        let one = C::new(1.0, 0.0);
        SurfacePoint::BiProj([x, one], [y, one]).normalized()
    }

    pub fn torus(z1: C, z2: C) -> Self {
        SurfacePoint::Torus([reduce_torus(z1), reduce_torus(z2)])
    }

    pub fn normalized(mut self) -> Self {
        match &mut self {
            SurfacePoint::Proj(v) => {
                normalize_slice(v);
            }
            SurfacePoint::BiProj(a, b) => {
                normalize_slice(a);
                normalize_slice(b);
            }
            SurfacePoint::Torus(v) => {
                v[0] = reduce_torus(v[0]);
                v[1] = reduce_torus(v[1]);
            }
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        let ok = |v: &[C]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        match self {
            SurfacePoint::Proj(v) => ok(v),
            SurfacePoint::BiProj(a, b) => ok(a) && ok(b),
            SurfacePoint::Torus(v) => ok(v),
        }
    }

    /// Affine coordinates in the chart `z = 1` (plane) or `x1 = y1 = 1`
    /// (product of lines); `None` at infinity.
    pub fn to_affine(&self) -> Option<(C, C)> {
        const TINY: f64 = 1e-300;
        match self {
            SurfacePoint::Proj([x, y, z]) => (z.norm() > TINY).then(|| (x / z, y / z)),
            SurfacePoint::BiProj(a, b) => {
                (a[1].norm() > TINY && b[1].norm() > TINY).then(|| (a[0] / a[1], b[0] / b[1]))
            }
            SurfacePoint::Torus([z1, z2]) => Some((*z1, *z2)),
        }
    }

    /// Sup-norm distance between normalized representatives; the torus uses
    /// the flat distance modulo the lattice.
    pub fn dist(&self, other: &SurfacePoint) -> f64 {
        match (self, other) {
            (SurfacePoint::Proj(p), SurfacePoint::Proj(q)) => proj_dist(p, q),
            (SurfacePoint::BiProj(a, b), SurfacePoint::BiProj(c, d)) => {
                proj_dist(a, c).max(proj_dist(b, d))
            }
            (SurfacePoint::Torus(p), SurfacePoint::Torus(q)) => p
                .iter()
                .zip(q)
                .map(|(a, b)| circle_dist(a.re, b.re).max(circle_dist(a.im, b.im)))
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }
}

/// Exact rational points, used where orbit membership must be decided
/// without tolerances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactPoint {
    Proj([BigRational; 3]),
    BiProj([BigRational; 2], [BigRational; 2]),
}

/// Divides by the last nonzero coordinate. Returns false for the zero vector.
fn normalize_exact(v: &mut [BigRational]) -> bool {
    let Some(k) = v.iter().rposition(|x| !x.is_zero()) else {
        return false;
    };
    let pivot = v[k].clone();
    for x in v.iter_mut() {
        *x = &*x / &pivot;
    }
    true
}

impl ExactPoint {
    pub fn proj(v: [BigRational; 3]) -> Option<Self> {
        let mut v = v;
        normalize_exact(&mut v).then_some(ExactPoint::Proj(v))
    }

    pub fn biproj(a: [BigRational; 2], b: [BigRational; 2]) -> Option<Self> {
        let (mut a, mut b) = (a, b);
        (normalize_exact(&mut a) && normalize_exact(&mut b)).then_some(ExactPoint::BiProj(a, b))
    }

    pub fn proj_ints(x: i64, y: i64, z: i64) -> Self {
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        ExactPoint::proj([r(x), r(y), r(z)]).expect("nonzero")
    }

    pub fn biproj_affine(x: BigRational, y: BigRational) -> Self {
        ExactPoint::BiProj([x, BigRational::one()], [y, BigRational::one()])
    }

    pub fn to_float(&self) -> SurfacePoint {
        let c = |r: &BigRational| C::new(rat_to_f64(r), 0.0);
        match self {
            ExactPoint::Proj(v) => SurfacePoint::Proj([c(&v[0]), c(&v[1]), c(&v[2])]).normalized(),
            ExactPoint::BiProj(a, b) => {
                SurfacePoint::BiProj([c(&a[0]), c(&a[1])], [c(&b[0]), c(&b[1])]).normalized()
            }
        }
    }

    /// Exact counterpart of a float point whose coordinates are all real.
    pub fn from_float(p: &SurfacePoint) -> Option<Self> {
        let r = |z: &C| (z.im == 0.0 && z.re.is_finite()).then(|| f64_to_rat(z.re));
        match p {
            SurfacePoint::Proj(v) => ExactPoint::proj([r(&v[0])?, r(&v[1])?, r(&v[2])?]),
            SurfacePoint::BiProj(a, b) => {
                ExactPoint::biproj([r(&a[0])?, r(&a[1])?], [r(&b[0])?, r(&b[1])?])
            }
            SurfacePoint::Torus(_) => None,
        }
    }
}

impl std::fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExactPoint::Proj(v) => write!(f, "[{} : {} : {}]", v[0], v[1], v[2]),
            ExactPoint::BiProj(a, b) => write!(f, "([{} : {}], [{} : {}])", a[0], a[1], b[0], b[1]),
        }
    }
}
