#![allow(dead_code)]

use degreelab::models::{Coeff, FactorSpec, GaussCoeff, GaussInt};
use degreelab::{build_model, FamilyParams, SurfaceMapModel};
use num_complex::Complex64;
use std::sync::LazyLock;

pub fn c(x: f64) -> Coeff {
    Coeff(Complex64::new(x, 0.0))
}

/// `Q` from `(i, j, coefficient)` triples for `x^i y^j`.
pub fn skew(terms: &[(usize, usize, f64)]) -> SurfaceMapModel {
    let rows = terms.iter().map(|t| t.0).max().unwrap() + 1;
    let mut q = vec![Vec::new(); rows];
    for &(i, j, v) in terms {
        if q[i].len() <= j {
            q[i].resize(j + 1, c(0.0));
        }
        q[i][j] = c(v);
    }
    build_model(&FamilyParams::PolynomialSkew { q }).unwrap()
}

/// `Q = y^2 + x`.
pub fn skew_y2_x() -> SurfaceMapModel {
    skew(&[(0, 2, 1.0), (1, 0, 1.0)])
}

/// `Q = y^3 + x^2`.
pub fn skew_y3_x2() -> SurfaceMapModel {
    skew(&[(0, 3, 1.0), (2, 0, 1.0)])
}

/// Little-endian coefficients of `prod (z - r)`.
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (k, a) in p.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= r * a;
        }
        p = next;
    }
    p
}

pub fn secant(p: &[f64]) -> SurfaceMapModel {
    build_model(&FamilyParams::Secant { p: p.iter().map(|&x| c(x)).collect() }).unwrap()
}

/// Secant map of a degree `d` polynomial with roots `0, 1, ..., d-1`.
pub fn secant_deg(d: usize) -> SurfaceMapModel {
    let roots: Vec<f64> = (0..d).map(|k| k as f64).collect();
    secant(&from_roots(&roots))
}

pub fn torus_gauss(a: [[(i64, i64); 2]; 2]) -> Result<SurfaceMapModel, degreelab::Error> {
    let g = |(re, im): (i64, i64)| GaussCoeff(GaussInt::new(re, im));
    build_model(&FamilyParams::TorusEndo { a: [[g(a[0][0]), g(a[0][1])], [g(a[1][0]), g(a[1][1])]], v: None })
}

pub fn torus(a: [[i64; 2]; 2]) -> SurfaceMapModel {
    torus_gauss([[(a[0][0], 0), (a[0][1], 0)], [(a[1][0], 0), (a[1][1], 0)]]).unwrap()
}

pub fn power(d: u32) -> SurfaceMapModel {
    build_model(&FamilyParams::Power { degree: d }).unwrap()
}

pub fn sigma() -> SurfaceMapModel {
    build_model(&FamilyParams::CremonaComposite { factors: vec![FactorSpec::Sigma] }).unwrap()
}

/// Built-in examples with `r1^2 > lambda2`.
pub fn small_degree() -> Vec<(String, SurfaceMapModel)> {
    let mut out = vec![
        ("skew y^2+x".to_string(), skew_y2_x()),
        ("skew y^3+x^2".to_string(), skew_y3_x2()),
        ("torus [[0,1],[2,2]]".to_string(), torus([[0, 1], [2, 2]])),
        ("sigma".to_string(), sigma()),
    ];
    for d in 2..=6 {
        out.push((format!("secant d={d}"), secant_deg(d)));
    }
    out
}

/// All built-in examples, including power maps with `r1^2 = lambda2`.
pub fn builtins() -> &'static [(String, SurfaceMapModel)] {
    &BUILTINS
}

static BUILTINS: LazyLock<Vec<(String, SurfaceMapModel)>> = LazyLock::new(|| {
    let mut out = small_degree();
    out.push(("squaring".to_string(), power(2)));
    out.push(("cubing".to_string(), power(3)));
    out
});
