//! Affine endomorphisms `z -> A z + v` of the torus `C^2 / Z[i]^2`, with `A` a
//! matrix of Gaussian integers.

use std::collections::{HashSet, VecDeque};

use num_complex::{Complex, Complex64};
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

use super::point::{reduce_torus, SurfacePoint};
use super::Preimage;

type C = Complex64;
pub type GaussInt = Complex<i64>;
pub type GaussMatrix = [[GaussInt; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMap {
    pub a: GaussMatrix,
    pub v: [C; 2],
    pub det: GaussInt,
    /// `|det A|^2`.
    pub lambda2: u64,
}

pub fn gauss_det(a: &GaussMatrix) -> GaussInt {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn adjugate(a: &GaussMatrix) -> GaussMatrix {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

fn conj_transpose(a: &GaussMatrix) -> GaussMatrix {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn gmul(a: &GaussMatrix, b: &GaussMatrix) -> GaussMatrix {
    let mut out = [[GaussInt::new(0, 0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Hermitian matrix `[[a, b + ic], [b - ic, d]]` from coordinates `(a, b, c, d)`.
pub fn hermitian_from_coords(h: &[i64]) -> GaussMatrix {
    [
        [GaussInt::new(h[0], 0), GaussInt::new(h[1], h[2])],
        [GaussInt::new(h[1], -h[2]), GaussInt::new(h[3], 0)],
    ]
}

pub fn hermitian_coords(h: &GaussMatrix) -> [i64; 4] {
    [h[0][0].re, h[0][1].re, h[0][1].im, h[1][1].re]
}

/// `H -> B* H B`.
pub fn congruence(b: &GaussMatrix, h: &GaussMatrix) -> GaussMatrix {
    gmul(&gmul(&conj_transpose(b), h), b)
}

/// Matrix of a real-linear map of Hermitian forms in the `(a, b, c, d)` basis,
/// columns being the images of the basis vectors.
fn hermitian_action(b: &GaussMatrix) -> IntMatrix {
    let mut m = vec![vec![0i64; 4]; 4];
    for col in 0..4 {
        let mut e = [0i64; 4];
        e[col] = 1;
        let img = hermitian_coords(&congruence(b, &hermitian_from_coords(&e)));
        for row in 0..4 {
            m[row][col] = img[row];
        }
    }
    m
}

impl TorusMap {
    pub fn new(a: GaussMatrix, v: [C; 2]) -> Result<Self> {
        let det = gauss_det(&a);
        let lambda2 = det.norm_sqr();
        if lambda2 == 0 {
            return Err(Error::ModelRejected("det A vanishes, the map is not dominant".into()));
        }
        Ok(TorusMap { a, v, det, lambda2: lambda2 as u64 })
    }

    /// Pullback `H -> A* H A` on the Hermitian model.
    pub fn pullback_matrix(&self) -> IntMatrix {
        hermitian_action(&self.a)
    }

    /// Pushforward `H -> adj(A)* H adj(A) = |det A|^2 (A^-1)* H A^-1`.
    pub fn pushforward_matrix(&self) -> IntMatrix {
        hermitian_action(&adjugate(&self.a))
    }

    /// `z -> A z` on `R^4` with coordinates `(Re z1, Im z1, Re z2, Im z2)`.
    pub fn real4(&self) -> IntMatrix {
        let mut m = vec![vec![0i64; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                let g = self.a[i][j];
                m[2 * i][2 * j] = g.re;
                m[2 * i][2 * j + 1] = -g.im;
                m[2 * i + 1][2 * j] = g.im;
                m[2 * i + 1][2 * j + 1] = g.re;
            }
        }
        m
    }

    pub fn linear_part(&self) -> [[C; 2]; 2] {
        let c = |g: GaussInt| C::new(g.re as f64, g.im as f64);
        [[c(self.a[0][0]), c(self.a[0][1])], [c(self.a[1][0]), c(self.a[1][1])]]
    }

    /// Eigenvalues of `A`, larger modulus first.
    pub fn eigenvalues(&self) -> [C; 2] {
        let a = self.linear_part();
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = (tr * tr - det * 4.0).sqrt();
        let (mut e0, mut e1) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        if e1.norm() > e0.norm() {
            std::mem::swap(&mut e0, &mut e1);
        }
        // Recover the smaller root from the product to avoid cancellation.
        if e0.norm() > 0.0 {
            e1 = det / e0;
        }
        [e0, e1]
    }

    /// `lambda1 = |r(A)|^2`.
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues()[0].norm_sqr()
    }

    pub fn evaluate(&self, p: &SurfacePoint) -> Result<SurfacePoint> {
        let SurfacePoint::Torus(z) = p else {
            return Err(Error::InvalidInput("expected a point of the torus".into()));
        };
        let a = self.linear_part();
        Ok(SurfacePoint::torus(
            a[0][0] * z[0] + a[0][1] * z[1] + self.v[0],
            a[1][0] * z[0] + a[1][1] * z[1] + self.v[1],
        ))
    }

    /// The kernel of `A` on the torus, `A^-1 Z[i]^2 / Z[i]^2`, as numerators
    /// over `|det A|^2` in real coordinates. It is generated by the columns
    /// of the inverse of the real form.
    pub fn kernel(&self) -> Vec<[i64; 4]> {
        let n = self.lambda2 as i64;
        let r = self.real4();
        // adj(R) = det(R) R^-1 and det R = |det A|^2.
        let adj = integer_adjugate(&r);
        let gens: Vec<[i64; 4]> = (0..4)
            .map(|c| [adj[0][c], adj[1][c], adj[2][c], adj[3][c]].map(|x| x.mod_floor(&n)))
            .collect();
        let mut seen: HashSet<[i64; 4]> = HashSet::new();
        let mut queue = VecDeque::from([[0i64; 4]]);
        seen.insert([0; 4]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = [0, 1, 2, 3].map(|k| (x[k] + g[k]).mod_floor(&n));
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        let mut out: Vec<[i64; 4]> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// All `|det A|^2` solutions of `A z + v = p` modulo the lattice.
    pub fn preimages(&self, p: &SurfacePoint) -> Result<Vec<Preimage>> {
        let SurfacePoint::Torus(w) = p else {
            return Err(Error::InvalidInput("expected a point of the torus".into()));
        };
        let a = self.linear_part();
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let (r0, r1) = (w[0] - self.v[0], w[1] - self.v[1]);
        let z0 = (a[1][1] * r0 - a[0][1] * r1) / det;
        let z1 = (a[0][0] * r1 - a[1][0] * r0) / det;
        let n = self.lambda2 as f64;
        Ok(self
            .kernel()
            .into_iter()
            .map(|k| Preimage {
                point: SurfacePoint::Torus([
                    reduce_torus(z0 + C::new(k[0] as f64 / n, k[1] as f64 / n)),
                    reduce_torus(z1 + C::new(k[2] as f64 / n, k[3] as f64 / n)),
                ]),
                multiplicity: 1,
            })
            .collect())
    }
}

/// Adjugate of a small integer matrix by cofactors.
pub fn integer_adjugate(m: &IntMatrix) -> IntMatrix {
    let n = m.len();
    let mut adj = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: IntMatrix = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c]).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = sign * integer_det(&minor);
        }
    }
    adj
}

pub fn integer_det(m: &IntMatrix) -> i64 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0],
        _ => (0..n)
            .map(|j| {
                let minor: IntMatrix =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * integer_det(&minor)
            })
            .sum(),
    }
}
