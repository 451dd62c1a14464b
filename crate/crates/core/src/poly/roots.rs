//! Roots of complex polynomials from the eigenvalues of a balanced companion
//! matrix, polished by Newton steps and grouped into multiplicity clusters.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    /// Roots closer than this (relative to `max(1, |z|)`) are merged.
    pub cluster_radius: f64,
    pub newton_steps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            cluster_radius: 1e-7,
            newton_steps: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Effective degree after dropping leading coefficients that are negligible
/// relative to the largest coefficient.
pub fn effective_degree(coeffs: &[Complex64], rel_tol: f64) -> Option<usize> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    coeffs.iter().rposition(|c| c.norm() > rel_tol * scale)
}

/// Parlett–Reinsch balancing with powers of two.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Raw eigenvalue estimates of a polynomial given little-endian coefficients.
/// The leading coefficient must be nonzero.
pub fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    if lead.norm() == 0.0 {
        return Err(Error::Numerical("leading coefficient vanishes".into()));
    }
    if deg == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -coeffs[i] / lead;
    }
    balance(&mut m);
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("companion eigenvalue iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let eig: Vec<Complex64> = (0..deg).map(|i| t[(i, i)]).collect();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    Ok(eig)
}

/// Newton refinement on the original polynomial; a step is kept only when it
/// reduces the residual.
pub fn polish(coeffs: &[Complex64], z0: Complex64, steps: usize) -> Complex64 {
    let mut z = z0;
    let mut res = horner(coeffs, z).norm();
    for _ in 0..steps {
        let (p, dp) = horner_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let cres = horner(coeffs, cand).norm();
        if cres < res {
            z = cand;
            res = cres;
        } else {
            break;
        }
    }
    z
}

/// All roots with multiplicities. Leading coefficients that vanish exactly are
/// an error; callers wanting degree-drop detection call
/// [`effective_degree`] first.
pub fn find_roots(coeffs: &[Complex64], opts: RootOptions) -> Result<Vec<Root>> {
    let raw = companion_roots(coeffs)?;
    let polished: Vec<Complex64> = raw
        .iter()
        .map(|&z| polish(coeffs, z, opts.newton_steps))
        .collect();
    Ok(cluster(&polished, opts.cluster_radius))
}

/// Groups nearby values; each cluster is represented by its mean.
pub fn cluster(values: &[Complex64], radius: f64) -> Vec<Root> {
    let mut groups: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for &z in values {
        let hit = groups.iter_mut().find(|(center, _)| {
            (z - *center).norm() <= radius * center.norm().max(z.norm()).max(1.0)
        });
        match hit {
            Some((center, members)) => {
                members.push(z);
                let n = members.len() as f64;
                *center = members.iter().sum::<Complex64>() / n;
            }
            None => groups.push((z, vec![z])),
        }
    }
    groups
        .into_iter()
        .map(|(value, members)| Root {
            value,
            multiplicity: members.len(),
        })
        .collect()
}
