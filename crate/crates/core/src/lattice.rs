//! Exact linear algebra on the real (1,1) cohomology of a surface: the
//! intersection pairing, the adjoint pushforward, spectral data of the
//! pullback and its invariant nef classes.
//!
//! Matrices act on column coordinate vectors in the lattice basis. The pairing
//! is `<a, b> = a^T G b` with `G` the Gram matrix.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{int_to_f64, null_vector, symmetric_eigenvalues, IntMatrix, RatMatrix};
use crate::poly::{find_roots, RatPoly, RootOptions};

/// Tolerance on nef membership inequalities for floating eigenvectors.
pub const NEF_TOL: f64 = 1e-9;

/// Per-surface rule deciding membership in the nef cone.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NefRule {
    /// Rank one: nonnegative multiple of the hyperplane class.
    P2Nonneg,
    /// `P1 x P1`: both bidegree coordinates nonnegative.
    BidegreeNonneg,
    /// Complex torus: the Hermitian matrix is positive semidefinite.
    HermitianPsd,
    /// Intersection of halfspaces `h . a >= 0`; `None` means no data.
    CustomHalfspaces(Option<Vec<Vec<f64>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionLattice {
    pub rank: usize,
    pub gram: IntMatrix,
    pub basis_labels: Vec<String>,
    pub nef_rule: NefRule,
    /// Reference Kahler class used for normalizations.
    pub kahler: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomClass {
    pub coords: Vec<f64>,
}

impl CohomClass {
    pub fn new(coords: Vec<f64>) -> Self {
        CohomClass { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        CohomClass::new(coords.iter().map(|&x| x as f64).collect())
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        CohomClass::new(self.coords.iter().map(|x| x * s).collect())
    }
}

impl IntersectionLattice {
    pub fn new(
        gram: IntMatrix,
        basis_labels: Vec<String>,
        nef_rule: NefRule,
        kahler: Vec<i64>,
    ) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 {
            return Err(Error::InvalidInput("empty Gram matrix".into()));
        }
        for row in &gram {
            if row.len() != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: row.len() });
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInput("Gram matrix is not symmetric".into()));
                }
            }
        }
        if basis_labels.len() != rank {
            return Err(Error::DimensionMismatch { expected: rank, got: basis_labels.len() });
        }
        if kahler.len() != rank {
            return Err(Error::DimensionMismatch { expected: rank, got: kahler.len() });
        }
        Ok(IntersectionLattice { rank, gram, basis_labels, nef_rule, kahler })
    }

    /// `H^{1,1}(P^2)`, generated by the line class `H` with `H.H = 1`.
    pub fn p2() -> Self {
        IntersectionLattice::new(vec![vec![1]], vec!["H".into()], NefRule::P2Nonneg, vec![1])
            .expect("valid")
    }

    /// `H^{1,1}(P^1 x P^1)` in the basis (vertical line `{x = c}`, horizontal line `{y = c}`).
    pub fn p1xp1() -> Self {
        IntersectionLattice::new(
            vec![vec![0, 1], vec![1, 0]],
            vec!["V {x=c}".into(), "H {y=c}".into()],
            NefRule::BidegreeNonneg,
            vec![1, 1],
        )
        .expect("valid")
    }

    /// Real (1,1) classes of a complex 2-torus as Hermitian 2x2 matrices
    /// `[[a, b + ic], [b - ic, d]]` with coordinates `(a, b, c, d)`, paired by
    /// polarizing the determinant: `<H, K> = det(H + K) - det H - det K`.
    pub fn torus_hermitian() -> Self {
        IntersectionLattice::new(
            vec![vec![0, 0, 0, 1], vec![0, -2, 0, 0], vec![0, 0, -2, 0], vec![1, 0, 0, 0]],
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            NefRule::HermitianPsd,
            vec![1, 0, 0, 1],
        )
        .expect("valid")
    }

    pub fn gram_rat(&self) -> RatMatrix {
        RatMatrix::from_ints(&self.gram)
    }

    pub fn kahler_class(&self) -> CohomClass {
        CohomClass::from_ints(&self.kahler)
    }

    /// Counts of (positive, negative, zero) eigenvalues of the Gram matrix.
    pub fn signature(&self) -> (usize, usize, usize) {
        let ev = symmetric_eigenvalues(&int_to_f64(&self.gram));
        let pos = ev.iter().filter(|&&x| x > 1e-12).count();
        let neg = ev.iter().filter(|&&x| x < -1e-12).count();
        (pos, neg, ev.len() - pos - neg)
    }

    fn check_rank(&self, got: usize) -> Result<()> {
        if got != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got });
        }
        Ok(())
    }

    pub fn pair(&self, a: &CohomClass, b: &CohomClass) -> Result<f64> {
        self.check_rank(a.rank())?;
        self.check_rank(b.rank())?;
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.gram[i][j] != 0 {
                    s += a.coords[i] * self.gram[i][j] as f64 * b.coords[j];
                }
            }
        }
        Ok(s)
    }

    pub fn pair_exact(&self, a: &[BigRational], b: &[BigRational]) -> Result<BigRational> {
        self.check_rank(a.len())?;
        self.check_rank(b.len())?;
        let mut s = BigRational::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.gram[i][j] != 0 {
                    s += &a[i] * BigRational::from_integer(BigInt::from(self.gram[i][j])) * &b[j];
                }
            }
        }
        Ok(s)
    }

    pub fn nef_member(&self, a: &CohomClass, tol: f64) -> Result<bool> {
        self.check_rank(a.rank())?;
        let c = &a.coords;
        Ok(match &self.nef_rule {
            NefRule::P2Nonneg => c[0] >= -tol,
            NefRule::BidegreeNonneg => c.iter().all(|&x| x >= -tol),
            NefRule::HermitianPsd => {
                let scale = c.iter().map(|x| x.abs()).fold(1.0, f64::max);
                let det = c[0] * c[3] - c[1] * c[1] - c[2] * c[2];
                c[0] >= -tol && c[3] >= -tol && det >= -tol * scale * scale
            }
            NefRule::CustomHalfspaces(None) => {
                return Err(Error::Unsupported(
                    "custom lattice carries no nef halfspace data".into(),
                ))
            }
            NefRule::CustomHalfspaces(Some(hs)) => {
                for h in hs {
                    self.check_rank(h.len())?;
                }
                hs.iter()
                    .all(|h| h.iter().zip(c).map(|(x, y)| x * y).sum::<f64>() >= -tol)
            }
        })
    }
}

/// The pushforward `M_* = G^{-1} M^T G`, adjoint to `M` for the pairing.
pub fn adjoint_pushforward(m: &RatMatrix, lattice: &IntersectionLattice) -> Result<RatMatrix> {
    lattice.check_rank(m.nrows())?;
    lattice.check_rank(m.ncols())?;
    let g = lattice.gram_rat();
    let g_inv = g.inverse().ok_or(Error::SingularGram)?;
    Ok(g_inv.mul(&m.transpose()).mul(&g))
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub r1: f64,
    /// Integer coefficients of the monic characteristic polynomial, constant
    /// term first, as decimal strings.
    pub char_poly: Vec<String>,
    pub simple_root: bool,
    pub alpha: CohomClass,
    pub alpha_nef: bool,
    pub second_modulus: f64,
    pub sqrt_lambda2: f64,
    pub sqrt_lambda2_bound_ok: bool,
    pub eigenvalues: Vec<Eigenvalue>,
    #[serde(skip)]
    pub char_poly_exact: RatPoly,
}

fn char_poly_strings(p: &RatPoly) -> Vec<String> {
    p.coeffs().iter().map(|c| c.to_string()).collect()
}

/// Eigenvalues of an exact matrix with multiplicities, via the square-free
/// decomposition of the characteristic polynomial. Each factor has simple
/// roots, so the multiplicity is exact and Newton refinement is well posed.
pub fn exact_spectrum(cp: &RatPoly) -> Result<Vec<(Complex64, usize)>> {
    let mut out = Vec::new();
    for (k, factor) in cp.squarefree_decomposition().iter().enumerate() {
        if factor.degree().unwrap_or(0) == 0 {
            continue;
        }
        let coeffs: Vec<Complex64> =
            factor.to_f64().into_iter().map(|c| Complex64::new(c, 0.0)).collect();
        let opts = RootOptions { cluster_radius: 0.0, newton_steps: 20 };
        for r in find_roots(&coeffs, opts)? {
            out.push((r.value, k + 1));
        }
    }
    Ok(out)
}

/// Spectral radius, simplicity certificate and normalized leading eigenclass
/// of the pullback matrix. The class is scaled so that `<alpha, omega> = 1`
/// with `omega` the lattice's reference Kahler class.
pub fn spectral_analysis(
    m: &RatMatrix,
    lambda2: u64,
    lattice: &IntersectionLattice,
    tol: f64,
) -> Result<SpectralReport> {
    spectral_analysis_with(m, lambda2, lattice, &lattice.kahler_class(), tol)
}

pub fn spectral_analysis_with(
    m: &RatMatrix,
    lambda2: u64,
    lattice: &IntersectionLattice,
    omega: &CohomClass,
    tol: f64,
) -> Result<SpectralReport> {
    lattice.check_rank(m.nrows())?;
    let cp = m.char_poly();
    let spectrum = exact_spectrum(&cp)?;
    let (lead_idx, &(lead, lead_mult)) = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.norm().total_cmp(&b.1 .0.norm()))
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    let r1 = lead.norm();
    if lead.im.abs() > 1e-9 * r1.max(1.0) || lead.re <= 0.0 {
        return Err(Error::Structural(format!(
            "leading eigenvalue {lead} is not a positive real number"
        )));
    }
    let r1 = lead.re;
    check_small_degree_hypothesis(&cp, r1, lambda2)?;

    let mut second_modulus: f64 = 0.0;
    for (i, &(z, mult)) in spectrum.iter().enumerate() {
        let copies = if i == lead_idx { mult - 1 } else { mult };
        if copies > 0 {
            second_modulus = second_modulus.max(z.norm());
        }
    }

    let shifted = m.to_f64() - nalgebra::DMatrix::<f64>::identity(lattice.rank, lattice.rank) * r1;
    let v = CohomClass::new(null_vector(&shifted));
    let s = lattice.pair(&v, omega)?;
    if s.abs() < 1e-12 {
        return Err(Error::Structural(
            "leading eigenvector is orthogonal to the reference class".into(),
        ));
    }
    let alpha = v.scaled(1.0 / s);
    let alpha_nef = lattice.nef_member(&alpha, NEF_TOL)?;
    let sqrt_lambda2 = (lambda2 as f64).sqrt();

    Ok(SpectralReport {
        r1,
        char_poly: char_poly_strings(&cp),
        simple_root: lead_mult == 1,
        alpha,
        alpha_nef,
        second_modulus,
        sqrt_lambda2,
        sqrt_lambda2_bound_ok: second_modulus <= sqrt_lambda2 + tol,
        eigenvalues: spectrum
            .iter()
            .map(|&(z, k)| Eigenvalue { re: z.re, im: z.im, multiplicity: k })
            .collect(),
        char_poly_exact: cp,
    })
}

/// Requires `r1^2 > lambda2`. Near-ties are settled exactly: equality holds
/// iff `mu^2 - lambda2` shares a root with the characteristic polynomial.
fn check_small_degree_hypothesis(cp: &RatPoly, r1: f64, lambda2: u64) -> Result<()> {
    let l2 = lambda2 as f64;
    let gap = r1 * r1 - l2;
    let violation = || {
        Error::HypothesisViolation(format!(
            "spectral radius squared {} does not exceed the topological degree {lambda2}",
            r1 * r1
        ))
    };
    if gap < -1e-9 * l2.max(1.0) {
        return Err(violation());
    }
    if gap <= 1e-9 * l2.max(1.0) {
        let q = RatPoly::new(vec![
            BigRational::from_integer(-BigInt::from(lambda2)),
            BigRational::zero(),
            BigRational::from_integer(BigInt::from(1)),
        ]);
        if cp.gcd(&q).degree().unwrap_or(0) > 0 {
            return Err(violation());
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantClasses {
    pub alpha_plus: CohomClass,
    pub alpha_minus: CohomClass,
    /// `<alpha+, alpha->`; the other two pairings are 1 by normalization.
    pub cross_pairing: f64,
    pub alpha_plus_omega: f64,
    pub alpha_minus_omega: f64,
    pub alpha_plus_nef: bool,
    pub alpha_minus_nef: bool,
    pub r1: f64,
}

/// Leading eigenclasses of pullback and pushforward, each normalized against
/// `omega`. Fails when they pair non-positively.
pub fn invariant_classes(
    m_pull: &RatMatrix,
    lambda2: u64,
    lattice: &IntersectionLattice,
    omega: &CohomClass,
    tol: f64,
) -> Result<InvariantClasses> {
    let plus = spectral_analysis_with(m_pull, lambda2, lattice, omega, tol)?;
    let m_push = adjoint_pushforward(m_pull, lattice)?;
    let minus = spectral_analysis_with(&m_push, lambda2, lattice, omega, tol)?;
    let cross = lattice.pair(&plus.alpha, &minus.alpha)?;
    if cross <= tol {
        return Err(Error::Structural(format!(
            "invariant classes pair to {cross}, expected a positive number"
        )));
    }
    Ok(InvariantClasses {
        alpha_plus_omega: lattice.pair(&plus.alpha, omega)?,
        alpha_minus_omega: lattice.pair(&minus.alpha, omega)?,
        alpha_plus_nef: plus.alpha_nef,
        alpha_minus_nef: minus.alpha_nef,
        alpha_plus: plus.alpha,
        alpha_minus: minus.alpha,
        cross_pairing: cross,
        r1: plus.r1,
    })
}

/// `M_* M - lambda2 Id`. Zero exactly when no curve is contracted at the
/// level of classes.
pub fn pushpull_defect(
    m_pull: &RatMatrix,
    lattice: &IntersectionLattice,
    lambda2: u64,
) -> Result<RatMatrix> {
    let push = adjoint_pushforward(m_pull, lattice)?;
    let l2 = BigRational::from_integer(BigInt::from(lambda2));
    Ok(push.mul(m_pull).sub(&RatMatrix::identity(lattice.rank).scale(&l2)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionForm {
    #[serde(serialize_with = "serialize_rat_matrix")]
    pub q: RatMatrix,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// The quadratic form `M^T G M - lambda2 G`, which must be positive
/// semidefinite.
pub fn pullback_expansion_form(
    m_pull: &RatMatrix,
    lattice: &IntersectionLattice,
    lambda2: u64,
    tol: f64,
) -> Result<ExpansionForm> {
    lattice.check_rank(m_pull.nrows())?;
    let g = lattice.gram_rat();
    let l2 = BigRational::from_integer(BigInt::from(lambda2));
    let q = m_pull.transpose().mul(&g).mul(m_pull).sub(&g.scale(&l2));
    let min_eigenvalue = if q.is_zero() {
        0.0
    } else {
        symmetric_eigenvalues(&q.to_f64())[0]
    };
    let scale = q
        .rows()
        .iter()
        .flatten()
        .map(|x| x.abs().to_f64().unwrap_or(0.0))
        .fold(1.0, f64::max);
    let psd = min_eigenvalue >= -tol * scale;
    if !psd {
        return Err(Error::Structural(format!(
            "pullback expansion form is not positive semidefinite (min eigenvalue {min_eigenvalue})"
        )));
    }
    Ok(ExpansionForm { q, min_eigenvalue, psd })
}

pub fn serialize_rat_matrix<S: serde::Serializer>(m: &RatMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.rows() {
        let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        seq.serialize_element(&r)?;
    }
    seq.end()
}
