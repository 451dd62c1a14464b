//! Parameterized map families with evaluation, preimages, degrees and their
//! indeterminacy and exceptional data.

pub mod cremona;
pub mod lift;
pub mod point;
pub mod power;
pub mod secant;
pub mod skew;
pub mod torus;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::IntersectionLattice;
use crate::linalg::{IntMatrix, RatMatrix};
use crate::poly::{MPoly, RootOptions};

pub use cremona::{CremonaFactor, CremonaMap};
pub use lift::PlaneLift;
pub use point::{ExactPoint, SurfacePoint};
pub use power::PowerMap;
pub use secant::SecantMap;
pub use skew::SkewMap;
pub use torus::{GaussInt, TorusMap};

type C = Complex64;

/// Relative tolerance below which all components of a lift count as zero.
pub const EVAL_TOL: f64 = 1e-8;

/// Complex coefficient, written as a real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coeff(pub C);

#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match CoeffRepr::deserialize(d).map_err(|_| D::Error::custom("expected a number or a [re, im] pair"))? {
            CoeffRepr::Real(x) => Coeff(C::new(x, 0.0)),
            CoeffRepr::Pair([re, im]) => Coeff(C::new(re, im)),
        })
    }
}

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

/// Gaussian integer, written as an integer or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussCoeff(pub GaussInt);

#[derive(Deserialize)]
#[serde(untagged)]
enum GaussRepr {
    Real(i64),
    Pair([i64; 2]),
}

impl<'de> Deserialize<'de> for GaussCoeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match GaussRepr::deserialize(d)
            .map_err(|_| D::Error::custom("expected an integer or an [re, im] integer pair"))?
        {
            GaussRepr::Real(x) => GaussCoeff(GaussInt::new(x, 0)),
            GaussRepr::Pair([re, im]) => GaussCoeff(GaussInt::new(re, im)),
        })
    }
}

impl Serialize for GaussCoeff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorSpec {
    Sigma,
    Linear(Vec<Vec<i64>>),
}

/// Family tag and parameters, as read from a configuration file.
/// Polynomial coefficients are little-endian; `q[i][j]` multiplies `x^i y^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyParams {
    PolynomialSkew {
        q: Vec<Vec<Coeff>>,
    },
    Secant {
        p: Vec<Coeff>,
    },
    TorusEndo {
        a: [[GaussCoeff; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<[Coeff; 2]>,
    },
    CremonaComposite {
        factors: Vec<FactorSpec>,
    },
    Power {
        degree: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    PolynomialSkew(SkewMap),
    Secant(SecantMap),
    TorusEndo(TorusMap),
    CremonaComposite(CremonaMap),
    Power(PowerMap),
}

fn serialize_exact<S: Serializer>(p: &Option<ExactPoint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.as_ref().map(|p| p.to_string()).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndeterminacyEntry {
    pub point: SurfacePoint,
    #[serde(serialize_with = "serialize_exact")]
    pub exact: Option<ExactPoint>,
    /// Class of the curve the point blows up to; `None` when unknown.
    pub image_class: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalEntry {
    pub curve_label: String,
    pub curve_class: Option<Vec<i64>>,
    pub image: SurfacePoint,
    #[serde(serialize_with = "serialize_exact")]
    pub image_exact: Option<ExactPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Preimage {
    pub point: SurfacePoint,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEstimate {
    pub modal_count: usize,
    pub agreement: f64,
    pub samples: usize,
    pub histogram: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMapModel {
    pub params: FamilyParams,
    pub family: Family,
    pub lambda2: u64,
    pub pullback: IntMatrix,
    pub lattice: IntersectionLattice,
    pub indeterminacy: Vec<IndeterminacyEntry>,
    pub exceptional: Vec<ExceptionalEntry>,
    pub notes: Vec<String>,
}

fn coeffs(v: &[Coeff]) -> Vec<C> {
    v.iter().map(|c| c.0).collect()
}

pub fn build_model(params: &FamilyParams) -> Result<SurfaceMapModel> {
    let one = C::new(1.0, 0.0);
    let zero = C::default();
    let model = match params {
        FamilyParams::PolynomialSkew { q } => {
            let m = SkewMap::new(q.iter().map(|r| coeffs(r)).collect())?;
            let d = m.degree as i64;
            SurfaceMapModel {
                params: params.clone(),
                lambda2: m.x_degree as u64,
                pullback: vec![vec![d]],
                lattice: IntersectionLattice::p2(),
                indeterminacy: vec![IndeterminacyEntry {
                    point: SurfacePoint::proj(one, zero, zero),
                    exact: Some(ExactPoint::proj_ints(1, 0, 0)),
                    image_class: Some(vec![1]),
                }],
                exceptional: vec![ExceptionalEntry {
                    curve_label: "line at infinity z = 0".into(),
                    curve_class: Some(vec![1]),
                    image: SurfacePoint::proj(zero, one, zero),
                    image_exact: Some(ExactPoint::proj_ints(0, 1, 0)),
                }],
                notes: vec![
                    "the indeterminacy point [1:0:0] is assigned the line class as its image curve class; no blowup analysis is performed".into(),
                ],
                family: Family::PolynomialSkew(m),
            }
        }
        FamilyParams::Secant { p } => {
            let m = SecantMap::new(coeffs(p))?;
            let k = (m.degree - 1) as i64;
            let indeterminacy = m
                .indeterminacy_points()?
                .into_iter()
                .map(|pt| IndeterminacyEntry {
                    exact: m.certify_exact(&pt),
                    point: pt,
                    image_class: None,
                })
                .collect();
            let exceptional = m
                .roots
                .iter()
                .map(|&z| {
                    let image_exact = m
                        .rational_roots
                        .iter()
                        .find(|r| (crate::poly::rat_to_f64(r) - z.re).abs() < 1e-9 && z.im.abs() < 1e-9)
                        .map(|r| ExactPoint::biproj_affine(r.clone(), r.clone()));
                    ExceptionalEntry {
                        curve_label: format!("horizontal line y = {}", format_c(z)),
                        curve_class: Some(vec![0, 1]),
                        image: SurfacePoint::biproj_affine(z, z),
                        image_exact,
                    }
                })
                .collect();
            SurfaceMapModel {
                params: params.clone(),
                lambda2: k as u64,
                pullback: vec![vec![0, k], vec![1, k]],
                lattice: IntersectionLattice::p1xp1(),
                indeterminacy,
                exceptional,
                notes: vec![
                    "indeterminacy points located numerically from the resultant of the cancelled numerator and denominator; image classes unknown".into(),
                ],
                family: Family::Secant(m),
            }
        }
        FamilyParams::TorusEndo { a, v } => {
            let a = [[a[0][0].0, a[0][1].0], [a[1][0].0, a[1][1].0]];
            let v = v.map(|v| [v[0].0, v[1].0]).unwrap_or([zero, zero]);
            let m = TorusMap::new(a, v)?;
            SurfaceMapModel {
                params: params.clone(),
                lambda2: m.lambda2,
                pullback: m.pullback_matrix(),
                lattice: IntersectionLattice::torus_hermitian(),
                indeterminacy: Vec::new(),
                exceptional: Vec::new(),
                notes: Vec::new(),
                family: Family::TorusEndo(m),
            }
        }
        FamilyParams::CremonaComposite { factors } => {
            let fs = factors
                .iter()
                .map(|f| match f {
                    FactorSpec::Sigma => CremonaFactor::Sigma,
                    FactorSpec::Linear(l) => CremonaFactor::Linear(l.clone()),
                })
                .collect();
            let m = CremonaMap::new(fs)?;
            let class = (m.sigma_count == 1).then(|| vec![1]);
            SurfaceMapModel {
                params: params.clone(),
                lambda2: 1,
                pullback: vec![vec![m.degree() as i64]],
                lattice: IntersectionLattice::p2(),
                indeterminacy: m
                    .indeterminacy
                    .iter()
                    .map(|p| IndeterminacyEntry {
                        point: p.to_float(),
                        exact: Some(p.clone()),
                        image_class: class.clone(),
                    })
                    .collect(),
                exceptional: m
                    .inverse_indeterminacy
                    .iter()
                    .map(|p| ExceptionalEntry {
                        curve_label: format!("curve contracted to {p}"),
                        curve_class: class.clone(),
                        image: p.to_float(),
                        image_exact: Some(p.clone()),
                    })
                    .collect(),
                notes: vec![
                    "indeterminacy computed from preimages of factor indeterminacy points; completeness is not certified".into(),
                ],
                family: Family::CremonaComposite(m),
            }
        }
        FamilyParams::Power { degree } => {
            let m = PowerMap::new(*degree)?;
            let d = *degree as u64;
            SurfaceMapModel {
                params: params.clone(),
                lambda2: d * d,
                pullback: vec![vec![d as i64]],
                lattice: IntersectionLattice::p2(),
                indeterminacy: Vec::new(),
                exceptional: Vec::new(),
                notes: Vec::new(),
                family: Family::Power(m),
            }
        }
    };
    Ok(model)
}

fn format_c(z: C) -> String {
    if z.im.abs() < 1e-12 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

impl SurfaceMapModel {
    pub fn tag(&self) -> &'static str {
        match self.family {
            Family::PolynomialSkew(_) => "polynomial_skew",
            Family::Secant(_) => "secant",
            Family::TorusEndo(_) => "torus_endo",
            Family::CremonaComposite(_) => "cremona_composite",
            Family::Power(_) => "power",
        }
    }

    pub fn pullback_rat(&self) -> RatMatrix {
        RatMatrix::from_ints(&self.pullback)
    }

    /// Homogeneous lift, for families living on `P^2`.
    pub fn plane_lift(&self) -> Option<&PlaneLift> {
        match &self.family {
            Family::PolynomialSkew(m) => Some(&m.lift),
            Family::CremonaComposite(m) => Some(&m.lift),
            Family::Power(m) => Some(&m.lift),
            _ => None,
        }
    }

    pub fn exact_lift(&self) -> Option<&[MPoly; 3]> {
        self.plane_lift().and_then(|l| l.exact.as_ref())
    }

    pub fn evaluate(&self, p: &SurfacePoint) -> Result<SurfacePoint> {
        self.evaluate_tol(p, EVAL_TOL)
    }

    pub fn evaluate_tol(&self, p: &SurfacePoint, tol: f64) -> Result<SurfacePoint> {
        match &self.family {
            Family::Secant(m) => m.evaluate(p, tol),
            Family::TorusEndo(m) => m.evaluate(p),
            _ => self.plane_lift().expect("plane family").eval(p, tol),
        }
    }

    pub fn evaluate_exact(&self, p: &ExactPoint) -> Result<ExactPoint> {
        match &self.family {
            Family::Secant(m) => m.evaluate_exact(p),
            Family::TorusEndo(_) => Err(Error::Unsupported("torus points are not exact".into())),
            _ => self.plane_lift().expect("plane family").eval_exact(p),
        }
    }

    pub fn is_indeterminate(&self, p: &SurfacePoint, tol: f64) -> bool {
        matches!(self.evaluate_tol(p, tol), Err(Error::Indeterminate(_)))
    }

    pub fn is_indeterminate_exact(&self, p: &ExactPoint) -> bool {
        matches!(self.evaluate_exact(p), Err(Error::Indeterminate(_)))
    }

    /// `I_f^- = f(E_f)`, deduplicated.
    pub fn inverse_indeterminacy(&self) -> Vec<(SurfacePoint, Option<ExactPoint>)> {
        let mut out: Vec<(SurfacePoint, Option<ExactPoint>)> = Vec::new();
        for e in &self.exceptional {
            if out.iter().all(|(p, _)| p.dist(&e.image) > 1e-12) {
                out.push((e.image, e.image_exact.clone()));
            }
        }
        out
    }

    pub fn preimages(&self, p: &SurfacePoint) -> Result<Vec<Preimage>> {
        self.preimages_with(p, RootOptions::default())
    }

    pub fn preimages_with(&self, p: &SurfacePoint, opts: RootOptions) -> Result<Vec<Preimage>> {
        for (q, _) in self.inverse_indeterminacy() {
            if q.dist(p) < EVAL_TOL {
                return Err(Error::Precondition(
                    "point lies in the image of an exceptional curve".into(),
                ));
            }
        }
        match &self.family {
            Family::PolynomialSkew(m) => m.preimages(p, opts),
            Family::Secant(m) => m.preimages(p, opts, EVAL_TOL),
            Family::TorusEndo(m) => m.preimages(p),
            Family::CremonaComposite(m) => Ok(vec![Preimage {
                point: m.preimage(p, EVAL_TOL)?,
                multiplicity: 1,
            }]),
            Family::Power(m) => m.preimages(p),
        }
    }

    /// `|det Df|^2` in the standard affine chart (constant on the torus).
    pub fn jacobian_abs2(&self, p: &SurfacePoint) -> Result<f64> {
        let (x, y) = p
            .to_affine()
            .ok_or_else(|| Error::Precondition("point outside the affine chart".into()))?;
        let j = match &self.family {
            Family::PolynomialSkew(m) => m.jacobian(x, y),
            Family::Secant(m) => m.jacobian(x, y)?,
            Family::TorusEndo(m) => {
                let a = m.linear_part();
                a[0][0] * a[1][1] - a[0][1] * a[1][0]
            }
            _ => self.plane_lift().expect("plane family").affine_jacobian(x, y)?,
        };
        Ok(j.norm_sqr())
    }

    /// Sample point: uniform on the fundamental domain for the torus, affine
    /// coordinates with real and imaginary parts uniform in `[-1, 1]` otherwise.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> SurfacePoint {
        let mut c = || C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        match &self.family {
            Family::TorusEndo(_) => {
                let (a, b) = (c(), c());
                SurfacePoint::torus(a * 0.5, b * 0.5)
            }
            Family::Secant(_) => SurfacePoint::biproj_affine(c(), c()),
            _ => SurfacePoint::affine(c(), c()),
        }
    }

    /// Counts distinct preimages of seeded random points. Fails when fewer
    /// than 99% of samples have exactly `lambda2` of them.
    pub fn topological_degree_mc(&self, n_samples: usize, seed: u64) -> Result<DegreeEstimate> {
        if n_samples == 0 {
            return Err(Error::InvalidInput("at least one sample is required".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut histogram = BTreeMap::new();
        for _ in 0..n_samples {
            let p = self.random_point(&mut rng);
            let count = match self.preimages(&p) {
                Ok(v) => v.len(),
                Err(Error::DegreeDrop { got, .. }) => got,
                Err(_) => 0,
            };
            *histogram.entry(count).or_insert(0usize) += 1;
        }
        let (&modal_count, _) = histogram
            .iter()
            .max_by_key(|&(k, v)| (*v, std::cmp::Reverse(*k)))
            .expect("nonempty");
        let hits = histogram.get(&(self.lambda2 as usize)).copied().unwrap_or(0);
        let agreement = hits as f64 / n_samples as f64;
        if agreement < 0.99 {
            return Err(Error::Structural(format!(
                "preimage count matches lambda2 = {} on only {:.1}% of samples (modal count {modal_count})",
                self.lambda2,
                100.0 * agreement
            )));
        }
        Ok(DegreeEstimate { modal_count, agreement, samples: n_samples, histogram })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Coeff {
        Coeff(C::new(x, 0.0))
    }

    fn skew(q: &[&[f64]]) -> FamilyParams {
        FamilyParams::PolynomialSkew {
            q: q.iter().map(|r| r.iter().map(|&x| c(x)).collect()).collect(),
        }
    }

    fn secant(p: &[f64]) -> FamilyParams {
        FamilyParams::Secant { p: p.iter().map(|&x| c(x)).collect() }
    }

    fn torus(a: [[i64; 2]; 2]) -> FamilyParams {
        let g = |x: i64| GaussCoeff(GaussInt::new(x, 0));
        FamilyParams::TorusEndo { a: [[g(a[0][0]), g(a[0][1])], [g(a[1][0]), g(a[1][1])]], v: None }
    }

    #[test]
    fn build_examples() {
        let m = build_model(&secant(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!((m.lambda2, m.pullback.clone()), (1, vec![vec![0, 1], vec![1, 1]]));
        let m = build_model(&skew(&[&[0.0, 0.0, 0.0, 1.0], &[], &[1.0]])).unwrap();
        assert_eq!((m.lambda2, m.pullback.clone()), (2, vec![vec![3]]));
        let m = build_model(&torus([[0, 1], [2, 2]])).unwrap();
        assert_eq!(m.lambda2, 4);
    }

    #[test]
    fn skew_evaluation() {
        let m = build_model(&skew(&[&[0.0, 0.0, 1.0], &[1.0]])).unwrap();
        let img = m.evaluate(&SurfacePoint::affine(C::new(1.0, 0.0), C::new(2.0, 0.0))).unwrap();
        assert!(img.dist(&SurfacePoint::affine(C::new(2.0, 0.0), C::new(5.0, 0.0))) < 1e-15);
        assert!(m.is_indeterminate_exact(&ExactPoint::proj_ints(1, 0, 0)));
    }

    #[test]
    fn monte_carlo_degrees() {
        let m = build_model(&skew(&[&[0.0, 0.0, 0.0, 1.0], &[], &[1.0]])).unwrap();
        assert_eq!(m.topological_degree_mc(200, 1).unwrap().modal_count, 2);
        let m = build_model(&secant(&[0.0, -1.0, 0.0, 1.0])).unwrap();
        assert_eq!(m.topological_degree_mc(200, 1).unwrap().modal_count, 2);
        let m = build_model(&torus([[2, 0], [0, 2]])).unwrap();
        assert_eq!(m.topological_degree_mc(50, 1).unwrap().modal_count, 16);
    }

    #[test]
    fn torus_jacobian_is_lambda2() {
        let m = build_model(&torus([[0, 1], [2, 2]])).unwrap();
        let p = SurfacePoint::torus(C::new(0.1, 0.7), C::new(0.4, 0.2));
        assert_eq!(m.jacobian_abs2(&p).unwrap(), 4.0);
    }

    #[test]
    fn params_from_json() {
        let json = r#"{"family":"torus_endo","a":[[0,1],[[2,0],2]]}"#;
        let p: FamilyParams = serde_json::from_str(json).unwrap();
        assert_eq!(p, torus([[0, 1], [2, 2]]));
        let json = r#"{"family":"secant","p":[-1,[0,0],1.0]}"#;
        assert_eq!(serde_json::from_str::<FamilyParams>(json).unwrap(), secant(&[-1.0, 0.0, 1.0]));
        let json = r#"{"family":"cremona_composite","factors":["sigma",{"linear":[[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        assert!(serde_json::from_str::<FamilyParams>(json).is_ok());
        let bad = r#"{"family":"secant","p":[1,0,1],"extra":1}"#;
        assert!(serde_json::from_str::<FamilyParams>(bad).is_err());
    }
}
