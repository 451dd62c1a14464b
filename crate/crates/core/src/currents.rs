//! Green potentials of the invariant currents.
//!
//! For a map of `P^2` with homogeneous lift `F` of degree `delta = lambda1`,
//! `gamma+(p) = lambda1^{-1} log |F(p)| - log |p|` (Euclidean norms, any
//! lift of `p`), and `g_n+ = sum_{j<n} lambda1^{-j} gamma+(f^j p)`.
//!
//! The pushforward series uses the chart potential
//! `u(x, y) = (1/2) log(1 + |x|^2 + |y|^2)` on the affine chart `z = 1`
//! (`u = 0` on the torus), `gamma- = lambda1^{-1} f_* u - u`, and
//! `g_n- = sum_{j<n} lambda1^{-j} f^j_* gamma-`, summed over the preimage
//! tree. Values are relative to this chart.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Coeff, Family, PlaneLift, SurfaceMapModel, SurfacePoint, EVAL_TOL};

type C = Complex64;

/// Leaf budget for preimage trees.
pub const TREE_BUDGET: u64 = 100_000;
/// Largest grid accepted by [`export_grid`].
pub const GRID_BUDGET: usize = 4096 * 4096;

enum Potential<'a> {
    Plane { lift: &'a PlaneLift, lambda1: f64 },
    Flat { lambda1: f64 },
}

fn potential(m: &SurfaceMapModel) -> Result<Potential<'_>> {
    match &m.family {
        Family::PolynomialSkew(s) => Ok(Potential::Plane { lift: &s.lift, lambda1: s.degree as f64 }),
        Family::Power(p) => Ok(Potential::Plane { lift: &p.lift, lambda1: p.degree as f64 }),
        Family::TorusEndo(t) => Ok(Potential::Flat { lambda1: t.lambda1() }),
        Family::CremonaComposite(_) => Err(Error::Precondition(
            "Green potentials need a 1-stable map whose dynamical degree is its algebraic degree".into(),
        )),
        Family::Secant(_) => Err(Error::Unsupported(
            "Green potentials are implemented on P^2 and on tori".into(),
        )),
    }
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One step of the renormalized orbit: `gamma+(p)` and `f(p)`.
fn plane_step(lift: &PlaneLift, lambda1: f64, p: &SurfacePoint) -> Result<(f64, SurfacePoint)> {
    let SurfacePoint::Proj(v) = p.normalized() else {
        return Err(Error::InvalidInput("expected a point of P^2".into()));
    };
    let img = lift.eval_raw(&v);
    let sup = img.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup <= EVAL_TOL * lift.scale() {
        return Err(Error::Indeterminate(format!("all components vanish at {v:?}")));
    }
    let gamma = norm(&img).ln() / lambda1 - lift.degree as f64 / lambda1 * norm(&v).ln();
    Ok((gamma, SurfacePoint::Proj(img).normalized()))
}

pub fn gamma_plus(m: &SurfaceMapModel, p: &SurfacePoint) -> Result<f64> {
    match potential(m)? {
        Potential::Plane { lift, lambda1 } => plane_step(lift, lambda1, p).map(|(g, _)| g),
        Potential::Flat { .. } => Ok(0.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenEvaluation {
    pub value: f64,
    pub n_used: usize,
    pub tail_bound: f64,
    pub orbit_hit_indeterminacy: bool,
    /// Largest `|gamma+|` seen along the orbit.
    pub sup_gamma: f64,
    /// `gamma+(p)` at the starting point, when defined.
    pub gamma0: Option<f64>,
    /// `lambda1^{-j} gamma+(f^j p)` for each term used.
    #[serde(skip)]
    pub terms: Vec<f64>,
}

/// Partial sums of the Green series, stopping once the geometric tail bound
/// drops below `tol` or after `n_max` terms.
pub fn green_plus(m: &SurfaceMapModel, p: &SurfacePoint, tol: f64, n_max: usize) -> Result<GreenEvaluation> {
    let (lift, lambda1) = match potential(m)? {
        Potential::Plane { lift, lambda1 } => (lift, lambda1),
        Potential::Flat { .. } => {
            return Ok(GreenEvaluation {
                value: 0.0,
                n_used: 1,
                tail_bound: 0.0,
                orbit_hit_indeterminacy: false,
                sup_gamma: 0.0,
                gamma0: Some(0.0),
                terms: vec![0.0],
            })
        }
    };
    if lambda1 <= 1.0 {
        return Err(Error::Precondition("the Green series needs lambda1 > 1".into()));
    }
    let mut out = GreenEvaluation {
        value: 0.0,
        n_used: 0,
        tail_bound: f64::INFINITY,
        orbit_hit_indeterminacy: false,
        sup_gamma: 0.0,
        gamma0: None,
        terms: Vec::new(),
    };
    let mut q = *p;
    let mut weight = 1.0;
    while out.n_used < n_max.max(1) {
        let (gamma, next) = match plane_step(lift, lambda1, &q) {
            Ok(v) => v,
            Err(Error::Indeterminate(_)) => {
                out.orbit_hit_indeterminacy = true;
                out.tail_bound = f64::INFINITY;
                return Ok(out);
            }
            Err(e) => return Err(e),
        };
        if out.n_used == 0 {
            out.gamma0 = Some(gamma);
        }
        out.terms.push(weight * gamma);
        out.value += weight * gamma;
        out.sup_gamma = out.sup_gamma.max(gamma.abs());
        out.n_used += 1;
        weight /= lambda1;
        out.tail_bound = out.sup_gamma * weight / (1.0 - 1.0 / lambda1);
        if out.tail_bound < tol {
            break;
        }
        q = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub residual: f64,
    pub used: usize,
    pub skipped: usize,
    /// Largest `lambda1 * (tail(p) + tail(f p))` over the used samples.
    pub tail_allowance: f64,
}

/// `max |g+(f p) - lambda1 (g+(p) - gamma+(p))|` over samples whose orbits
/// avoid the indeterminacy locus.
pub fn functional_equation_residual(
    m: &SurfaceMapModel,
    samples: &[SurfacePoint],
    tol: f64,
    n_max: usize,
) -> Result<ResidualReport> {
    let lambda1 = match potential(m)? {
        Potential::Plane { lambda1, .. } | Potential::Flat { lambda1 } => lambda1,
    };
    let results: Vec<Option<(f64, f64)>> = samples
        .par_iter()
        .map(|p| -> Result<Option<(f64, f64)>> {
            let here = green_plus(m, p, tol, n_max)?;
            if here.orbit_hit_indeterminacy {
                return Ok(None);
            }
            let fp = m.evaluate(p)?;
            let there = green_plus(m, &fp, tol, n_max)?;
            if there.orbit_hit_indeterminacy {
                return Ok(None);
            }
            let gamma = here.gamma0.unwrap_or(0.0);
            let r = (there.value - lambda1 * (here.value - gamma)).abs();
            Ok(Some((r, lambda1 * (here.tail_bound + there.tail_bound))))
        })
        .collect::<Result<_>>()?;
    let used: Vec<(f64, f64)> = results.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(Error::Indeterminate("every sample orbit meets the indeterminacy set".into()));
    }
    Ok(ResidualReport {
        residual: used.iter().map(|r| r.0).fold(0.0, f64::max),
        used: used.len(),
        skipped: samples.len() - used.len(),
        tail_allowance: used.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

fn chart_potential(p: &SurfacePoint) -> Option<f64> {
    match p {
        SurfacePoint::Torus(_) => Some(0.0),
        _ => p.to_affine().map(|(x, y)| 0.5 * (1.0 + x.norm_sqr() + y.norm_sqr()).ln()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenMinus {
    /// `g_1-, ..., g_n-` at the point.
    pub partial_sums: Vec<f64>,
    /// `g_k- - c sum_{j<k} (lambda2/lambda1)^j`, decreasing when `gamma- <= c`.
    pub corrected: Option<Vec<f64>>,
    pub offset: Option<f64>,
    pub lambda1: f64,
    pub leaves: u64,
    /// Set when the tree met a point without a full set of simple preimages.
    pub flagged: bool,
    pub flag_reason: Option<String>,
}

impl GreenMinus {
    pub fn value(&self) -> Option<f64> {
        self.partial_sums.last().copied()
    }
}

type TreeLevels = Vec<Vec<(SurfacePoint, f64)>>;

/// Preimage tree levels `0..=depth` as (point, multiplicity weight) pairs,
/// truncated at the first level that cannot be fully resolved.
fn preimage_tree(
    m: &SurfaceMapModel,
    p: &SurfacePoint,
    depth: usize,
) -> Result<(TreeLevels, Option<String>)> {
    if (m.lambda2 as f64).powi(depth as i32) > TREE_BUDGET as f64 {
        return Err(Error::Resource {
            step: depth,
            what: format!("lambda2^{depth} preimages exceed the budget of {TREE_BUDGET}"),
        });
    }
    let mut levels = vec![vec![(*p, 1.0)]];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (q, w) in levels.last().expect("nonempty") {
            let pre = match m.preimages(q) {
                Ok(v) => v,
                Err(e) => return Ok((levels, Some(e.to_string()))),
            };
            let total: usize = pre.iter().map(|r| r.multiplicity).sum();
            if total as u64 != m.lambda2 || pre.iter().any(|r| r.multiplicity > 1) {
                let reason = format!("{} preimages with total multiplicity {total}", pre.len());
                return Ok((levels, Some(reason)));
            }
            next.extend(pre.into_iter().map(|r| (r.point, w * r.multiplicity as f64)));
        }
        levels.push(next);
    }
    Ok((levels, None))
}

fn minus_setup(m: &SurfaceMapModel) -> Result<(f64, Option<f64>)> {
    match &m.family {
        Family::PolynomialSkew(s) => Ok((s.degree as f64, s.gamma_minus_bound())),
        Family::TorusEndo(t) => Ok((t.lambda1(), Some(0.0))),
        _ => Err(Error::Unsupported(
            "the pushforward series is implemented for polynomial skew maps and tori".into(),
        )),
    }
}

/// `g_k-(p)` for `k = 1..=n`, from `gamma-` evaluated at every node of the
/// preimage tree of depth `n - 1` (which needs one more level for `f_* u`).
pub fn green_minus_partial(m: &SurfaceMapModel, p: &SurfacePoint, n: usize) -> Result<GreenMinus> {
    let (lambda1, offset) = minus_setup(m)?;
    let (levels, reason) = preimage_tree(m, p, n)?;
    let mut flagged = reason.is_some();
    let mut flag_reason = reason;
    // u summed over each level, with multiplicity weights.
    let mut level_u = Vec::new();
    for level in &levels {
        let mut s = 0.0;
        for (q, w) in level {
            match chart_potential(q) {
                Some(u) => s += w * u,
                None => {
                    flagged = true;
                    flag_reason.get_or_insert_with(|| "preimage tree left the affine chart".into());
                    s = f64::NAN;
                }
            }
        }
        level_u.push(s);
    }
    // f^j_* gamma- at p equals lambda1^{-1} U_{j+1} - U_j.
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for j in 0..n.min(levels.len().saturating_sub(1)) {
        let push = level_u[j + 1] / lambda1 - level_u[j];
        acc += push / lambda1.powi(j as i32);
        partial_sums.push(acc);
    }
    let ratio = m.lambda2 as f64 / lambda1;
    let corrected = offset.map(|c| {
        let mut geo = 0.0;
        partial_sums
            .iter()
            .enumerate()
            .map(|(k, g)| {
                geo += ratio.powi(k as i32);
                g - c * geo
            })
            .collect()
    });
    Ok(GreenMinus {
        leaves: levels.last().map_or(0, |l| l.len() as u64),
        partial_sums,
        corrected,
        offset,
        lambda1,
        flagged,
        flag_reason,
    })
}

/// `lambda1^{-j} f^j_* c` at `p` for `j = 0..=depth`, summing the constant
/// over the actual preimage tree.
pub fn pushforward_constant_levels(
    m: &SurfaceMapModel,
    p: &SurfacePoint,
    depth: usize,
    c: f64,
) -> Result<Vec<f64>> {
    let (lambda1, _) = minus_setup(m)?;
    let (levels, reason) = preimage_tree(m, p, depth)?;
    if let Some(r) = reason {
        return Err(Error::Numerical(format!("preimage tree incomplete: {r}")));
    }
    Ok(levels
        .iter()
        .enumerate()
        .map(|(j, l)| l.iter().map(|(_, w)| w * c).sum::<f64>() / lambda1.powi(j as i32))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Plus,
    Minus,
}

/// Cell `(s, t)` sits at `base + s u + t v` in affine coordinates (torus
/// coordinates for tori).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSlice {
    pub base: [Coeff; 2],
    pub u: [Coeff; 2],
    pub v: [Coeff; 2],
    pub s_range: [f64; 2],
    pub t_range: [f64; 2],
}

impl AffineSlice {
    /// The real plane `z = 1`, `(x, y) in [lo, hi]^2`.
    pub fn real_square(lo: f64, hi: f64) -> Self {
        let c = |re: f64| Coeff(C::new(re, 0.0));
        AffineSlice {
            base: [c(0.0), c(0.0)],
            u: [c(1.0), c(0.0)],
            v: [c(0.0), c(1.0)],
            s_range: [lo, hi],
            t_range: [lo, hi],
        }
    }

    pub fn axis(range: [f64; 2], n: usize, i: usize) -> f64 {
        if n <= 1 {
            range[0]
        } else {
            range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
        }
    }

    pub fn point(&self, m: &SurfaceMapModel, s: f64, t: f64) -> SurfacePoint {
        let x = self.base[0].0 + self.u[0].0 * s + self.v[0].0 * t;
        let y = self.base[1].0 + self.u[1].0 * s + self.v[1].0 * t;
        match m.family {
            Family::TorusEndo(_) => SurfacePoint::torus(x, y),
            Family::Secant(_) => SurfacePoint::biproj_affine(x, y),
            _ => SurfacePoint::affine(x, y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridParams {
    pub nx: usize,
    pub ny: usize,
    pub tol: f64,
    pub n_max: usize,
    /// Depth of the pushforward series.
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenGrid {
    pub slice: AffineSlice,
    pub which: Which,
    pub nx: usize,
    pub ny: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, `values[j * nx + i]` at `(xs[i], ys[j])`; `NaN` when masked.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

pub fn export_grid(m: &SurfaceMapModel, slice: &AffineSlice, which: Which, gp: GridParams) -> Result<GreenGrid> {
    if gp.nx == 0 || gp.ny == 0 || gp.nx.saturating_mul(gp.ny) > GRID_BUDGET {
        return Err(Error::Resource {
            step: 0,
            what: format!("grid {}x{} outside 1..=4096^2 cells", gp.nx, gp.ny),
        });
    }
    let xs: Vec<f64> = (0..gp.nx).map(|i| AffineSlice::axis(slice.s_range, gp.nx, i)).collect();
    let ys: Vec<f64> = (0..gp.ny).map(|j| AffineSlice::axis(slice.t_range, gp.ny, j)).collect();
    let cells: Vec<Option<f64>> = (0..gp.nx * gp.ny)
        .into_par_iter()
        .map(|k| -> Result<Option<f64>> {
            let p = slice.point(m, xs[k % gp.nx], ys[k / gp.nx]);
            match which {
                Which::Plus => match green_plus(m, &p, gp.tol, gp.n_max) {
                    Ok(g) if !g.orbit_hit_indeterminacy => Ok(Some(g.value)),
                    Ok(_) | Err(Error::Indeterminate(_)) => Ok(None),
                    Err(e) => Err(e),
                },
                Which::Minus => match green_minus_partial(m, &p, gp.depth) {
                    Ok(g) if !g.flagged => Ok(g.value()),
                    Ok(_) => Ok(None),
                    Err(e) => Err(e),
                },
            }
        })
        .collect::<Result<_>>()?;
    Ok(GreenGrid {
        slice: slice.clone(),
        which,
        nx: gp.nx,
        ny: gp.ny,
        xs,
        ys,
        mask: cells.iter().map(|c| c.is_none()).collect(),
        values: cells.iter().map(|c| c.unwrap_or(f64::NAN)).collect(),
    })
}
