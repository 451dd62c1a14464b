//! Section runners and report assembly.

use std::path::Path;

use degreelab::contraction::contraction_report;
use degreelab::currents::{
    export_grid, functional_equation_residual, green_minus_partial, pushforward_constant_levels, GreenGrid,
    GridParams,
};
use degreelab::ergodic::{
    exponent_sum_check, haar_invariance_check, jacobian_constancy, lyapunov_exponents, JACOBIAN_TOL, SUM_TOL_EXACT,
    SUM_TOL_MC,
};
use degreelab::lattice::{
    exact_spectrum, invariant_classes, pullback_expansion_form, pushpull_defect, spectral_analysis,
};
use degreelab::linalg::RatMatrix;
use degreelab::stability::{
    check_one_stability, lambda1_estimate, matrix_degree_prediction, symbolic_degree_sequence, DEGREE_BUDGET,
};
use degreelab::{build_model, Error, SurfaceMapModel, SurfacePoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{load_config, Command, ConfigError, RunConfig};
use crate::output::{canonical_json, content_hash, grid_csv, write_atomic};

pub const EXIT_OK: i32 = 0;
/// Output directory could not be written.
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const REPORT_FILE: &str = "report.json";
pub const GRID_FILE: &str = "grid.csv";
pub const GRID_META_FILE: &str = "grid.meta.json";

/// Sections run by `report`, in order.
pub const ALL_SECTIONS: [&str; 7] = ["spectral", "pushpull", "degrees", "stability", "green", "ergodic", "contraction"];

pub fn sections_for(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Degrees => &["degrees"],
        Command::Stability => &["stability"],
        Command::Spectral => &["spectral", "pushpull"],
        Command::Green => &["green"],
        Command::Ergodic => &["ergodic"],
        Command::Contraction => &["contraction"],
        Command::Report => &ALL_SECTIONS,
        Command::Validate => &[],
    }
}

enum Outcome {
    Done(Value),
    NotApplicable(String),
}

type SectionResult = degreelab::Result<Outcome>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    NotApplicable,
    Config,
    Numerical,
}

fn classify(e: &Error) -> Class {
    match e {
        Error::Unsupported(_) | Error::Precondition(_) | Error::HypothesisViolation(_) => Class::NotApplicable,
        Error::InvalidInput(_) | Error::ModelRejected(_) | Error::DimensionMismatch { .. } => Class::Config,
        _ => Class::Numerical,
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub report: Value,
    pub grid: Option<(GreenGrid, Value)>,
    pub exit_code: i32,
}

impl Artifacts {
    pub fn report_json(&self) -> String {
        canonical_json(&self.report).expect("report values serialize")
    }

    pub fn write(&self, out: &Path) -> std::io::Result<()> {
        if let Some((grid, meta)) = &self.grid {
            write_atomic(out, GRID_FILE, grid_csv(grid).as_bytes())?;
            write_atomic(out, GRID_META_FILE, canonical_json(meta).expect("meta serializes").as_bytes())?;
        }
        write_atomic(out, REPORT_FILE, self.report_json().as_bytes())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn rat_rows(m: &RatMatrix) -> Vec<Vec<String>> {
    m.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

struct Ctx<'a> {
    cmd: Command,
    cfg: &'a RunConfig,
    m: &'a SurfaceMapModel,
    grid: Option<GreenGrid>,
}

fn spectral(ctx: &mut Ctx) -> SectionResult {
    let (m, tol) = (ctx.m, ctx.cfg.tolerances.spectral);
    let pull = m.pullback_rat();
    let method = "exact characteristic polynomial, roots of its square-free factors refined by Newton";
    match spectral_analysis(&pull, m.lambda2, &m.lattice, tol) {
        Ok(r) => {
            let inv = invariant_classes(&pull, m.lambda2, &m.lattice, &m.lattice.kahler_class(), tol)?;
            Ok(Outcome::Done(json!({
                "verdict": "ok",
                "method": method,
                "tolerance": tol,
                "lambda1": r.r1,
                "lambda2": m.lambda2,
                "analysis": r,
                "invariant_classes": inv,
            })))
        }
        Err(Error::HypothesisViolation(msg)) => Ok(Outcome::Done(json!({
            "verdict": "hypothesis_violation",
            "message": msg,
            "method": method,
            "tolerance": tol,
            "lambda2": m.lambda2,
            "char_poly": pull.char_poly().coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }))),
        Err(e) => Err(e),
    }
}

fn pushpull(ctx: &mut Ctx) -> SectionResult {
    let (m, tol) = (ctx.m, ctx.cfg.tolerances.spectral);
    let pull = m.pullback_rat();
    let defect = pushpull_defect(&pull, &m.lattice, m.lambda2)?;
    let q = pullback_expansion_form(&pull, &m.lattice, m.lambda2, tol)?;
    Ok(Outcome::Done(json!({
        "method": "exact rational arithmetic; PSD test on the eigenvalues of the expansion form",
        "tolerance": tol,
        "defect": rat_rows(&defect),
        "defect_zero": defect.is_zero(),
        "expansion_form": q,
    })))
}

fn degrees(ctx: &mut Ctx) -> SectionResult {
    let (m, cfg) = (ctx.m, ctx.cfg);
    let tol = cfg.tolerances.spectral;
    let pull = m.pullback_rat();
    let cp = pull.char_poly();
    let (lambda1, verdict) = match spectral_analysis(&pull, m.lambda2, &m.lattice, tol) {
        Ok(r) => (r.r1, json!({"verdict": "ok"})),
        Err(Error::HypothesisViolation(msg)) => {
            let r = exact_spectrum(&cp)?.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max);
            (r, json!({"verdict": "hypothesis_violation", "message": msg}))
        }
        Err(e) => return Err(e),
    };

    let steps = cfg.degree_steps;
    let symbolic = match symbolic_degree_sequence(m, steps) {
        Ok(ds) => Some((ds, None)),
        // The full report keeps what fits in the budget; the degrees command fails.
        Err(Error::Resource { step, what }) if ctx.cmd == Command::Report && step >= 2 => {
            let ds = symbolic_degree_sequence(m, step - 1)?;
            Some((ds, Some(format!("truncated at {} of {steps} steps: {what}", step - 1))))
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let symbolic = match symbolic {
        Some((ds, truncated)) => {
            let est = lambda1_estimate(&ds).ok();
            let prediction = matrix_degree_prediction(m, ds.degrees.len());
            json!({
                "available": true,
                "method": "exact composition of the homogeneous lift with common factors removed",
                "degree_budget": DEGREE_BUDGET,
                "degrees": ds.degrees,
                "truncated": truncated,
                "lambda1_estimate": est,
                "consistent_with_lambda1": est.as_ref().map(|e| e.consistent_with(lambda1)),
                "matrix_prediction": prediction,
            })
        }
        None => json!({
            "available": false,
            "reason": format!("the {} family has no rational homogeneous lift on P^2", m.tag()),
        }),
    };

    let mc = m.topological_degree_mc(cfg.degree_samples, cfg.seed)?;
    Ok(Outcome::Done(json!({
        "lambda1": {
            "value": lambda1,
            "method": "spectral radius of the pullback on the intersection lattice",
            "tolerance": tol,
            "certification": verdict,
        },
        "lambda2": {
            "value": m.lambda2,
            "method": "exact, from the model",
        },
        "pullback": m.pullback,
        "char_poly": cp.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "symbolic": symbolic,
        "topological_degree": {
            "method": "distinct preimages of seeded random points",
            "seed": cfg.seed,
            "required_agreement": 0.99,
            "estimate": mc,
        },
    })))
}

fn stability(ctx: &mut Ctx) -> SectionResult {
    let (m, cfg) = (ctx.m, ctx.cfg);
    if m.exceptional.is_empty() && m.indeterminacy.is_empty() {
        return Ok(Outcome::NotApplicable(
            "no indeterminacy points or exceptional curves, so the map is holomorphic and 1-stable".into(),
        ));
    }
    let tol = cfg.tolerances.stability;
    let r = check_one_stability(m, cfg.horizon, tol)?;
    Ok(Outcome::Done(json!({
        "method": "forward orbits of f(E_f), exact while coordinates stay rational and small, relative tolerance otherwise",
        "tolerance": tol,
        "report": r,
    })))
}

fn sample_points(m: &SurfaceMapModel, n: usize, seed: u64) -> Vec<SurfacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| m.random_point(&mut rng)).collect()
}

fn monotone(v: &[f64], tol: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + tol)
}

fn green_minus_block(m: &SurfaceMapModel, pts: &[SurfacePoint], depth: usize, tol: f64) -> degreelab::Result<Value> {
    let runs = pts
        .iter()
        .map(|p| green_minus_partial(m, p, depth))
        .collect::<degreelab::Result<Vec<_>>>()?;
    let usable: Vec<_> = runs.iter().filter(|g| !g.flagged).collect();
    let raw = usable.iter().filter(|g| monotone(&g.partial_sums, tol)).count();
    let corrected = usable
        .iter()
        .filter(|g| g.corrected.as_deref().is_some_and(|h| monotone(h, tol)))
        .count();
    let lambda1 = runs.first().map_or(f64::NAN, |g| g.lambda1);

    let ratio = m.lambda2 as f64 / lambda1;
    let mut scaling_err = 0.0f64;
    let mut scaling_points = 0usize;
    for p in pts.iter().zip(&runs).filter(|(_, g)| !g.flagged).map(|(p, _)| p).take(10) {
        let levels = pushforward_constant_levels(m, p, depth, 1.0)?;
        for (j, v) in levels.iter().enumerate() {
            let expect = ratio.powi(j as i32);
            scaling_err = scaling_err.max((v - expect).abs() / expect);
        }
        scaling_points += 1;
    }
    Ok(json!({
        "available": true,
        "method": "pushforward series over the exact preimage tree",
        "depth": depth,
        "tolerance": tol,
        "points": pts.len(),
        "flagged": runs.len() - usable.len(),
        "offset": runs.first().and_then(|g| g.offset),
        "monotone_partial_sums": raw,
        "monotone_corrected_sums": corrected,
        "all_corrected_monotone": corrected == usable.len(),
        "values": runs.iter().map(|g| g.value()).collect::<Vec<_>>(),
        "constant_scaling": {
            "method": "lambda1^-j f^j_* 1 against (lambda2/lambda1)^j",
            "points": scaling_points,
            "max_relative_error": scaling_err,
        },
    }))
}

fn green(ctx: &mut Ctx) -> SectionResult {
    let (m, cfg) = (ctx.m, ctx.cfg);
    let tol = &cfg.tolerances;
    let pts = sample_points(m, cfg.samples, cfg.seed);
    let plus = functional_equation_residual(m, &pts, tol.green, cfg.n_max)?;
    let minus = match green_minus_block(m, &pts, cfg.depth, tol.green) {
        Ok(v) => v,
        Err(e) if classify(&e) == Class::NotApplicable => json!({"available": false, "reason": e.to_string()}),
        Err(e) => return Err(e),
    };
    let grid = match &cfg.slice {
        None => Value::Null,
        Some(s) => {
            let gp = GridParams { nx: cfg.resolution, ny: cfg.resolution, tol: tol.green, n_max: cfg.n_max, depth: cfg.depth };
            match export_grid(m, &s.affine(), s.which, gp) {
                Ok(g) => {
                    let masked = g.mask.iter().filter(|&&b| b).count();
                    let v = json!({"file": GRID_FILE, "meta": GRID_META_FILE, "nx": g.nx, "ny": g.ny, "masked": masked});
                    ctx.grid = Some(g);
                    v
                }
                Err(e) if classify(&e) == Class::NotApplicable => json!({"available": false, "reason": e.to_string()}),
                Err(e) => return Err(e),
            }
        }
    };
    Ok(Outcome::Done(json!({
        "plus": {
            "method": "escape-rate series with geometric tail bound",
            "tolerance": {"series": tol.green, "residual": tol.residual},
            "n_max": cfg.n_max,
            "functional_equation": plus,
            "pass": plus.residual < tol.residual,
        },
        "minus": minus,
        "grid": grid,
    })))
}

fn ergodic(ctx: &mut Ctx) -> SectionResult {
    let (m, cfg) = (ctx.m, ctx.cfg);
    let ly = lyapunov_exponents(m, cfg.lyapunov_steps, cfg.lyapunov_samples, cfg.seed)?;
    let sum_exact = exponent_sum_check(&ly.exact, m.lambda2);
    let sum_mc = exponent_sum_check(&ly.monte_carlo, m.lambda2);
    let haar = match haar_invariance_check(m, cfg.haar_n) {
        Ok(h) => to_value(&h),
        Err(e @ Error::Precondition(_)) => json!({"available": false, "reason": e.to_string()}),
        Err(e) => return Err(e),
    };
    let jac = jacobian_constancy(m, cfg.samples, cfg.seed)?;
    Ok(Outcome::Done(json!({
        "lyapunov": {
            "method": "QR iteration of Df along seeded orbits, against exact eigenvalue moduli",
            "tolerance": SUM_TOL_MC,
            "report": ly,
        },
        "sum_check": {
            "exact": sum_exact,
            "monte_carlo": sum_mc,
            "tolerance": {"exact": SUM_TOL_EXACT, "monte_carlo": SUM_TOL_MC},
            // Monte Carlo tolerances only bind when the eigenvalue moduli differ.
            "monte_carlo_asserted": ly.hyperbolic,
            "pass": sum_exact.pass && (sum_mc.pass || !ly.hyperbolic),
        },
        "haar": {
            "method": "exact image count of the N-torsion grid",
            "report": haar,
        },
        "jacobian": {
            "method": "|det Df|^2 at seeded random points",
            "tolerance": JACOBIAN_TOL,
            "report": jac,
        },
    })))
}

fn contraction(ctx: &mut Ctx) -> SectionResult {
    let (m, cfg) = (ctx.m, ctx.cfg);
    let tol = &cfg.tolerances;
    let r = contraction_report(m, tol.zero, tol.eigen, cfg.closure_cap)?;
    if !r.zero_case {
        return Ok(Outcome::NotApplicable(format!(
            "(alpha+)^2 = {:e} is not zero within {:e}",
            r.alpha_plus_sq, tol.zero
        )));
    }
    Ok(Outcome::Done(json!({
        "method": "lattice pairing of the invariant classes; exact span closure with Sylvester's criterion; exact rational roots of the characteristic polynomial",
        "tolerance": {"zero": tol.zero, "eigen": tol.eigen},
        "closure_cap": cfg.closure_cap,
        "report": r,
        "unchecked": "the zero-case condition that quantifies over all modifications of the surface has no finite certificate and is not checked",
    })))
}

fn run_section(name: &str, ctx: &mut Ctx) -> SectionResult {
    match name {
        "spectral" => spectral(ctx),
        "pushpull" => pushpull(ctx),
        "degrees" => degrees(ctx),
        "stability" => stability(ctx),
        "green" => green(ctx),
        "ergodic" => ergodic(ctx),
        "contraction" => contraction(ctx),
        other => unreachable!("unknown section {other}"),
    }
}

fn settings(cfg: &RunConfig) -> Value {
    json!({
        "horizon": cfg.horizon,
        "n_max": cfg.n_max,
        "degree_steps": cfg.degree_steps,
        "degree_samples": cfg.degree_samples,
        "resolution": cfg.resolution,
        "depth": cfg.depth,
        "samples": cfg.samples,
        "lyapunov_steps": cfg.lyapunov_steps,
        "lyapunov_samples": cfg.lyapunov_samples,
        "haar_n": cfg.haar_n,
        "closure_cap": cfg.closure_cap,
        "slice": cfg.slice,
    })
}

fn model_summary(m: &SurfaceMapModel) -> Value {
    json!({
        "family": m.tag(),
        "lambda2": m.lambda2,
        "pullback": m.pullback,
        "lattice": m.lattice,
        "indeterminacy": m.indeterminacy,
        "exceptional": m.exceptional,
        "notes": m.notes,
    })
}

fn failure_record(section: &str, e: &Error) -> Value {
    json!({"section": section, "kind": e.kind(), "message": e.to_string()})
}

/// Runs `cmd` on an already parsed configuration. Sections that do not apply
/// are listed under `not_applicable`; the first hard failure stops the run.
pub fn run(cmd: Command, cfg: &RunConfig) -> Artifacts {
    let model_hash = content_hash(&cfg.model).expect("model params serialize");
    let mut report = Map::new();
    report.insert("command".into(), json!(cmd.name()));
    report.insert("library_version".into(), json!(degreelab::VERSION));
    report.insert("model_hash".into(), json!(model_hash));
    report.insert("seed".into(), json!(cfg.seed));
    report.insert("tolerances".into(), to_value(&cfg.tolerances));
    report.insert("settings".into(), settings(cfg));
    report.insert("params".into(), to_value(&cfg.model));

    let finish = |mut report: Map<String, Value>, status: &str, failure: Value, exit_code: i32| {
        report.insert("status".into(), json!(status));
        report.insert("partial".into(), json!(!failure.is_null()));
        report.insert("failure".into(), failure);
        (report, exit_code)
    };

    let m = match build_model(&cfg.model) {
        Ok(m) => m,
        Err(e) => {
            let code = if classify(&e) == Class::Numerical { EXIT_NUMERICAL } else { EXIT_CONFIG };
            let (report, exit_code) = finish(report, "failed", failure_record("model", &e), code);
            return Artifacts { report: Value::Object(report), grid: None, exit_code };
        }
    };
    report.insert("model".into(), model_summary(&m));
    if cmd == Command::Validate {
        report.insert("validation".into(), json!({"schema": "ok", "model_invariants": "ok"}));
    }

    let mut ctx = Ctx { cmd, cfg, m: &m, grid: None };
    let mut sections = Map::new();
    let mut not_applicable = Map::new();
    let mut failed = None;
    for &name in sections_for(cmd) {
        match run_section(name, &mut ctx) {
            Ok(Outcome::Done(v)) => {
                sections.insert(name.into(), v);
            }
            Ok(Outcome::NotApplicable(reason)) => {
                not_applicable.insert(name.into(), json!(reason));
            }
            Err(e) => match classify(&e) {
                Class::NotApplicable => {
                    not_applicable.insert(name.into(), json!(e.to_string()));
                }
                Class::Config => {
                    failed = Some((failure_record(name, &e), EXIT_CONFIG));
                    break;
                }
                Class::Numerical => {
                    failed = Some((failure_record(name, &e), EXIT_NUMERICAL));
                    break;
                }
            },
        }
    }
    report.insert("sections".into(), Value::Object(sections));
    report.insert("not_applicable".into(), Value::Object(not_applicable));

    let grid = ctx.grid.take().filter(|_| failed.is_none()).map(|g| {
        let masked = g.mask.iter().filter(|&&b| b).count();
        let meta = json!({
            "model_hash": model_hash,
            "library_version": degreelab::VERSION,
            "seed": cfg.seed,
            "which": g.which,
            "slice": g.slice,
            "nx": g.nx,
            "ny": g.ny,
            "masked": masked,
            "columns": ["x", "y", "value"],
            "order": "row-major, x fastest",
            "tolerance": cfg.tolerances.green,
            "n_max": cfg.n_max,
            "depth": cfg.depth,
        });
        (g, meta)
    });

    let (report, exit_code) = match failed {
        None => finish(report, "ok", Value::Null, EXIT_OK),
        Some((f, code)) => finish(report, "failed", f, code),
    };
    Artifacts { report: Value::Object(report), grid, exit_code }
}

fn config_failure(cmd: Command, e: &ConfigError) -> Artifacts {
    let report = json!({
        "command": cmd.name(),
        "library_version": degreelab::VERSION,
        "status": "invalid_config",
        "partial": true,
        "failure": {"kind": "invalid_config", "field": e.path, "message": e.message},
    });
    Artifacts { report, grid: None, exit_code: EXIT_CONFIG }
}

/// Loads the configuration, runs, writes the artifacts into `out` and
/// returns the exit code.
pub fn execute(cmd: Command, config: &Path, out: &Path, seed: Option<u64>) -> i32 {
    let artifacts = match load_config(config) {
        Err(e) => {
            eprintln!("{e}");
            config_failure(cmd, &e)
        }
        Ok(mut cfg) => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            match cfg.command {
                Some(c) if c != cmd => {
                    let e = ConfigError {
                        path: Some("command".into()),
                        message: format!("config is for `{}` but `{}` was requested", c.name(), cmd.name()),
                    };
                    eprintln!("{e}");
                    config_failure(cmd, &e)
                }
                _ => run(cmd, &cfg),
            }
        }
    };
    if let Err(e) = artifacts.write(out) {
        eprintln!("cannot write to {}: {e}", out.display());
        return EXIT_IO;
    }
    if let Some(f) = artifacts.report.get("failure").filter(|f| !f.is_null()) {
        eprintln!("{}: {}", cmd.name(), f["message"].as_str().unwrap_or("failed"));
    }
    artifacts.exit_code
}
