//! Strict run configuration. Every omitted field falls back to the default
//! documented on it; unknown fields are rejected.

use std::path::Path;

use degreelab::currents::{AffineSlice, Which};
use degreelab::models::{Coeff, FactorSpec, GaussCoeff};
use degreelab::FamilyParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Degrees,
    Stability,
    Spectral,
    Green,
    Ergodic,
    Contraction,
    Report,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Degrees => "degrees",
            Command::Stability => "stability",
            Command::Spectral => "spectral",
            Command::Green => "green",
            Command::Ergodic => "ergodic",
            Command::Contraction => "contraction",
            Command::Report => "report",
            Command::Validate => "validate",
        }
    }
}

/// Named tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `1e-9`: subleading eigenvalue bound, PSD and nef tests.
    pub spectral: f64,
    /// `1e-9`: relative tolerance for indeterminacy along float orbits.
    pub stability: f64,
    /// `1e-12`: tail bound at which the Green series stops early.
    pub green: f64,
    /// `1e-6`: functional equation residual.
    pub residual: f64,
    /// `1e-9`: zero tests on self-intersections and pairings.
    pub zero: f64,
    /// `1e-8`: pushforward eigenvalue residual.
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { spectral: 1e-9, stability: 1e-9, green: 1e-12, residual: 1e-6, zero: 1e-9, eigen: 1e-8 }
    }
}

/// Grid slice for Green potentials, in affine (or torus) coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    /// `plus` (default) or `minus`.
    #[serde(default = "default_which")]
    pub which: Which,
    pub base: [Coeff; 2],
    pub u: [Coeff; 2],
    pub v: [Coeff; 2],
    pub s_range: [f64; 2],
    pub t_range: [f64; 2],
}

fn default_which() -> Which {
    Which::Plus
}

impl SliceSpec {
    pub fn affine(&self) -> AffineSlice {
        AffineSlice { base: self.base, u: self.u, v: self.v, s_range: self.s_range, t_range: self.t_range }
    }
}

macro_rules! defaults {
    ($($name:ident: $t:ty = $v:expr;)*) => {
        $(fn $name() -> $t { $v })*
    };
}

defaults! {
    default_horizon: usize = 50;
    default_n_max: usize = 30;
    default_degree_steps: usize = 6;
    default_degree_samples: usize = 1000;
    default_resolution: usize = 64;
    default_depth: usize = 6;
    default_samples: usize = 100;
    default_lyapunov_steps: usize = 10_000;
    default_lyapunov_samples: usize = 4;
    default_haar_n: u64 = 3;
    default_closure_cap: usize = 16;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: FamilyParams,
    /// Must match the command given on the command line when present.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// `0`.
    #[serde(default)]
    pub seed: u64,
    /// `50`: forward steps in the stability check.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// `30`: terms of the Green series.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// `6`: iterates in the symbolic degree sequence.
    #[serde(default = "default_degree_steps")]
    pub degree_steps: usize,
    /// `1000`: random points for the preimage count.
    #[serde(default = "default_degree_samples")]
    pub degree_samples: usize,
    /// `64`: grid cells per side.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// `6`: depth of the pushforward series.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// `100`: random points for the Green checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// `10000`: QR steps per Lyapunov orbit.
    #[serde(default = "default_lyapunov_steps")]
    pub lyapunov_steps: usize,
    /// `4`: Lyapunov orbits.
    #[serde(default = "default_lyapunov_samples")]
    pub lyapunov_samples: usize,
    /// `3`: grid size for the Haar check.
    #[serde(default = "default_haar_n")]
    pub haar_n: u64,
    /// `16`: iteration cap for the exceptional span.
    #[serde(default = "default_closure_cap")]
    pub closure_cap: usize,
    /// No grid is written when absent.
    #[serde(default)]
    pub slice: Option<SliceSpec>,
}

/// A configuration that failed to load, with the offending field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.path {
            Some(p) => write!(f, "invalid config at `{p}`: {}", self.message),
            None => write!(f, "invalid config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Externally tagged copy of `FamilyParams`. The internally tagged original
/// buffers its content, which hides the path of errors below `model`.
#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[allow(dead_code)]
enum ModelMirror {
    PolynomialSkew {
        q: Vec<Vec<Coeff>>,
    },
    Secant {
        p: Vec<Coeff>,
    },
    TorusEndo {
        a: [[GaussCoeff; 2]; 2],
        #[serde(default)]
        v: Option<[Coeff; 2]>,
    },
    CremonaComposite {
        factors: Vec<FactorSpec>,
    },
    Power {
        degree: u32,
    },
}

/// Re-reads `model` through the mirror to locate the offending field.
fn locate_model_error(text: &str) -> Option<ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut model = value.get("model")?.as_object()?.clone();
    let family = model.remove("family")?.as_str()?.to_string();
    let wrapped = serde_json::json!({ family.clone(): model });
    let err = serde_path_to_error::deserialize::<_, ModelMirror>(wrapped).err()?;
    let path = err.path().to_string();
    let rest = path.strip_prefix(&family).unwrap_or(&path);
    Some(ConfigError { path: Some(format!("model{rest}")), message: err.into_inner().to_string() })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "model" {
            if let Some(located) = locate_model_error(text) {
                return located;
            }
        }
        ConfigError {
            path: (path != ".").then_some(path),
            message: e.into_inner().to_string(),
        }
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}
