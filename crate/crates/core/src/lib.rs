//! Invariants of meromorphic surface maps of small topological degree:
//! action on `H^{1,1}`, dynamical degrees, algebraic stability, Green
//! potentials, Lyapunov exponents and the zero self-intersection case.

// Dense matrix code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod contraction;
pub mod currents;
pub mod ergodic;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod poly;
pub mod stability;

pub use error::{Error, Result};
pub use lattice::{CohomClass, IntersectionLattice, NefRule};
pub use models::{build_model, FamilyParams, SurfaceMapModel, SurfacePoint};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
