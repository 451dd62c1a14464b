//! Exact and numerical polynomial machinery.

pub mod multivariate;
pub mod roots;
pub mod univariate;

pub use multivariate::MPoly;
pub use roots::{find_roots, Root, RootOptions};
pub use univariate::{f64_to_rat, rat_to_f64, GaussPoly, Poly, RatPoly};
