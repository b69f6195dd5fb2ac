//! Numerical laboratory for curve-family modulus and vector-valued Sobolev
//! spaces on box grids.
//!
//! * [`geometry`]: grids, polylines, line integrals of cell densities.
//! * [`vectorvalues`]: normed value spaces, Bochner integrals, dual functionals.
//! * [`modulus`]: discrete p-modulus as a certified convex program.
//! * [`sobolev`]: finite-difference gradients, weak-derivative verification, W-norm.
//! * [`reshetnyak`]: upper-gradient majorants, R-norm, norm equivalence, AC bounds.
//! * [`rnp_lab`]: the `sin(nt)/n` family in l-infinity and its non-Cauchy quotients.
//! * [`suite`]: the acceptance battery.

pub mod error;
pub mod geometry;
pub mod io;
pub mod modulus;
pub mod report;
pub mod reshetnyak;
pub mod rnp_lab;
pub mod sobolev;
pub mod suite;
pub mod vectorvalues;

pub use error::{Error, Result};
pub use geometry::{CurveFamily, Grid, Polyline, ScalarField, SparseRow};
pub use vectorvalues::{DualFunctional, NormTag, VectorField};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
