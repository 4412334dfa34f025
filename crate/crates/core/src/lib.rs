//! Lower bounds for the first Dirichlet eigenvalue of the degenerate
//! p-Laplacian (p > 2) on planar domains given as images of conformal maps,
//! together with a finite-difference Rayleigh-quotient oracle used to check
//! every bound.
//!
//! Module map:
//!
//! * [`conformal`]: closed-form conformal maps, Jacobians, boundary traces.
//! * [`quadrature`]: tensor Gauss-Legendre integration over the disc and rectangles.
//! * [`sobolev`]: Sobolev-Poincare constants and composition-operator norms.
//! * [`spectral`]: the eigenvalue bounds, including the quasidisc constants.
//! * [`eigen`]: rasterized domains and the numerical eigenvalue oracle.
//! * [`cli`]: the `plap` command-line front end.

pub mod cli;
pub mod conformal;
pub mod eigen;
mod error;
pub mod optimize;
pub mod quadrature;
pub mod sobolev;
pub mod spectral;

pub use conformal::{AnalyticMap, BaseDomain, MapKind};
pub use eigen::{EigenEstimate, RasterDomain, SolverConfig};
pub use error::{Error, Result};
pub use quadrature::{Estimate, QuadratureGrid};
pub use spectral::{BoundReport, TheoremTag};
