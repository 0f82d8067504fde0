//! Numerical laboratory for Landau damping in the Vlasov–Poisson equation on the torus.
//!
//! * [`model`]: equilibria, interactions, grids, initial data and the self-consistent force
//! * [`linstab`]: the stability functional, its scan, sufficient conditions and dispersion roots
//! * [`volterra`]: per-mode linear response through a Volterra equation
//! * [`norms`]: hybrid analytic norms of phase-space data
//! * [`sim`]: spectral split-step solver, diagnostics, characteristics and echoes
//! * [`newton`]: Newton iteration built from linearised solves
//! * [`cli`]: configuration and the `vdl` experiment runner

pub mod cli;
pub mod error;
pub mod io;
pub mod linstab;
pub mod model;
pub mod newton;
pub mod norms;
pub mod quadrature;
pub mod sim;
pub mod spectral;
pub mod volterra;

pub use error::{Error, Result};
