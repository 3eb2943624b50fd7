//! Pseudo-spectral solvers for a nonhomogeneous compressible-incompressible
//! fluid model on the periodic square.
//!
//! The crate bundles three epsilon-approximation schemes (mollified
//! projection, continuous projection penalty, artificial compressibility),
//! a reduction oracle for density-only pressure laws, the symbol and
//! symmetrizer analysis of the first-order system, and the diagnostics used
//! to cross-validate the schemes.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod integrate;
pub mod io;
pub mod model;
pub mod schemes;
pub mod spectral;

pub use error::{Error, Result};
