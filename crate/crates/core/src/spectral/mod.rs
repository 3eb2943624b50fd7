//! Periodic-domain discrete calculus. Every operator here is a Fourier
//! multiplier on the torus `[0, L)^2`: derivatives, the Leray projector,
//! the mollifier family, and Sobolev-weighted norms.

mod field;
mod grid;
mod ops;

pub use field::{ScalarField, VectorField};
pub use grid::{Grid, DIM};
pub use ops::{
    dealias, divergence, gradient, gradient_part, inverse_laplacian, laplacian, leray_project,
    mollify, mollify_vector, sobolev_norm, transform_forward, transform_inverse, MollifierKind,
    Spectrum,
};
pub(crate) use ops::{check_eps, sobolev_norm_sq};
