//! Periodic grids, transforms and spectral operators.

pub mod fft;
mod field;
mod grid;
pub mod ops;
pub mod rng;

pub use field::{forward, inverse, RealVectorField, SpectralVectorField, SYMMETRY_TOLERANCE};
pub use grid::Grid;
pub use ops::{
    apply_laplacian, dealiased_product, inner, leray_project, max_gradient, norm_grad, norm_l2,
    norm_l4, norm_laplacian, norm_lp, stokes_inverse,
};
pub use rng::random_solenoidal_field;
