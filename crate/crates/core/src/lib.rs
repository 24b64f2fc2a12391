//! Approximation of probability measures on compact manifolds by closed,
//! near-constant-speed discrete curves.
//!
//! The library minimizes a truncated kernel discrepancy between a target
//! measure (given by Fourier coefficients with respect to Laplace-Beltrami
//! eigenfunctions) and the empirical measure of the curve points, using a
//! nonlinear conjugate gradient method on the product manifold. Constructive
//! exact-quadrature curves on the torus, the sphere and the rotation group
//! serve as independent verification oracles and as initializations.
//!
//! Supported manifolds: flat tori T^d, the unit sphere S^2, the rotation
//! group SO(3) and the Grassmannian of 2-planes in R^4.

pub mod cg;
pub mod curve;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod measure;
pub mod objective;
pub mod quadcurve;
pub mod spectral;

pub use error::{Error, Result};
pub use manifold::{ManifoldId, Point, Tangent, TangentVector};
