//! First Steklov–Dirichlet eigenvalue of eccentric spherical shells in
//! `R^(n+2)`.
//!
//! The Dirichlet-to-Neumann map of the shell, written in bispherical
//! coordinates and a Gegenbauer basis on the outer sphere, is a symmetric
//! tridiagonal operator. Its finite sections give upper bounds for the
//! eigenvalue that converge exponentially; the Rayleigh quotient of the
//! truncated eigenfunction certifies the result.
//!
//! Everything numeric is generic over [`Real`]; [`f64`] and the double-word
//! [`DoubleDouble`] are provided.

pub mod dd;
pub mod driver;
pub mod error;
pub mod gegenbauer;
pub mod geometry;
pub mod operator;
pub mod quadrature;
pub mod rayleigh;
pub mod scalar;
pub mod trideig;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use geometry::{derive_frame, BisphericalFrame, BisphericalPoint, ShellConfig};
pub use operator::{assemble, TridiagonalMatrix};
pub use scalar::{Precision, Real};
pub use trideig::{smallest_eigenvalues, sturm_count, EigenPair};

pub type Shell64 = ShellConfig<f64>;
pub type ShellDd = ShellConfig<DoubleDouble>;
pub type Frame64 = BisphericalFrame<f64>;
pub type FrameDd = BisphericalFrame<DoubleDouble>;
