//! Numerical toolkit for the Hermite operator `H = -Δ + |x|²`.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`] and [`hermite`]: Gauss–Hermite rules, normalized Hermite
//!   functions and the Fourier–Hermite analysis/synthesis pair (n = 1, 2).
//! * [`propagator`]: the Schrödinger flow `e^{-itH}`, spectrally and through
//!   the Mehler oscillatory kernel.
//! * [`series`]: Abel-regularized evaluation of `Σ_{k≥1} k^z e^{-itk}` and its
//!   comparison with the singular part `Γ(z+1)(it)^{-z-1}`.
//! * [`density`]: weighted orthonormal systems, their evolved densities, Schatten
//!   norms, mixed space-time norms and the Strichartz ratio harness.
//! * [`optimality`]: the coherent-state ensemble with closed-form densities and
//!   norms, a matrix oracle for the ensemble operator and the scaling fit.
//! * [`hartree`]: Strang-split evolution of the Hermite–Hartree system.

pub mod density;
pub mod error;
pub mod fit;
pub mod hartree;
pub mod hermite;
pub mod optimality;
pub mod propagator;
pub mod quadrature;
pub mod series;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
