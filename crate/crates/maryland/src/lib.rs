//! Numerical laboratory for the Maryland model
//!
//!   (H u)_n = u_{n+1} + u_{n-1} + λ tan π(θ + nα) u_n,   λ > 0, α irrational.
//!
//! The crate computes and cross-checks, at desk scale, the machinery behind
//! localization for this operator: transfer-matrix cocycles and their
//! Lyapunov exponents, the characteristic-determinant sequences P_k and its
//! pole-free regularization P̃_k, sine-kernel Lagrange interpolation with the
//! ε-uniformity measure and the q_n-driven interval scheme, box Green's
//! functions by determinant ratios and by direct solves, the (m,h)-regularity
//! classifier, and the end-to-end eigenfunction decay pipeline.
//!
//! Everything that grows or decays exponentially in the site index is held in
//! signed-log or scaled-matrix form, so products and determinants of length
//! 10^4–10^5 stay finite and comparable.

pub mod cocycle;
pub mod determinants;
pub mod error;
pub mod interpolation;
pub mod localization;
pub mod math;
pub mod torus;

pub use error::{Error, Result};
pub use math::SignedLog;
pub use determinants::ModelParams;
pub use torus::{expand_cf, frequency_from_coeffs, torus_norm, Frequency};
