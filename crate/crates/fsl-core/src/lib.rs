//! Numerical laboratory for scalar conservation laws with critical
//! fractional dissipation,
//!     d_t u + div f(u) + Lambda u = 0,   Lambda = (-Delta)^{1/2},
//! posed with shock-like data that never decays at infinity.
//!
//! The non-decaying part is carried analytically as a far-field background
//! and only the decaying deviation ever meets the periodic spectral
//! machinery. Physical-frame and similarity-frame solvers share the same
//! monotone convection core; the similarity frame treats its entire linear
//! part exactly (multiplier plus spectral dilation), which is what makes
//! long-horizon profile and decay-rate measurements affordable.

pub mod calculus;
pub mod config;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod farfield;
pub mod field;
pub mod fit;
pub mod flux;
pub mod grid;
pub mod norms;
pub mod poisson;
pub mod quadrature;
pub mod runner;
pub mod selfsimilar;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
