//! Pseudospectral solver and verification suite for the characteristic
//! problem of the ultrahyperbolic equation
//!
//! ```text
//! (∂²/∂t∂s + Δ_x̄ − Δ_ȳ) v = 0,    v(0, s, x̄, ȳ) = v₀(s, x̄, ȳ),
//! ```
//!
//! posed with data on the characteristic hyperplane {t = 0}. In frequency
//! space the solution is a unimodular multiplier acting on the data's
//! spectrum, which makes the discrete L₂ norm an exact invariant; the same
//! solution can be represented as an integral over the quadric cone
//! {|ξ| = |η|}, and the two representations cross-validate each other.
//!
//! * [`grid`] — grids, sampled fields, Gaussian initial data;
//! * [`spectral`] — the FFT-backed transform pair in the solver's sign and
//!   normalization convention;
//! * [`propagator`] — the multiplier evolution, trajectories, residuals;
//! * [`cone`] — light-cone geometry, cone lift, amplitudes;
//! * [`quadrature`] — Gauss–Legendre / sphere rules, cone integrals,
//!   pointwise reconstruction from the cone;
//! * [`oracle`] — slow brute-force references used by tests everywhere;
//! * [`config`], [`snapshot`], [`commands`] — the file formats and
//!   verification commands behind the `uhyp` binary.

pub mod commands;
pub mod cone;
pub mod config;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
