//! Numerical engine for the quantum geometry of Hermitian vector bundles.
//!
//! Given a coordinate chart, a fiber pseudo-metric, a connection and a
//! projector field of constant rank, the crate computes the induced
//! sub-bundle geometry: Berry connection and curvature, shape operators,
//! quantum metric and quantum geometric tensor, together with residual
//! verification of the generalized Gauss-Codazzi-Mainardi identities.
//!
//! The `dirac` module carries the curved-spacetime application (tetrads,
//! spin connection, mass-shell phase space, spectral projectors and the
//! analytic phase-space tensors, with hyperbolic-plane models), and `rays`
//! integrates the associated semiclassical characteristic dynamics.

pub mod bundle;
pub mod chart;
pub mod error;
pub mod models;
pub mod rays;
pub mod subgeometry;

pub mod dirac;

pub use error::{Error, Result};
