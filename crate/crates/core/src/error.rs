//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide error enum.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A finite-difference stencil or evaluation point left the chart domain.
    #[error("point leaves chart domain on axis {axis}: {value} not within [{lo}, {hi}]")]
    OutOfDomain { axis: usize, value: f64, lo: f64, hi: f64 },

    /// A field returned NaN or Inf at a stencil node.
    #[error("field evaluation returned a non-finite entry at {point:?}")]
    NonFinite { point: Vec<f64> },

    /// A chart interval (possibly after shrinking by a margin) is degenerate.
    #[error("degenerate domain on axis {axis}: [{lo}, {hi}]")]
    DegenerateDomain { axis: usize, lo: f64, hi: f64 },

    /// The fiber pseudo-metric h is singular at a sampled point.
    #[error("fiber metric is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },

    /// Numerical rank of a projector does not match its declared rank.
    #[error("projector rank mismatch: expected {expected}, detected {detected}")]
    RankMismatch { expected: usize, detected: usize },

    /// Gram-Schmidt encountered a vector with |h(v,v)| below tolerance.
    #[error("h-null vector in Gram-Schmidt (|h(v,v)| = {norm:.3e})")]
    NullVector { norm: f64 },

    /// Frame alignment between stencil points failed.
    #[error("adapted frame could not be aligned smoothly near {point:?}")]
    FrameDiscontinuity { point: Vec<f64> },

    /// A base-manifold connection passed as torsion-free is not symmetric.
    #[error("base connection has torsion (asymmetry {asymmetry:.3e})")]
    TorsionfulConnection { asymmetry: f64 },

    /// A phase-space point violates the mass-shell constraint.
    #[error("momentum is off the mass shell (residual {residual:.3e})")]
    OffShell { residual: f64 },

    /// A planar-sector operation received a point with nonzero transverse momentum.
    #[error("operation requires p_z = 0 (got {pz:.3e})")]
    OffPlane { pz: f64 },

    /// A spinor frame column is not in the kernel of the principal symbol.
    #[error("frame vector is not in the kernel of the principal symbol (residual {residual:.3e})")]
    FrameNotInKernel { residual: f64 },

    /// Spinor transport lost essentially all of its kernel component.
    #[error("transported spinor collapsed out of the constrained subspace (|P psi| = {norm:.3e})")]
    KernelCollapse { norm: f64 },

    /// A ray left the chart during integration.
    #[error("ray left the chart domain at tau = {tau}")]
    LeftDomain { tau: f64 },

    /// An integration step produced NaN.
    #[error("integration step rejected at tau = {tau} (non-finite state)")]
    StepRejected { tau: f64 },

    /// Parameter outside the supported domain (e.g. massless limit).
    #[error("{0}")]
    DomainError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
