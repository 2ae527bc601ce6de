//! Sub-bundle geometry induced by an h-compatible projector field: Berry
//! connection and curvature, shape operators, quantum metric, the quantum
//! geometric tensor with its three-term decomposition, and residual checks
//! of the generalized Gauss-Codazzi-Mainardi identities.

mod frame;
mod ops;

use std::sync::Arc;

use crate::bundle::BundleSpec;
use crate::chart::{max_abs, CMat, FdConfig, MatrixField};
use crate::error::{Error, Result};

pub use frame::{
    adapted_frame, h_mgs, AdaptedFrame, AlignedFrameField, ClosureFrameField, FrameField,
    GaugeTransformedField, CVec, NULL_TOL, RANK_TOL,
};
pub use ops::{
    adjointness_residual, berry_connection, berry_curvature, codazzi_residuals, gauss_residuals,
    perp_connection, qgt, quantum_metric, shape_operator, BaseConnection, BerryCurvature,
    CodazziResiduals, GaussResiduals, Qgt, QgtReport, QuantumMetric, ShapeComponents,
};

/// Pointwise h-compatible idempotent of constant rank, splitting the bundle
/// into parallel (image) and perpendicular (kernel) sub-bundles.
#[derive(Clone)]
pub struct ProjectorField {
    bundle: Arc<BundleSpec>,
    field: MatrixField,
    rank: usize,
}

/// Residuals of the pointwise projector invariants.
#[derive(Debug, Clone, Copy)]
pub struct ProjectorCheck {
    pub idempotency: f64,
    pub h_compatibility: f64,
    pub trace_deviation: f64,
}

impl ProjectorField {
    pub fn new(bundle: Arc<BundleSpec>, field: MatrixField, rank: usize) -> Result<Self> {
        let n = bundle.rank();
        if rank == 0 || rank >= n {
            return Err(Error::DomainError(format!(
                "projector rank must satisfy 1 <= m < n (got m = {rank}, n = {n})"
            )));
        }
        debug_assert_eq!(field.rows(), n);
        debug_assert_eq!(field.cols(), n);
        Ok(Self { bundle, field, rank })
    }

    pub fn bundle(&self) -> &BundleSpec {
        &self.bundle
    }

    pub fn bundle_arc(&self) -> Arc<BundleSpec> {
        self.bundle.clone()
    }

    pub fn field(&self) -> &MatrixField {
        &self.field
    }

    /// Rank of the parallel sub-bundle.
    pub fn par_rank(&self) -> usize {
        self.rank
    }

    pub fn eval(&self, point: &[f64]) -> CMat {
        self.field.eval(point)
    }

    /// Residuals of P^2 = P, hP = P^dagger h and trace P = m at a point.
    pub fn validate_at(&self, point: &[f64]) -> ProjectorCheck {
        let p = self.eval(point);
        let h = self.bundle.h_at(point);
        let idem = max_abs(&(&p * &p - &p));
        let hc = max_abs(&(&h * &p - p.adjoint() * &h));
        let tr = (p.trace().re - self.rank as f64).abs().max(p.trace().im.abs());
        ProjectorCheck { idempotency: idem, h_compatibility: hc, trace_deviation: tr }
    }

    /// Covariant derivative of the projector, `del_mu P = d_mu P + [omega_mu, P]`.
    pub fn nabla_p(&self, point: &[f64], mu: usize, fd: FdConfig) -> Result<CMat> {
        let dp = self.field.fd_partial(point, mu, fd)?;
        let omega = self.bundle.omega().eval(point, mu);
        let p = self.eval(point);
        Ok(dp + &omega * &p - &p * &omega)
    }
}

/// Everything the engine derives at a single point, in the gauge of the
/// supplied frame field.
pub struct SubGeometryPoint {
    pub point: Vec<f64>,
    pub frame: AdaptedFrame,
    /// Berry connection coefficients A_{AB mu}, one m x m matrix per axis.
    pub berry: Vec<CMat>,
    pub shape: ShapeComponents,
    pub metric: QuantumMetric,
    /// Quantum geometric tensor Q_{AB mu nu}.
    pub qgt: Vec<Vec<CMat>>,
    pub qgt_report: QgtReport,
    /// Berry curvature F_{AB mu nu} from the connection-derivative route.
    pub berry_curvature: Vec<Vec<CMat>>,
    /// Parallel projection Omega_{AB mu nu} of the full curvature.
    pub omega_par_block: Vec<Vec<CMat>>,
    /// Perpendicular projection Omega_{IJ mu nu} of the full curvature.
    pub omega_perp_block: Vec<Vec<CMat>>,
    pub gauss: GaussResiduals,
}

/// Run the full per-point pipeline in one pass.
pub fn compute(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
) -> Result<SubGeometryPoint> {
    let frame = ff.frame_at(point)?;
    let berry = berry_connection(pf, ff, point, fd)?;
    let shape = shape_operator(pf, &frame, fd)?;
    let metric = quantum_metric(&frame, &shape)?;
    let q = qgt(pf, ff, point, fd)?;
    let curv = berry_curvature(pf, ff, point, fd)?;
    let gauss = gauss_residuals(pf, ff, point, fd)?;
    let (omega_par_block, omega_perp_block) = ops::full_curvature_blocks(pf, &frame, fd)?;
    Ok(SubGeometryPoint {
        point: point.to_vec(),
        frame,
        berry,
        shape,
        metric,
        qgt: q.q,
        qgt_report: q.report,
        berry_curvature: curv.f_derivative,
        omega_par_block,
        omega_perp_block,
        gauss,
    })
}
