//! Adapted frames for a projector field: rank-revealing column selection,
//! modified Gram-Schmidt with an indefinite Hermitian form, dual coframes,
//! and smooth frame fields for finite differencing.
//!
//! Pointwise frames are deterministic (column pivoting by largest remaining
//! norm, ties broken by lowest index) but not automatically smooth in the
//! base point; derivative-based routes therefore work with a `FrameField`
//! whose stencil frames are aligned to an anchor frame by projecting the
//! anchor columns and re-orthonormalizing, which removes gauge jumps.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::chart::CMat;
use crate::error::{Error, Result};

use super::ProjectorField;

pub type CVec = DVector<Complex64>;

/// Tolerance on singular values for numerical rank detection.
pub const RANK_TOL: f64 = 1e-8;
/// Tolerance on |h(v,v)| below which Gram-Schmidt refuses to normalize.
pub const NULL_TOL: f64 = 1e-10;

/// Per-point adapted frame: columns of `par` span image P, columns of `perp`
/// span kernel P, and `coframe` rows are the dual covectors (sigma^A rows
/// first, then sigma^I rows).
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub point: Vec<f64>,
    pub par: CMat,
    pub perp: CMat,
    pub h_par: CMat,
    pub h_perp: CMat,
    pub coframe: CMat,
    pub par_signs: Vec<f64>,
    pub perp_signs: Vec<f64>,
}

impl AdaptedFrame {
    pub fn fiber_rank(&self) -> usize {
        self.par.nrows()
    }

    pub fn par_rank(&self) -> usize {
        self.par.ncols()
    }

    /// Dual covector rows sigma^A (parallel block).
    pub fn coframe_par(&self) -> CMat {
        self.coframe.rows(0, self.par_rank()).into()
    }

    /// Dual covector rows sigma^I (perpendicular block).
    pub fn coframe_perp(&self) -> CMat {
        let m = self.par_rank();
        self.coframe.rows(m, self.fiber_rank() - m).into()
    }

    pub fn h_par_inv(&self) -> Result<CMat> {
        self.h_par
            .clone()
            .try_inverse()
            .ok_or(Error::NullVector { norm: 0.0 })
    }

    pub fn h_perp_inv(&self) -> Result<CMat> {
        self.h_perp
            .clone()
            .try_inverse()
            .ok_or(Error::NullVector { norm: 0.0 })
    }
}

pub(crate) fn h_pair(h: &CMat, u: &CVec, v: &CVec) -> Complex64 {
    (u.adjoint() * h * v)[(0, 0)]
}

/// Modified Gram-Schmidt with the (possibly indefinite) form h.
///
/// Each accepted vector is normalized to |h(s,s)| = 1 with its sign recorded.
pub fn h_mgs(h: &CMat, candidates: &[CVec]) -> Result<(CMat, Vec<f64>)> {
    let n = h.nrows();
    let mut basis: Vec<CVec> = Vec::with_capacity(candidates.len());
    let mut signs: Vec<f64> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let mut v = c.clone();
        for (s, &sign) in basis.iter().zip(&signs) {
            let coeff = h_pair(h, s, &v) * Complex64::new(sign, 0.0);
            v -= s * coeff;
        }
        let norm2 = h_pair(h, &v, &v).re;
        if norm2.abs() < NULL_TOL {
            return Err(Error::NullVector { norm: norm2.abs() });
        }
        signs.push(norm2.signum());
        basis.push(v / Complex64::new(norm2.abs().sqrt(), 0.0));
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    Ok((out, signs))
}

/// Deterministic column pivoting: repeatedly pick the column with the largest
/// remaining Euclidean norm (ties by lowest index), deflating the rest.
pub(crate) fn pivot_columns(m: &CMat, count: usize) -> Vec<usize> {
    let mut work: Vec<CVec> = (0..m.ncols()).map(|j| m.column(j).into()).collect();
    let mut available: Vec<usize> = (0..m.ncols()).collect();
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let (slot, &col) = available
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                work[a]
                    .norm()
                    .partial_cmp(&work[b].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(&a)) // ties: prefer the lower column index
            })
            .expect("count <= ncols");
        picked.push(col);
        available.remove(slot);
        let norm = work[col].norm();
        if norm > 0.0 {
            let q = work[col].clone() / Complex64::new(norm, 0.0);
            for &other in &available {
                let coeff = q.dotc(&work[other]);
                let update = &q * coeff;
                work[other] -= update;
            }
        }
    }
    picked
}

pub(crate) fn numerical_rank(m: &CMat, tol: f64) -> usize {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > tol)
        .count()
}

fn assemble(
    point: &[f64],
    h: &CMat,
    par: CMat,
    par_signs: Vec<f64>,
    perp: CMat,
    perp_signs: Vec<f64>,
) -> Result<AdaptedFrame> {
    let n = h.nrows();
    let m = par.ncols();
    let mut frame = CMat::zeros(n, n);
    for j in 0..m {
        frame.set_column(j, &par.column(j));
    }
    for j in 0..(n - m) {
        frame.set_column(m + j, &perp.column(j));
    }
    let coframe = frame
        .try_inverse()
        .ok_or_else(|| Error::FrameDiscontinuity { point: point.to_vec() })?;
    let h_par = par.adjoint() * h * &par;
    let h_perp = perp.adjoint() * h * &perp;
    Ok(AdaptedFrame {
        point: point.to_vec(),
        par,
        perp,
        h_par,
        h_perp,
        coframe,
        par_signs,
        perp_signs,
    })
}

/// Build the adapted frame at a point from rank-revealing column selection on
/// P and I - P followed by h-orthonormalization.
pub fn adapted_frame(pf: &ProjectorField, point: &[f64]) -> Result<AdaptedFrame> {
    let p = pf.eval(point);
    let h = pf.bundle().h_at(point);
    let n = p.nrows();
    let m = pf.par_rank();

    let detected = numerical_rank(&p, RANK_TOL);
    if detected != m {
        return Err(Error::RankMismatch { expected: m, detected });
    }

    let q = CMat::identity(n, n) - &p;
    let par_cols: Vec<CVec> = pivot_columns(&p, m).into_iter().map(|j| p.column(j).into()).collect();
    let perp_cols: Vec<CVec> =
        pivot_columns(&q, n - m).into_iter().map(|j| q.column(j).into()).collect();

    let (par, par_signs) = h_mgs(&h, &par_cols)?;
    let (perp, perp_signs) = h_mgs(&h, &perp_cols)?;
    assemble(point, &h, par, par_signs, perp, perp_signs)
}

/// A smooth family of adapted frames over the chart.
pub trait FrameField: Send + Sync {
    fn frame_at(&self, point: &[f64]) -> Result<AdaptedFrame>;
}

/// Frame field aligned to an anchor frame: at each point the anchor columns
/// are projected with P (resp. I - P) and re-orthonormalized in order. This
/// is smooth wherever the projections stay nondegenerate and coincides with
/// the anchor at its own base point.
pub struct AlignedFrameField {
    pf: ProjectorField,
    anchor: AdaptedFrame,
}

impl AlignedFrameField {
    pub fn new(pf: &ProjectorField, center: &[f64]) -> Result<Self> {
        let anchor = adapted_frame(pf, center)?;
        Ok(Self { pf: pf.clone(), anchor })
    }

    pub fn anchor(&self) -> &AdaptedFrame {
        &self.anchor
    }
}

impl FrameField for AlignedFrameField {
    fn frame_at(&self, point: &[f64]) -> Result<AdaptedFrame> {
        let p = self.pf.eval(point);
        let h = self.pf.bundle().h_at(point);
        let n = p.nrows();
        let q = CMat::identity(n, n) - &p;

        let par_cols: Vec<CVec> =
            (0..self.anchor.par.ncols()).map(|j| &p * self.anchor.par.column(j)).collect();
        let perp_cols: Vec<CVec> =
            (0..self.anchor.perp.ncols()).map(|j| &q * self.anchor.perp.column(j)).collect();

        let discontinuity = |_: Error| Error::FrameDiscontinuity { point: point.to_vec() };
        let (par, par_signs) = h_mgs(&h, &par_cols).map_err(discontinuity)?;
        let (perp, perp_signs) = h_mgs(&h, &perp_cols).map_err(discontinuity)?;
        assemble(point, &h, par, par_signs, perp, perp_signs)
    }
}

/// Frame field given by explicit smooth closures for both blocks (models with
/// a preferred gauge supply these). Each block is h-orthonormalized in place,
/// preserving the closure's gauge up to triangular corrections.
pub struct ClosureFrameField {
    pf: ProjectorField,
    par: Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>,
    perp: Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>,
}

impl ClosureFrameField {
    pub fn new(
        pf: &ProjectorField,
        par: impl Fn(&[f64]) -> CMat + Send + Sync + 'static,
        perp: impl Fn(&[f64]) -> CMat + Send + Sync + 'static,
    ) -> Self {
        Self { pf: pf.clone(), par: Arc::new(par), perp: Arc::new(perp) }
    }
}

impl FrameField for ClosureFrameField {
    fn frame_at(&self, point: &[f64]) -> Result<AdaptedFrame> {
        let h = self.pf.bundle().h_at(point);
        let par_raw = (self.par)(point);
        let perp_raw = (self.perp)(point);
        let par_cols: Vec<CVec> = (0..par_raw.ncols()).map(|j| par_raw.column(j).into()).collect();
        let perp_cols: Vec<CVec> =
            (0..perp_raw.ncols()).map(|j| perp_raw.column(j).into()).collect();
        let (par, par_signs) = h_mgs(&h, &par_cols)?;
        let (perp, perp_signs) = h_mgs(&h, &perp_cols)?;
        assemble(point, &h, par, par_signs, perp, perp_signs)
    }
}

/// Wraps a frame field with a smooth change of parallel gauge s_A -> s_B U^B_A.
/// Used to verify gauge covariance of the derived tensors.
pub struct GaugeTransformedField<F: FrameField> {
    base: F,
    u: Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>,
}

impl<F: FrameField> GaugeTransformedField<F> {
    pub fn new(base: F, u: impl Fn(&[f64]) -> CMat + Send + Sync + 'static) -> Self {
        Self { base, u: Arc::new(u) }
    }
}

impl<F: FrameField> FrameField for GaugeTransformedField<F> {
    fn frame_at(&self, point: &[f64]) -> Result<AdaptedFrame> {
        let frame = self.base.frame_at(point)?;
        let u = (self.u)(point);
        let par = &frame.par * &u;
        let h_par = u.adjoint() * &frame.h_par * &u;
        let n = frame.fiber_rank();
        let m = frame.par_rank();
        let mut full = CMat::zeros(n, n);
        for j in 0..m {
            full.set_column(j, &par.column(j));
        }
        for j in 0..(n - m) {
            full.set_column(m + j, &frame.perp.column(j));
        }
        let coframe = full
            .try_inverse()
            .ok_or_else(|| Error::FrameDiscontinuity { point: point.to_vec() })?;
        Ok(AdaptedFrame { par, h_par, coframe, ..frame })
    }
}
