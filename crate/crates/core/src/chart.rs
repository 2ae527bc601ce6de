//! Coordinate charts and high-accuracy finite differences for matrix-valued fields.
//!
//! All geometric fields in this crate (fiber metric, connection coefficients,
//! projectors, spacetime metrics) are supplied as pure evaluation maps over a
//! single chart. Derivatives are taken with central stencils so that identity
//! residuals isolate truncation error only; `verify`-style callers evaluate at
//! two steps (h, h/2) and report the measured convergence order.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// A single coordinate chart: axis labels, closed per-axis intervals and
/// per-axis default finite-difference steps.
#[derive(Debug, Clone)]
pub struct Chart {
    names: Vec<String>,
    intervals: Vec<(f64, f64)>,
    default_steps: Vec<f64>,
}

impl Chart {
    pub fn new<S: Into<String>>(
        names: Vec<S>,
        intervals: Vec<(f64, f64)>,
        default_steps: Vec<f64>,
    ) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() != intervals.len() || names.len() != default_steps.len()
        {
            return Err(Error::DomainError(
                "chart axes, intervals and steps must have equal nonzero length".into(),
            ));
        }
        for (axis, (&(lo, hi), &step)) in intervals.iter().zip(&default_steps).enumerate() {
            if !(lo < hi) {
                return Err(Error::DegenerateDomain { axis, lo, hi });
            }
            if !(step > 0.0 && step < (hi - lo) / 4.0) {
                return Err(Error::DomainError(format!(
                    "default step {step} on axis {axis} must be positive and < width/4"
                )));
            }
        }
        Ok(Self { names, intervals, default_steps })
    }

    /// Uniform chart over `dim` axes with the same interval and step.
    pub fn uniform(dim: usize, interval: (f64, f64), step: f64) -> Result<Self> {
        let names = (0..dim).map(|i| format!("x{i}")).collect::<Vec<_>>();
        Chart::new(names, vec![interval; dim], vec![step; dim])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn interval(&self, axis: usize) -> (f64, f64) {
        self.intervals[axis]
    }

    pub fn default_step(&self, axis: usize) -> f64 {
        self.default_steps[axis]
    }

    /// Smallest per-axis default step; used as a uniform step fallback.
    pub fn min_default_step(&self) -> f64 {
        self.default_steps.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Check that `point` lies inside the chart (closed intervals).
    pub fn contains(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DomainError(format!(
                "point dimension {} does not match chart dimension {}",
                point.len(),
                self.dim()
            )));
        }
        for (axis, (&x, &(lo, hi))) in point.iter().zip(&self.intervals).enumerate() {
            if !(x >= lo && x <= hi) {
                return Err(Error::OutOfDomain { axis, value: x, lo, hi });
            }
        }
        Ok(())
    }

    /// Check that the whole stencil `point ± radius*step*e_mu` stays inside.
    pub fn contains_stencil(&self, point: &[f64], mu: usize, step: f64, radius: usize) -> Result<()> {
        self.contains(point)?;
        let (lo, hi) = self.intervals[mu];
        let r = radius as f64 * step;
        for value in [point[mu] - r, point[mu] + r] {
            if !(value >= lo && value <= hi) {
                return Err(Error::OutOfDomain { axis: mu, value, lo, hi });
            }
        }
        Ok(())
    }
}

/// Central finite-difference schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    /// Two-point central difference, O(h^2).
    Central2,
    /// Four-point central difference, O(h^4).
    Central4,
}

impl FdScheme {
    pub fn radius(self) -> usize {
        match self {
            FdScheme::Central2 => 1,
            FdScheme::Central4 => 2,
        }
    }

    /// Nominal convergence order of the scheme.
    pub fn order(self) -> f64 {
        match self {
            FdScheme::Central2 => 2.0,
            FdScheme::Central4 => 4.0,
        }
    }

    /// Stencil as (node offset, weight/h) pairs for the first derivative.
    pub fn stencil(self, step: f64) -> Vec<(i32, f64)> {
        match self {
            FdScheme::Central2 => vec![(-1, -0.5 / step), (1, 0.5 / step)],
            FdScheme::Central4 => vec![
                (-2, 1.0 / (12.0 * step)),
                (-1, -8.0 / (12.0 * step)),
                (1, 8.0 / (12.0 * step)),
                (2, -1.0 / (12.0 * step)),
            ],
        }
    }
}

/// Finite-difference configuration carried through all derivative-based operations.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub step: f64,
    pub scheme: FdScheme,
}

impl FdConfig {
    pub fn new(step: f64, scheme: FdScheme) -> Self {
        Self { step, scheme }
    }

    pub fn central4(step: f64) -> Self {
        Self { step, scheme: FdScheme::Central4 }
    }

    /// Same scheme at half the step, for convergence-order measurements.
    pub fn halved(self) -> Self {
        Self { step: 0.5 * self.step, ..self }
    }
}

/// A deterministic matrix-valued field over a chart.
///
/// The evaluation map is required to be pure and total on the chart domain,
/// and safe to call from concurrent grid sweeps.
#[derive(Clone)]
pub struct MatrixField {
    chart: Chart,
    rows: usize,
    cols: usize,
    eval: Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>,
}

impl MatrixField {
    pub fn new(
        chart: Chart,
        rows: usize,
        cols: usize,
        eval: impl Fn(&[f64]) -> CMat + Send + Sync + 'static,
    ) -> Self {
        Self { chart, rows, cols, eval: Arc::new(eval) }
    }

    pub fn constant(chart: Chart, value: CMat) -> Self {
        let (rows, cols) = (value.nrows(), value.ncols());
        Self::new(chart, rows, cols, move |_| value.clone())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn eval(&self, point: &[f64]) -> CMat {
        let m = (self.eval)(point);
        debug_assert_eq!((m.nrows(), m.ncols()), (self.rows, self.cols));
        m
    }

    /// Central-difference partial derivative along axis `mu`.
    pub fn fd_partial(&self, point: &[f64], mu: usize, fd: FdConfig) -> Result<CMat> {
        fd_partial_fn(&self.chart, point, mu, fd, |x| Ok(self.eval(x)))
    }
}

/// Finite-difference partial derivative of an arbitrary matrix-valued closure.
///
/// This is the single differentiation primitive behind every del operator in
/// the crate; nested calls realize mixed second derivatives.
pub fn fd_partial_fn<F>(chart: &Chart, point: &[f64], mu: usize, fd: FdConfig, f: F) -> Result<CMat>
where
    F: Fn(&[f64]) -> Result<CMat>,
{
    if mu >= chart.dim() {
        return Err(Error::DomainError(format!(
            "axis {mu} out of range for chart of dimension {}",
            chart.dim()
        )));
    }
    if !(fd.step > 0.0) {
        return Err(Error::DomainError(format!("step must be positive (got {})", fd.step)));
    }
    chart.contains_stencil(point, mu, fd.step, fd.scheme.radius())?;

    let mut acc: Option<CMat> = None;
    let mut node = point.to_vec();
    for (offset, weight) in fd.scheme.stencil(fd.step) {
        node[mu] = point[mu] + offset as f64 * fd.step;
        let value = f(&node)?;
        if value.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { point: node.clone() });
        }
        let term = value * Complex64::new(weight, 0.0);
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    Ok(acc.expect("stencil is never empty"))
}

/// Deterministic row-major lattice of points, the domain shrunk by `margin`
/// per side (the margin protects finite-difference stencils near the boundary).
///
/// A count of 1 on an axis yields the midpoint of the shrunken interval.
pub fn grid_points(chart: &Chart, counts: &[usize], margin: f64) -> Result<Vec<Vec<f64>>> {
    if counts.len() != chart.dim() {
        return Err(Error::DomainError(format!(
            "counts length {} does not match chart dimension {}",
            counts.len(),
            chart.dim()
        )));
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::DomainError("grid counts must be positive".into()));
    }
    if margin < 0.0 {
        return Err(Error::DomainError("grid margin must be nonnegative".into()));
    }
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(chart.dim());
    for (axis, &count) in counts.iter().enumerate() {
        let (lo, hi) = chart.interval(axis);
        let (lo, hi) = (lo + margin, hi - margin);
        if !(lo < hi) {
            return Err(Error::DegenerateDomain { axis, lo, hi });
        }
        let pts = if count == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..count)
                .map(|i| lo + i as f64 * (hi - lo) / (count - 1) as f64)
                .collect()
        };
        axes.push(pts);
    }

    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; chart.dim()];
    for _ in 0..total {
        out.push(idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect());
        // row-major: last axis fastest
        for a in (0..chart.dim()).rev() {
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(out)
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Measured convergence order log2(res_h / res_half) guarded against zero floors.
pub fn measured_order(res_h: f64, res_half: f64) -> f64 {
    if res_half <= f64::EPSILON || res_h <= f64::EPSILON {
        return 0.0;
    }
    (res_h / res_half).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn chart1d() -> Chart {
        Chart::new(vec!["x"], vec![(0.0, 1.0)], vec![1e-3]).unwrap()
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let chart = Chart::uniform(2, (0.0, 1.0), 1e-2).unwrap();
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let field = MatrixField::constant(chart, m);
        for mu in 0..2 {
            for scheme in [FdScheme::Central2, FdScheme::Central4] {
                let d = field
                    .fd_partial(&[0.5, 0.5], mu, FdConfig::new(1e-2, scheme))
                    .unwrap();
                assert!(max_abs(&d) <= 1e-13);
            }
        }
    }

    #[test]
    fn derivative_of_linear_field() {
        let chart = chart1d();
        let field = MatrixField::new(chart, 2, 2, |x| {
            CMat::identity(2, 2) * c(x[0])
        });
        let d = field
            .fd_partial(&[0.3], 0, FdConfig::new(1e-3, FdScheme::Central2))
            .unwrap();
        let err = max_abs(&(d - CMat::identity(2, 2)));
        assert!(err <= 1e-10, "err = {err:.3e}");
    }

    #[test]
    fn central2_measured_order_on_sine() {
        let chart = chart1d();
        let field = MatrixField::new(chart, 1, 1, |x| {
            CMat::from_element(1, 1, c(x[0].sin()))
        });
        let exact = CMat::from_element(1, 1, c(0.5f64.cos()));
        let h = 1e-3;
        let err = |fd: FdConfig| {
            max_abs(&(field.fd_partial(&[0.5], 0, fd).unwrap() - exact.clone()))
        };
        let e1 = err(FdConfig::new(h, FdScheme::Central2));
        let e2 = err(FdConfig::new(h / 2.0, FdScheme::Central2));
        let ratio = e1 / e2;
        // second-order scheme: error shrinks by 4 +- 20% under step halving
        assert!((ratio - 4.0).abs() <= 0.8, "ratio = {ratio}");
    }

    #[test]
    fn central4_exact_on_quartic() {
        let chart = chart1d();
        let field = MatrixField::new(chart, 1, 1, |x| {
            CMat::from_element(1, 1, c(x[0].powi(4) - 2.0 * x[0].powi(3) + x[0]))
        });
        let x: f64 = 0.4;
        let exact = 4.0 * x.powi(3) - 6.0 * x * x + 1.0;
        let d = field
            .fd_partial(&[x], 0, FdConfig::new(5e-2, FdScheme::Central4))
            .unwrap();
        assert_abs_diff_eq!(d[(0, 0)].re, exact, epsilon = 1e-10);
    }

    #[test]
    fn central2_exact_on_quadratic() {
        let chart = chart1d();
        let field = MatrixField::new(chart, 1, 1, |x| {
            CMat::from_element(1, 1, c(3.0 * x[0] * x[0] + x[0]))
        });
        let d = field
            .fd_partial(&[0.25], 0, FdConfig::new(5e-2, FdScheme::Central2))
            .unwrap();
        assert_abs_diff_eq!(d[(0, 0)].re, 2.5, epsilon = 1e-10);
    }

    #[test]
    fn stencil_domain_violation() {
        let chart = chart1d();
        let field = MatrixField::constant(chart, CMat::identity(1, 1));
        let err = field
            .fd_partial(&[0.001], 0, FdConfig::new(1e-2, FdScheme::Central4))
            .unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
    }

    #[test]
    fn non_finite_detected() {
        let chart = chart1d();
        let field = MatrixField::new(chart, 1, 1, |x| {
            CMat::from_element(1, 1, c(1.0 / (x[0] - 0.5)))
        });
        let err = field
            .fd_partial(&[0.5 - 1e-3], 0, FdConfig::new(1e-3, FdScheme::Central2))
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn grid_midpoint_convention() {
        let chart = chart1d();
        assert_eq!(grid_points(&chart, &[1], 0.0).unwrap(), vec![vec![0.5]]);
        assert_eq!(
            grid_points(&chart, &[3], 0.0).unwrap(),
            vec![vec![0.0], vec![0.5], vec![1.0]]
        );
    }

    #[test]
    fn grid_row_major_with_margin() {
        let chart = Chart::uniform(2, (0.0, 1.0), 1e-2).unwrap();
        let pts = grid_points(&chart, &[2, 2], 0.25).unwrap();
        assert_eq!(
            pts,
            vec![
                vec![0.25, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.25],
                vec![0.75, 0.75]
            ]
        );
    }

    #[test]
    fn grid_rejects_degenerate_margin() {
        let chart = chart1d();
        assert!(matches!(
            grid_points(&chart, &[2], 0.5).unwrap_err(),
            Error::DegenerateDomain { .. }
        ));
    }
}
