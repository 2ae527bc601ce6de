//! Hermitian vector bundles over a chart: fiber pseudo-metric h, connection
//! coefficients omega, curvature, and compatibility checks.
//!
//! The bundle is presented in a single global frame; connection coefficients
//! are stored mixed-index as matrices `omega_mu = (omega^i_{j mu})`, and the
//! lowered form `omega_{ij mu} = h_{ik} omega^k_{j mu}` is computed on demand.

use std::sync::Arc;



use crate::chart::{fd_partial_fn, max_abs, CMat, Chart, FdConfig, MatrixField};
use crate::error::{Error, Result};

/// Connection coefficients `omega^i_{j mu}` as a per-axis family of n x n
/// matrix fields.
#[derive(Clone)]
pub struct ConnectionField {
    chart: Chart,
    rank: usize,
    eval: Arc<dyn Fn(&[f64], usize) -> CMat + Send + Sync>,
}

impl ConnectionField {
    pub fn new(
        chart: Chart,
        rank: usize,
        eval: impl Fn(&[f64], usize) -> CMat + Send + Sync + 'static,
    ) -> Self {
        Self { chart, rank, eval: Arc::new(eval) }
    }

    /// Flat connection, omega = 0.
    pub fn flat(chart: Chart, rank: usize) -> Self {
        Self::new(chart, rank, move |_, _| CMat::zeros(rank, rank))
    }

    pub fn eval(&self, point: &[f64], mu: usize) -> CMat {
        let m = (self.eval)(point, mu);
        debug_assert_eq!((m.nrows(), m.ncols()), (self.rank, self.rank));
        m
    }

    /// View the `mu` component as a matrix field (for finite differencing).
    pub fn axis_field(&self, mu: usize) -> MatrixField {
        let eval = self.eval.clone();
        MatrixField::new(self.chart.clone(), self.rank, self.rank, move |x| eval(x, mu))
    }
}

/// A Hermitian vector bundle: chart, fiber rank, fiber pseudo-metric field and
/// connection coefficients.
#[derive(Clone)]
pub struct BundleSpec {
    chart: Chart,
    rank: usize,
    h_field: MatrixField,
    omega: ConnectionField,
}

impl BundleSpec {
    pub fn new(chart: Chart, rank: usize, h_field: MatrixField, omega: ConnectionField) -> Self {
        debug_assert_eq!(h_field.rows(), rank);
        debug_assert_eq!(h_field.cols(), rank);
        Self { chart, rank, h_field, omega }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn h_field(&self) -> &MatrixField {
        &self.h_field
    }

    pub fn omega(&self) -> &ConnectionField {
        &self.omega
    }

    pub fn h_at(&self, point: &[f64]) -> CMat {
        self.h_field.eval(point)
    }

    /// Inverse fiber metric, failing with `SingularMetric` when h degenerates.
    pub fn h_inv_at(&self, point: &[f64]) -> Result<CMat> {
        self.h_at(point)
            .try_inverse()
            .ok_or_else(|| Error::SingularMetric { point: point.to_vec() })
    }
}

/// One curvature slice `Omega^i_{j mu nu}` at a point.
#[derive(Debug, Clone)]
pub struct CurvatureSlice {
    pub point: Vec<f64>,
    pub mu: usize,
    pub nu: usize,
    pub matrix: CMat,
}

/// Compatibility residual of (h, omega) at a point:
/// `max_mu || d_mu h_{ij} - (conj(omega_{ji mu}) + omega_{ij mu}) ||`
/// with `omega_{ij mu} = h_{ik} omega^k_{j mu}`. For constant h this reduces
/// to the anti-Hermiticity of the lowered connection.
pub fn check_compatibility(spec: &BundleSpec, point: &[f64], fd: FdConfig) -> Result<f64> {
    // fail early if h is singular at any stencil node
    let radius = fd.scheme.radius() as i64;
    for mu in 0..spec.chart.dim() {
        for offset in -radius..=radius {
            let mut node = point.to_vec();
            node[mu] += offset as f64 * fd.step;
            if spec.chart.contains(&node).is_ok() && spec.h_at(&node).try_inverse().is_none() {
                return Err(Error::SingularMetric { point: node });
            }
        }
    }
    let h = spec.h_at(point);
    let mut worst = 0.0f64;
    for mu in 0..spec.chart.dim() {
        let dh = spec.h_field.fd_partial(point, mu, fd)?;
        let lowered = &h * spec.omega.eval(point, mu);
        let residual = dh - (lowered.adjoint() + lowered);
        worst = worst.max(max_abs(&residual));
    }
    Ok(worst)
}

/// Coordinate-frame curvature
/// `Omega^i_{j mu nu} = d_mu omega^i_{j nu} - d_nu omega^i_{j mu}
///  + omega^i_{k mu} omega^k_{j nu} - omega^i_{k nu} omega^k_{j mu}`.
pub fn curvature(
    spec: &BundleSpec,
    point: &[f64],
    mu: usize,
    nu: usize,
    fd: FdConfig,
) -> Result<CurvatureSlice> {
    let d_mu_omega_nu = spec.omega.axis_field(nu).fd_partial(point, mu, fd)?;
    let d_nu_omega_mu = spec.omega.axis_field(mu).fd_partial(point, nu, fd)?;
    let omega_mu = spec.omega.eval(point, mu);
    let omega_nu = spec.omega.eval(point, nu);
    let matrix = d_mu_omega_nu - d_nu_omega_mu + &omega_mu * &omega_nu - &omega_nu * &omega_mu;
    Ok(CurvatureSlice { point: point.to_vec(), mu, nu, matrix })
}

/// Covariant derivative of a section: `d_mu s + omega_mu s`.
pub fn covariant_derivative(
    spec: &BundleSpec,
    section: &MatrixField,
    point: &[f64],
    mu: usize,
    fd: FdConfig,
) -> Result<CMat> {
    debug_assert_eq!(section.rows(), spec.rank);
    debug_assert_eq!(section.cols(), 1);
    let ds = section.fd_partial(point, mu, fd)?;
    Ok(ds + spec.omega.eval(point, mu) * section.eval(point))
}

/// Covariant derivative of a matrix-valued closure whose columns are sections.
pub(crate) fn covariant_derivative_fn<F>(
    spec: &BundleSpec,
    point: &[f64],
    mu: usize,
    fd: FdConfig,
    f: F,
) -> Result<CMat>
where
    F: Fn(&[f64]) -> Result<CMat>,
{
    let ds = fd_partial_fn(&spec.chart, point, mu, fd, &f)?;
    Ok(ds + spec.omega.eval(point, mu) * f(point)?)
}

/// Anti-self-adjointness residual `|| h Omega + Omega^dagger h ||` of a
/// curvature slice with respect to the fiber metric.
pub fn curvature_h_antiselfadjoint_residual(spec: &BundleSpec, slice: &CurvatureSlice) -> f64 {
    let h = spec.h_at(&slice.point);
    max_abs(&(&h * &slice.matrix + slice.matrix.adjoint() * &h))
}

#[cfg(test)]
mod tests {
    use super::*;

    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn cplx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn chart2d() -> Chart {
        Chart::uniform(2, (-1.0, 1.0), 1e-2).unwrap()
    }

    fn fd() -> FdConfig {
        FdConfig::central4(1e-2)
    }

    fn antihermitian_sample() -> CMat {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.7),
                Complex64::new(0.3, 0.1),
                Complex64::new(-0.3, 0.1),
                Complex64::new(0.0, -0.2),
            ],
        )
    }

    #[test]
    fn flat_pair_is_compatible() {
        let chart = chart2d();
        let spec = BundleSpec::new(
            chart.clone(),
            2,
            MatrixField::constant(chart.clone(), CMat::identity(2, 2)),
            ConnectionField::flat(chart, 2),
        );
        let res = check_compatibility(&spec, &[0.2, -0.1], fd()).unwrap();
        assert!(res <= 1e-13);
    }

    #[test]
    fn constant_antihermitian_connection_is_compatible() {
        let chart = chart2d();
        let omega = antihermitian_sample();
        let spec = BundleSpec::new(
            chart.clone(),
            2,
            MatrixField::constant(chart.clone(), CMat::identity(2, 2)),
            ConnectionField::new(chart, 2, move |_, _| omega.clone()),
        );
        let res = check_compatibility(&spec, &[0.0, 0.0], fd()).unwrap();
        assert!(res <= 1e-13);
    }

    #[test]
    fn hermitian_connection_fails_compatibility() {
        // for h = I and omega Hermitian the residual is exactly 2 * omega
        let chart = chart2d();
        let omega = DMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.5), cplx(0.25), cplx(0.25), cplx(-1.0)],
        );
        let expected = 2.0 * max_abs(&omega);
        let spec = BundleSpec::new(
            chart.clone(),
            2,
            MatrixField::constant(chart.clone(), CMat::identity(2, 2)),
            ConnectionField::new(chart, 2, move |_, _| omega.clone()),
        );
        let res = check_compatibility(&spec, &[0.0, 0.0], fd()).unwrap();
        assert!((res - expected).abs() <= 1e-12, "res = {res}, expected {expected}");
    }

    #[test]
    fn flat_connection_has_zero_curvature() {
        let chart = chart2d();
        let spec = BundleSpec::new(
            chart.clone(),
            3,
            MatrixField::constant(chart.clone(), CMat::identity(3, 3)),
            ConnectionField::flat(chart, 3),
        );
        let slice = curvature(&spec, &[0.1, 0.2], 0, 1, fd()).unwrap();
        assert!(max_abs(&slice.matrix) <= 1e-13);
    }

    #[test]
    fn abelian_curl_recovers_constant_magnetic_curvature() {
        // rank 1, omega^1_{1 mu} = i A_mu with A = (-x2, 0): curvature = i (d1 A2 - d2 A1) = i
        let chart = chart2d();
        let omega = ConnectionField::new(chart.clone(), 1, |x, mu| {
            let a = if mu == 0 { -x[1] } else { 0.0 };
            CMat::from_element(1, 1, Complex64::new(0.0, a))
        });
        let spec = BundleSpec::new(
            chart.clone(),
            1,
            MatrixField::constant(chart, CMat::identity(1, 1)),
            omega,
        );
        let slice = curvature(&spec, &[0.3, -0.2], 0, 1, fd()).unwrap();
        let err = (slice.matrix[(0, 0)] - Complex64::new(0.0, 1.0)).norm();
        assert!(err <= 1e-8, "err = {err:.3e}");
    }

    #[test]
    fn curvature_antisymmetry_and_h_antiselfadjointness() {
        let chart = chart2d();
        // position-dependent anti-Hermitian connection, h = I
        let omega = ConnectionField::new(chart.clone(), 2, |x, mu| {
            let base = antihermitian_sample();
            let s = match mu {
                0 => x[0].sin() + 0.3 * x[1],
                _ => x[1].cos(),
            };
            base * cplx(s)
        });
        let spec = BundleSpec::new(
            chart.clone(),
            2,
            MatrixField::constant(chart, CMat::identity(2, 2)),
            omega,
        );
        let p = [0.25, -0.4];
        let s01 = curvature(&spec, &p, 0, 1, fd()).unwrap();
        let s10 = curvature(&spec, &p, 1, 0, fd()).unwrap();
        assert!(max_abs(&(&s01.matrix + &s10.matrix)) <= 1e-12);
        assert!(curvature_h_antiselfadjoint_residual(&spec, &s01) <= 1e-9);
    }

    #[test]
    fn covariant_derivative_bare_partial_and_leibniz() {
        let chart = chart2d();
        let spec = BundleSpec::new(
            chart.clone(),
            2,
            MatrixField::constant(chart.clone(), CMat::identity(2, 2)),
            ConnectionField::flat(chart.clone(), 2),
        );
        // constant section: derivative vanishes
        let s_const = MatrixField::constant(chart.clone(), CMat::from_element(2, 1, cplx(1.0)));
        let d = covariant_derivative(&spec, &s_const, &[0.0, 0.0], 0, fd()).unwrap();
        assert!(max_abs(&d) <= 1e-13);

        // s(x) = (x1, 0): bare partial
        let s_lin = MatrixField::new(chart.clone(), 2, 1, |x| {
            CMat::from_column_slice(2, 1, &[cplx(x[0]), cplx(0.0)])
        });
        let d = covariant_derivative(&spec, &s_lin, &[0.1, 0.1], 0, fd()).unwrap();
        assert!((d[(0, 0)].re - 1.0).abs() <= 1e-10);
        assert!(d[(1, 0)].norm() <= 1e-12);

        // Leibniz residual for f = sin(x1) against a fixed section
        let s_fixed = CMat::from_column_slice(2, 1, &[cplx(0.4), Complex64::new(0.1, -0.7)]);
        let s_field = MatrixField::constant(chart.clone(), s_fixed.clone());
        let fs_field = MatrixField::new(chart.clone(), 2, 1, {
            let s = s_fixed.clone();
            move |x| s.clone() * cplx(x[0].sin())
        });
        let p = [0.3, 0.0];
        let lhs = covariant_derivative(&spec, &fs_field, &p, 0, fd()).unwrap();
        let f = cplx(p[0].sin());
        let df = cplx(p[0].cos());
        let rhs = covariant_derivative(&spec, &s_field, &p, 0, fd()).unwrap() * f + s_fixed * df;
        assert!(max_abs(&(lhs - rhs)) <= 1e-9);
    }

    #[test]
    fn compatibility_with_varying_metric() {
        // h(x) = diag(e^{x1}, 1) with omega chosen to satisfy the compatibility
        // identity exactly: omega_mu = 0.5 h^{-1} d_mu h (Hermitian lowered part).
        let chart = chart2d();
        let h_field = MatrixField::new(chart.clone(), 2, 2, |x| {
            let mut m = CMat::identity(2, 2);
            m[(0, 0)] = cplx(x[0].exp());
            m
        });
        let omega = ConnectionField::new(chart.clone(), 2, |x, mu| {
            let mut m = CMat::zeros(2, 2);
            if mu == 0 {
                m[(0, 0)] = cplx(0.5);
                let _ = x;
            }
            m
        });
        let spec = BundleSpec::new(chart, 2, h_field, omega);
        let res = check_compatibility(&spec, &[0.2, 0.1], FdConfig::central4(5e-3)).unwrap();
        assert!(res <= 1e-10, "res = {res:.3e}");
    }

    #[test]
    fn singular_metric_detected() {
        let chart = chart2d();
        let h_field = MatrixField::new(chart.clone(), 1, 1, |x| {
            CMat::from_element(1, 1, cplx(x[0]))
        });
        let spec = BundleSpec::new(
            chart.clone(),
            1,
            h_field,
            ConnectionField::flat(chart, 1),
        );
        let err = check_compatibility(&spec, &[0.005, 0.0], FdConfig::central4(5e-3)).unwrap_err();
        assert!(matches!(err, Error::SingularMetric { .. }));
    }
}
