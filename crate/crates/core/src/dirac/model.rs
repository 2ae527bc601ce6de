//! Lorentzian spacetime models: metric, tetrad, Levi-Civita connection,
//! Riemann/scalar curvature, spin connection and the associated spinor-bundle
//! presentation. Includes the Minkowski and hyperbolic-plane models.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bundle::{BundleSpec, ConnectionField};
use crate::chart::{fd_partial_fn, CMat, Chart, FdConfig, MatrixField};
use crate::error::{Error, Result};

use super::gamma::{dirac_pairing, eta, gamma_flat, gamma_flat_lower};

pub type RMat = DMatrix<f64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Conformal factor of a spatially conformal static metric
/// `g = -dt^2 + lambda^2 (dx^2 + dy^2) + dz^2`, with the analytic gradient
/// of `ln lambda` used by closed-form expressions.
#[derive(Clone)]
pub struct ConformalFactor {
    pub lambda: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub dlog_lambda: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
}

impl ConformalFactor {
    pub fn flat() -> Self {
        Self {
            lambda: Arc::new(|_, _| 1.0),
            dlog_lambda: Arc::new(|_, _| [0.0, 0.0]),
        }
    }

    /// Poincare half-plane factor lambda = a / x (x > 0).
    pub fn half_plane(a: f64) -> Self {
        Self {
            lambda: Arc::new(move |x, _| a / x),
            dlog_lambda: Arc::new(|x, _| [-1.0 / x, 0.0]),
        }
    }

    /// Poincare disk factor lambda = 2a / (1 - x^2 - y^2) (x^2 + y^2 < 1).
    pub fn disk(a: f64) -> Self {
        Self {
            lambda: Arc::new(move |x, y| 2.0 * a / (1.0 - x * x - y * y)),
            dlog_lambda: Arc::new(|x, y| {
                let w = 1.0 - x * x - y * y;
                [2.0 * x / w, 2.0 * y / w]
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperbolicVariant {
    HalfPlane,
    Disk,
}

/// A Lorentzian spacetime with tetrad, electromagnetic potential and Dirac
/// parameters. The metric signature is (-, +, +, +) and the fiber pairing is
/// the constant Dirac form beta = gamma^0.
#[derive(Clone)]
pub struct SpacetimeModel {
    pub name: String,
    pub chart: Chart,
    metric: Arc<dyn Fn(&[f64]) -> RMat + Send + Sync>,
    tetrad: Arc<dyn Fn(&[f64]) -> RMat + Send + Sync>,
    em_potential: Arc<dyn Fn(&[f64]) -> [f64; 4] + Send + Sync>,
    pub charge: f64,
    pub mass: f64,
    christoffels_analytic: Option<Arc<dyn Fn(&[f64]) -> Vec<RMat> + Send + Sync>>,
    pub conformal: Option<ConformalFactor>,
    pub momentum_interval: (f64, f64),
    pub fd_step: f64,
}

impl SpacetimeModel {
    /// Spatially conformal static model with diagonal tetrad
    /// diag(1, 1/lambda, 1/lambda, 1) and analytic Levi-Civita coefficients.
    pub fn conformal_static(
        name: impl Into<String>,
        conformal: ConformalFactor,
        xy_intervals: [(f64, f64); 2],
        mass: f64,
        charge: f64,
        fd_step: f64,
    ) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::DomainError(format!(
                "mass must be strictly positive (got {mass}); the massless limit is unsupported"
            )));
        }
        let chart = Chart::new(
            vec!["t", "x", "y", "z"],
            vec![(-1.0, 1.0), xy_intervals[0], xy_intervals[1], (-1.0, 1.0)],
            vec![fd_step; 4],
        )?;
        let lam = conformal.lambda.clone();
        let metric = Arc::new(move |x: &[f64]| {
            let l = lam(x[1], x[2]);
            RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, l * l, l * l, 1.0]))
        });
        let lam = conformal.lambda.clone();
        let tetrad = Arc::new(move |x: &[f64]| {
            let l = lam(x[1], x[2]);
            RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0 / l, 1.0 / l, 1.0]))
        });
        let dlog = conformal.dlog_lambda.clone();
        let christoffels = Arc::new(move |x: &[f64]| {
            let [l1, l2] = dlog(x[1], x[2]);
            let mut g1 = RMat::zeros(4, 4);
            let mut g2 = RMat::zeros(4, 4);
            // spatial conformal block: Gamma^x = [[L1, L2], [L2, -L1]],
            // Gamma^y = [[-L2, L1], [L1, L2]] over (x, y)
            g1[(1, 1)] = l1;
            g1[(1, 2)] = l2;
            g1[(2, 1)] = l2;
            g1[(2, 2)] = -l1;
            g2[(1, 1)] = -l2;
            g2[(1, 2)] = l1;
            g2[(2, 1)] = l1;
            g2[(2, 2)] = l2;
            vec![RMat::zeros(4, 4), g1, g2, RMat::zeros(4, 4)]
        });
        Ok(Self {
            name: name.into(),
            chart,
            metric,
            tetrad,
            em_potential: Arc::new(|_| [0.0; 4]),
            charge,
            mass,
            christoffels_analytic: Some(christoffels),
            conformal: Some(conformal),
            momentum_interval: (-0.75, 0.75),
            fd_step,
        })
    }

    pub fn with_em_potential(
        mut self,
        potential: impl Fn(&[f64]) -> [f64; 4] + Send + Sync + 'static,
        charge: f64,
    ) -> Self {
        self.em_potential = Arc::new(potential);
        self.charge = charge;
        self
    }

    pub fn metric_at(&self, x: &[f64]) -> RMat {
        (self.metric)(x)
    }

    pub fn metric_inv_at(&self, x: &[f64]) -> Result<RMat> {
        self.metric_at(x)
            .try_inverse()
            .ok_or_else(|| Error::SingularMetric { point: x.to_vec() })
    }

    /// Tetrad matrix E with `E[(mu, a)] = e_a^mu` (columns are frame legs).
    pub fn tetrad_at(&self, x: &[f64]) -> RMat {
        (self.tetrad)(x)
    }

    /// Co-tetrad C with `C[(a, nu)] = (e^a)_nu = eta^{ab} g_{nu mu} e_b^mu`.
    pub fn cotetrad_at(&self, x: &[f64]) -> RMat {
        let ge = self.metric_at(x) * self.tetrad_at(x);
        let e = eta();
        let mut cot = ge.transpose();
        for a in 0..4 {
            for nu in 0..4 {
                cot[(a, nu)] *= e[a];
            }
        }
        cot
    }

    pub fn em_potential_at(&self, x: &[f64]) -> [f64; 4] {
        (self.em_potential)(x)
    }

    /// Residual of the tetrad identity `e_a^mu e_b^nu g_{mu nu} = eta_{ab}`.
    pub fn tetrad_residual(&self, x: &[f64]) -> f64 {
        let e = self.tetrad_at(x);
        let g = self.metric_at(x);
        let mut worst = 0.0f64;
        let ee = e.transpose() * g * &e;
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == b { eta()[a] } else { 0.0 };
                worst = worst.max((ee[(a, b)] - expected).abs());
            }
        }
        worst
    }

    pub fn has_analytic_christoffels(&self) -> bool {
        self.christoffels_analytic.is_some()
    }
}

/// Flat Minkowski model (identity tetrad, zero connection).
pub fn minkowski(mass: f64, charge: f64) -> Result<SpacetimeModel> {
    let mut model = SpacetimeModel::conformal_static(
        "minkowski",
        ConformalFactor::flat(),
        [(-1.0, 1.0), (-1.0, 1.0)],
        mass,
        charge,
        1e-2,
    )?;
    model.name = "minkowski".into();
    Ok(model)
}

/// Hyperbolic-plane model: `g = -dt^2 + lambda^2 (dx^2 + dy^2) + dz^2` with
/// lambda = a/x (half-plane) or 2a/(1 - x^2 - y^2) (disk). The spatial block
/// has constant scalar curvature -2/a^2.
pub fn hyperbolic_model(
    a: f64,
    variant: HyperbolicVariant,
    mass: f64,
    charge: f64,
) -> Result<SpacetimeModel> {
    if !(a > 0.0) {
        return Err(Error::DomainError(format!("curvature scale a must be positive (got {a})")));
    }
    let (name, conformal, xy) = match variant {
        HyperbolicVariant::HalfPlane => (
            "hyperbolic-half-plane",
            ConformalFactor::half_plane(a),
            [(0.5, 3.0), (-1.0, 1.0)],
        ),
        HyperbolicVariant::Disk => (
            "hyperbolic-disk",
            ConformalFactor::disk(a),
            [(-0.6, 0.6), (-0.6, 0.6)],
        ),
    };
    SpacetimeModel::conformal_static(name, conformal, xy, mass, charge, 2.5e-3)
}

fn complexify(m: &RMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| c(m[(i, j)]))
}

fn realify(m: &CMat) -> RMat {
    RMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Finite-difference partial of a real matrix closure over a chart.
pub fn fd_partial_real<F>(chart: &Chart, point: &[f64], mu: usize, fd: FdConfig, f: F) -> Result<RMat>
where
    F: Fn(&[f64]) -> RMat,
{
    let d = fd_partial_fn(chart, point, mu, fd, |y| Ok(complexify(&f(y))))?;
    Ok(realify(&d))
}

/// As [`fd_partial_real`] but for fallible closures.
fn fd_partial_real_try<F>(chart: &Chart, point: &[f64], mu: usize, fd: FdConfig, f: F) -> Result<RMat>
where
    F: Fn(&[f64]) -> Result<RMat>,
{
    let d = fd_partial_fn(chart, point, mu, fd, |y| f(y).map(|m| complexify(&m)))?;
    Ok(realify(&d))
}

/// Levi-Civita coefficients of an arbitrary metric closure over a chart of
/// any dimension: `Gamma^rho_{mu nu} = (1/2) g^{rho lam} (d_mu g_{lam nu} +
/// d_nu g_{lam mu} - d_lam g_{mu nu})`, metric derivatives by central
/// differences. Returns one (mu, nu) matrix per upper index rho.
pub fn christoffels_of<F>(chart: &Chart, metric: F, point: &[f64], fd: FdConfig) -> Result<Vec<RMat>>
where
    F: Fn(&[f64]) -> RMat + Copy,
{
    let dim = chart.dim();
    let g = metric(point);
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric { point: point.to_vec() })?;
    let dg: Vec<RMat> = (0..dim)
        .map(|mu| fd_partial_real(chart, point, mu, fd, metric))
        .collect::<Result<_>>()?;
    let mut out = vec![RMat::zeros(dim, dim); dim];
    for rho in 0..dim {
        for mu in 0..dim {
            for nu in 0..dim {
                let mut sum = 0.0;
                for lam in 0..dim {
                    sum += ginv[(rho, lam)]
                        * (dg[mu][(lam, nu)] + dg[nu][(lam, mu)] - dg[lam][(mu, nu)]);
                }
                out[rho][(mu, nu)] = 0.5 * sum;
            }
        }
    }
    Ok(out)
}

/// Levi-Civita coefficients of the model metric; analytic when the model
/// provides them, otherwise by finite differences.
pub fn christoffels(model: &SpacetimeModel, x: &[f64], fd: FdConfig) -> Result<Vec<RMat>> {
    if let Some(f) = &model.christoffels_analytic {
        return Ok(f(x));
    }
    christoffels_fd(model, x, fd)
}

/// Always-finite-difference Levi-Civita coefficients (used to cross-check
/// the analytic expressions).
pub fn christoffels_fd(model: &SpacetimeModel, x: &[f64], fd: FdConfig) -> Result<Vec<RMat>> {
    let metric = &model.metric;
    let f = move |y: &[f64]| metric(y);
    christoffels_of(&model.chart, &f, x, fd)
}

/// Riemann tensor `R^rho_{sigma mu nu} = d_mu Gamma^rho_{nu sigma} - d_nu
/// Gamma^rho_{mu sigma} + Gamma^rho_{mu lam} Gamma^lam_{nu sigma} -
/// Gamma^rho_{nu lam} Gamma^lam_{mu sigma}` over a chart of any dimension.
pub struct RiemannTensor {
    pub dim: usize,
    data: Vec<f64>,
}

impl RiemannTensor {
    pub fn get(&self, rho: usize, sigma: usize, mu: usize, nu: usize) -> f64 {
        let d = self.dim;
        self.data[((rho * d + sigma) * d + mu) * d + nu]
    }
}

/// Riemann tensor of an arbitrary metric closure.
pub fn riemann_of<F>(chart: &Chart, metric: F, point: &[f64], fd: FdConfig) -> Result<RiemannTensor>
where
    F: Fn(&[f64]) -> RMat + Copy,
{
    let dim = chart.dim();
    let gammas = christoffels_of(chart, metric, point, fd)?;
    let dgam: Vec<Vec<RMat>> = (0..dim)
        .map(|mu| {
            (0..dim)
                .map(|rho| {
                    fd_partial_real_try(chart, point, mu, fd, |y| {
                        christoffels_of(chart, metric, y, fd).map(|g| g[rho].clone())
                    })
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    Ok(riemann_from_parts(dim, &gammas, &|mu, rho| dgam[mu][rho].clone()))
}

/// Riemann tensor of the model metric, using analytic Christoffels when
/// available (their derivatives are still taken by central differences).
pub fn riemann(model: &SpacetimeModel, x: &[f64], fd: FdConfig) -> Result<RiemannTensor> {
    let dim = model.chart.dim();
    let gammas = christoffels(model, x, fd)?;
    let mut dgam: Vec<Vec<RMat>> = Vec::with_capacity(dim);
    for mu in 0..dim {
        let mut per_rho = Vec::with_capacity(dim);
        for rho in 0..dim {
            per_rho.push(fd_partial_real_try(&model.chart, x, mu, fd, |y| {
                christoffels(model, y, fd).map(|g| g[rho].clone())
            })?);
        }
        dgam.push(per_rho);
    }
    Ok(riemann_from_parts(dim, &gammas, &|mu, rho| dgam[mu][rho].clone()))
}

fn riemann_from_parts(
    dim: usize,
    gammas: &[RMat],
    dgam: &dyn Fn(usize, usize) -> RMat,
) -> RiemannTensor {
    let mut data = vec![0.0; dim * dim * dim * dim];
    for rho in 0..dim {
        let d_mu_rho: Vec<RMat> = (0..dim).map(|mu| dgam(mu, rho)).collect();
        for sigma in 0..dim {
            for mu in 0..dim {
                for nu in 0..dim {
                    let mut r = d_mu_rho[mu][(nu, sigma)] - d_mu_rho[nu][(mu, sigma)];
                    for lam in 0..dim {
                        r += gammas[rho][(mu, lam)] * gammas[lam][(nu, sigma)]
                            - gammas[rho][(nu, lam)] * gammas[lam][(mu, sigma)];
                    }
                    data[((rho * dim + sigma) * dim + mu) * dim + nu] = r;
                }
            }
        }
    }
    RiemannTensor { dim, data }
}

/// Scalar curvature of an arbitrary metric closure:
/// `Scal = g^{sigma nu} R^mu_{sigma mu nu}`.
pub fn scalar_curvature_of<F>(chart: &Chart, metric: F, point: &[f64], fd: FdConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> RMat + Copy,
{
    let dim = chart.dim();
    let riem = riemann_of(chart, metric, point, fd)?;
    let ginv = metric(point)
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric { point: point.to_vec() })?;
    let mut scal = 0.0;
    for sigma in 0..dim {
        for nu in 0..dim {
            let mut ricci = 0.0;
            for mu in 0..dim {
                ricci += riem.get(mu, sigma, mu, nu);
            }
            scal += ginv[(sigma, nu)] * ricci;
        }
    }
    Ok(scal)
}

/// Scalar curvature of the 2-D spatial block `lambda^2 (dx^2 + dy^2)` of a
/// conformal model, evaluated on its own 2-D chart.
pub fn spatial_scalar_curvature(model: &SpacetimeModel, xy: [f64; 2], fd: FdConfig) -> Result<f64> {
    let conformal = model
        .conformal
        .as_ref()
        .ok_or_else(|| Error::DomainError("model has no conformal spatial block".into()))?;
    let chart2 = Chart::new(
        vec!["x", "y"],
        vec![model.chart.interval(1), model.chart.interval(2)],
        vec![model.chart.default_step(1), model.chart.default_step(2)],
    )?;
    let lam = conformal.lambda.clone();
    let metric2 = move |y: &[f64]| {
        let l = lam(y[0], y[1]);
        RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![l * l, l * l]))
    };
    scalar_curvature_of(&chart2, &metric2, &xy, fd)
}

/// Spin connection coefficients and the spinor connection matrices.
pub struct SpinConnection {
    /// `omega[mu][(a, b)] = omega^{ab}_mu`, antisymmetric in (a, b).
    pub omega: Vec<RMat>,
    /// Spinor connection matrices `-1/4 omega^{ab}_mu gamma_a gamma_b`.
    pub matrices: Vec<CMat>,
}

/// Spin connection `omega^{ab}_mu = (e^a)_nu del_mu (e^b)^nu` with the
/// tetrad derivative by central differences and the Levi-Civita term from
/// the model Christoffels.
pub fn spin_connection(model: &SpacetimeModel, x: &[f64], fd: FdConfig) -> Result<SpinConnection> {
    let gammas = christoffels(model, x, fd)?;
    let tetrad = model.tetrad_at(x);
    let cot = model.cotetrad_at(x);
    let mut omega = Vec::with_capacity(4);
    let gl = gamma_flat_lower();
    let mut matrices = Vec::with_capacity(4);
    for mu in 0..4 {
        let de = fd_partial_real(&model.chart, x, mu, fd, |y| model.tetrad_at(y))?;
        // del_mu (e^b)^nu = d_mu e_b^nu + Gamma^nu_{mu rho} e_b^rho
        let mut nabla_e = de.clone();
        for nu in 0..4 {
            for b in 0..4 {
                let mut corr = 0.0;
                for rho in 0..4 {
                    corr += gammas[nu][(mu, rho)] * tetrad[(rho, b)];
                }
                nabla_e[(nu, b)] += corr;
            }
        }
        let w = &cot * &nabla_e; // w[(a, b)] = omega^{a b}_mu
        let mut m = CMat::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                if w[(a, b)] != 0.0 {
                    m += &gl[a] * &gl[b] * c(-0.25 * w[(a, b)]);
                }
            }
        }
        omega.push(w);
        matrices.push(m);
    }
    Ok(SpinConnection { omega, matrices })
}

/// The spinor bundle over the spacetime chart: constant Dirac pairing and
/// the spin connection as connection coefficients. The finite-difference
/// configuration is baked into the connection field so that halving the
/// caller's step also halves the internal tetrad differentiation step.
pub fn spinor_bundle(model: &Arc<SpacetimeModel>, fd: FdConfig) -> BundleSpec {
    let chart = model.chart.clone();
    let h = MatrixField::constant(chart.clone(), dirac_pairing());
    let m = model.clone();
    let omega = ConnectionField::new(chart.clone(), 4, move |x, mu| {
        spin_connection(&m, x, fd).expect("stencil stays in chart").matrices[mu].clone()
    });
    BundleSpec::new(chart, 4, h, omega)
}

/// Curved gamma matrices `gamma^mu = e_a^mu gamma^a` at a point.
pub fn gamma_curved(model: &SpacetimeModel, x: &[f64]) -> [CMat; 4] {
    let e = model.tetrad_at(x);
    let g = gamma_flat();
    [0, 1, 2, 3].map(|mu| {
        let mut out = CMat::zeros(4, 4);
        for a in 0..4 {
            if e[(mu, a)] != 0.0 {
                out += &g[a] * c(e[(mu, a)]);
            }
        }
        out
    })
}
