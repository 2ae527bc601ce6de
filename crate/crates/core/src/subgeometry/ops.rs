//! Tensor operations of the sub-bundle geometry: shape operators, Berry
//! connection/curvature, quantum metric, quantum geometric tensor, and the
//! Gauss and Codazzi-Mainardi residuals.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bundle::covariant_derivative_fn;
use crate::chart::{fd_partial_fn, max_abs, CMat, FdConfig};
use crate::error::{Error, Result};

use super::frame::{AdaptedFrame, FrameField};
use super::ProjectorField;

pub type RMat = DMatrix<f64>;

const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Shape-operator component arrays at one point:
/// `s_par[mu] = S^I_{A mu}`, `s_adj[mu] = S^A_{I mu}`, and the second
/// fundamental form `s_second[mu] = S_{IA mu} = h_{IJ} S^J_{A mu}`.
pub struct ShapeComponents {
    pub s_par: Vec<CMat>,
    pub s_adj: Vec<CMat>,
    pub s_second: Vec<CMat>,
}

/// Quantum metric `G_{AB mu nu}` plus its base-manifold trace
/// `G_{mu nu} = h^{AB} G_{AB mu nu}`.
pub struct QuantumMetric {
    pub g: Vec<Vec<CMat>>,
    pub base_trace: Vec<Vec<Complex64>>,
}

/// Residuals accompanying the quantum geometric tensor.
#[derive(Debug, Clone, Copy)]
pub struct QgtReport {
    /// || Q_{AB(mu nu)} - G_{AB mu nu} || (algebraic, zero by construction).
    pub sym_vs_metric: f64,
    /// || Q_{AB[mu nu]} + (i/2) F + (1/2) Omega_par || with F from the
    /// connection-derivative route.
    pub antisym_vs_decomposition: f64,
    /// Residual of Q against h[del Phi, (I-P) del Psi].
    pub alt_orthogonal: f64,
    /// Residual of Q against h[Phi, (del P)(del P) Psi].
    pub alt_projector_product: f64,
}

pub struct Qgt {
    pub q: Vec<Vec<CMat>>,
    pub report: QgtReport,
}

/// Berry curvature by both routes: the connection-derivative formula and
/// i times the parallel Gauss combination.
pub struct BerryCurvature {
    pub f_derivative: Vec<Vec<CMat>>,
    pub f_gauss: Vec<Vec<CMat>>,
}

#[derive(Debug, Clone, Copy)]
pub struct GaussResiduals {
    pub parallel: f64,
    pub perp: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CodazziResiduals {
    pub parallel: f64,
    pub perp: f64,
    /// Difference of the residuals under two distinct torsion-free base
    /// connections; the antisymmetrized Gamma terms cancel identically.
    pub base_independence: f64,
}

/// Torsion-free connection coefficients on the base manifold, used only to
/// define the derivative of the shape operator. Any symmetric choice gives
/// the same Codazzi residuals.
#[derive(Clone)]
pub enum BaseConnection {
    Zero,
    /// `gammas[rho]` is the matrix `Gamma^rho_{mu nu}`.
    Constant(Vec<RMat>),
    Field(Arc<dyn Fn(&[f64]) -> Vec<RMat> + Send + Sync>),
}

impl BaseConnection {
    pub fn eval(&self, point: &[f64], dim: usize) -> Result<Vec<RMat>> {
        let gammas = match self {
            BaseConnection::Zero => vec![RMat::zeros(dim, dim); dim],
            BaseConnection::Constant(g) => g.clone(),
            BaseConnection::Field(f) => f(point),
        };
        if gammas.len() != dim || gammas.iter().any(|g| g.nrows() != dim || g.ncols() != dim) {
            return Err(Error::DomainError(
                "base connection dimensions do not match the chart".into(),
            ));
        }
        let mut asym = 0.0f64;
        for g in &gammas {
            for mu in 0..dim {
                for nu in (mu + 1)..dim {
                    asym = asym.max((g[(mu, nu)] - g[(nu, mu)]).abs());
                }
            }
        }
        if asym > 1e-12 {
            return Err(Error::TorsionfulConnection { asymmetry: asym });
        }
        Ok(gammas)
    }

    /// A fixed nonzero symmetric constant connection, used as the alternate
    /// choice in the base-independence report.
    pub fn reference_constant(dim: usize) -> Self {
        let gammas = (0..dim)
            .map(|rho| {
                RMat::from_fn(dim, dim, |mu, nu| {
                    0.05 * (rho + 1) as f64 * ((mu + 1) * (nu + 1)) as f64 / (dim * dim) as f64
                })
            })
            .collect();
        BaseConnection::Constant(gammas)
    }
}

/// Covariant derivative of the parallel-frame block of a frame field.
fn nabla_par(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    mu: usize,
    fd: FdConfig,
) -> Result<CMat> {
    covariant_derivative_fn(pf.bundle(), point, mu, fd, |y| ff.frame_at(y).map(|f| f.par))
}

fn nabla_perp(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    mu: usize,
    fd: FdConfig,
) -> Result<CMat> {
    covariant_derivative_fn(pf.bundle(), point, mu, fd, |y| ff.frame_at(y).map(|f| f.perp))
}

/// Berry connection coefficient matrix for a single axis,
/// `A_{AB mu} = i h(s_A, del_mu s_B)`.
fn berry_axis(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    mu: usize,
    fd: FdConfig,
) -> Result<CMat> {
    let frame = ff.frame_at(point)?;
    let h = pf.bundle().h_at(point);
    let dpar = nabla_par(pf, ff, point, mu, fd)?;
    Ok(frame.par.adjoint() * h * dpar * IM)
}

/// Lowered perpendicular connection coefficients
/// `omega'_{IJ mu} = h(s_I, del_mu s_J)`.
fn perp_axis(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    mu: usize,
    fd: FdConfig,
) -> Result<CMat> {
    let frame = ff.frame_at(point)?;
    let h = pf.bundle().h_at(point);
    let dperp = nabla_perp(pf, ff, point, mu, fd)?;
    Ok(frame.perp.adjoint() * h * dperp)
}

/// Berry connection coefficients `A_{AB mu}` for every axis. Hermitian in
/// (A, B) up to finite-difference error.
pub fn berry_connection(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
) -> Result<Vec<CMat>> {
    (0..pf.bundle().chart().dim())
        .map(|mu| berry_axis(pf, ff, point, mu, fd))
        .collect()
}

/// Lowered perpendicular-block connection coefficients for every axis.
pub fn perp_connection(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
) -> Result<Vec<CMat>> {
    (0..pf.bundle().chart().dim())
        .map(|mu| perp_axis(pf, ff, point, mu, fd))
        .collect()
}

/// Shape-operator components from the covariant derivative of the projector:
/// `S^I_{A mu} = sigma^I[(del_mu P) s_A]`, `S^A_{I mu} = sigma^A[(del_mu P) s_I]`.
pub fn shape_operator(
    pf: &ProjectorField,
    frame: &AdaptedFrame,
    fd: FdConfig,
) -> Result<ShapeComponents> {
    let dim = pf.bundle().chart().dim();
    let co_par = frame.coframe_par();
    let co_perp = frame.coframe_perp();
    let mut s_par = Vec::with_capacity(dim);
    let mut s_adj = Vec::with_capacity(dim);
    let mut s_second = Vec::with_capacity(dim);
    for mu in 0..dim {
        let dp = pf.nabla_p(&frame.point, mu, fd)?;
        let sp = &co_perp * &dp * &frame.par;
        let sa = &co_par * &dp * &frame.perp;
        s_second.push(&frame.h_perp * &sp);
        s_par.push(sp);
        s_adj.push(sa);
    }
    Ok(ShapeComponents { s_par, s_adj, s_second })
}

/// Adjointness residual `max | h[s_I, S_mu s_A] - h[S^dag_mu s_I, s_A] |`.
pub fn adjointness_residual(
    pf: &ProjectorField,
    frame: &AdaptedFrame,
    fd: FdConfig,
) -> Result<f64> {
    let h = pf.bundle().h_at(&frame.point);
    let mut worst = 0.0f64;
    for mu in 0..pf.bundle().chart().dim() {
        let dp = pf.nabla_p(&frame.point, mu, fd)?;
        let lhs = frame.perp.adjoint() * &h * &dp * &frame.par;
        let rhs = frame.perp.adjoint() * dp.adjoint() * &h * &frame.par;
        worst = worst.max(max_abs(&(lhs - rhs)));
    }
    Ok(worst)
}

fn qgt_tensor(frame: &AdaptedFrame, shape: &ShapeComponents) -> Vec<Vec<CMat>> {
    let dim = shape.s_par.len();
    (0..dim)
        .map(|mu| {
            (0..dim)
                .map(|nu| shape.s_par[mu].adjoint() * &frame.h_perp * &shape.s_par[nu])
                .collect()
        })
        .collect()
}

/// Quantum metric `G_{AB mu nu} = (1/2) h_IJ (conj(S^I_{A mu}) S^J_{B nu} +
/// conj(S^I_{A nu}) S^J_{B mu})` with its base-manifold trace.
pub fn quantum_metric(frame: &AdaptedFrame, shape: &ShapeComponents) -> Result<QuantumMetric> {
    let q = qgt_tensor(frame, shape);
    let dim = q.len();
    let half = Complex64::new(0.5, 0.0);
    let g: Vec<Vec<CMat>> = (0..dim)
        .map(|mu| (0..dim).map(|nu| (&q[mu][nu] + &q[nu][mu]) * half).collect())
        .collect();
    let hinv = frame.h_par_inv()?;
    let hinv_t = hinv.transpose();
    let base_trace = g
        .iter()
        .map(|row| row.iter().map(|m| (&hinv_t * m).trace()).collect())
        .collect();
    Ok(QuantumMetric { g, base_trace })
}

/// Projections of the full curvature onto the parallel and perpendicular
/// blocks, `Omega_{AB mu nu}` and `Omega_{IJ mu nu}`.
pub fn full_curvature_blocks(
    pf: &ProjectorField,
    frame: &AdaptedFrame,
    fd: FdConfig,
) -> Result<(Vec<Vec<CMat>>, Vec<Vec<CMat>>)> {
    let dim = pf.bundle().chart().dim();
    let h = pf.bundle().h_at(&frame.point);
    let mut par_block = Vec::with_capacity(dim);
    let mut perp_block = Vec::with_capacity(dim);
    for mu in 0..dim {
        let mut row_par = Vec::with_capacity(dim);
        let mut row_perp = Vec::with_capacity(dim);
        for nu in 0..dim {
            let slice = crate::bundle::curvature(pf.bundle(), &frame.point, mu, nu, fd)?;
            row_par.push(frame.par.adjoint() * &h * &slice.matrix * &frame.par);
            row_perp.push(frame.perp.adjoint() * &h * &slice.matrix * &frame.perp);
        }
        par_block.push(row_par);
        perp_block.push(row_perp);
    }
    Ok((par_block, perp_block))
}

/// Berry curvature by both routes. The derivative route is
/// `F = dA - dA - i h^{CD}(A A - A A)`; the Gauss route is i times
/// `Omega_par = Omega_{AB} + h_IJ(conj(S) S - conj(S) S)`.
pub fn berry_curvature(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
) -> Result<BerryCurvature> {
    let chart = pf.bundle().chart().clone();
    let dim = chart.dim();
    let frame = ff.frame_at(point)?;
    let hinv = frame.h_par_inv()?;
    let a = berry_connection(pf, ff, point, fd)?;

    let mut da = vec![vec![CMat::zeros(0, 0); dim]; dim];
    for mu in 0..dim {
        for nu in 0..dim {
            if mu == nu {
                let m = frame.par_rank();
                da[mu][nu] = CMat::zeros(m, m);
                continue;
            }
            da[mu][nu] = fd_partial_fn(&chart, point, mu, fd, |y| berry_axis(pf, ff, y, nu, fd))?;
        }
    }

    let shape = shape_operator(pf, &frame, fd)?;
    let q = qgt_tensor(&frame, &shape);
    let (omega_par, _) = full_curvature_blocks(pf, &frame, fd)?;

    let mut f_derivative = Vec::with_capacity(dim);
    let mut f_gauss = Vec::with_capacity(dim);
    for mu in 0..dim {
        let mut row_d = Vec::with_capacity(dim);
        let mut row_g = Vec::with_capacity(dim);
        for nu in 0..dim {
            let comm = &a[mu] * &hinv * &a[nu] - &a[nu] * &hinv * &a[mu];
            row_d.push(&da[mu][nu] - &da[nu][mu] - comm * IM);
            row_g.push((&omega_par[mu][nu] + &q[mu][nu] - &q[nu][mu]) * IM);
        }
        f_derivative.push(row_d);
        f_gauss.push(row_g);
    }
    Ok(BerryCurvature { f_derivative, f_gauss })
}

/// Quantum geometric tensor `Q_{AB mu nu} = h_IJ conj(S^I_{A mu}) S^J_{B nu}`
/// together with its decomposition and alternative-formula residuals.
pub fn qgt(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
) -> Result<Qgt> {
    let dim = pf.bundle().chart().dim();
    let frame = ff.frame_at(point)?;
    let h = pf.bundle().h_at(point);
    let p = pf.eval(point);
    let n = p.nrows();

    let shape = shape_operator(pf, &frame, fd)?;
    let q = qgt_tensor(&frame, &shape);
    let metric = quantum_metric(&frame, &shape)?;
    let curv = berry_curvature(pf, ff, point, fd)?;
    let (omega_par, _) = full_curvature_blocks(pf, &frame, fd)?;

    let dpar: Vec<CMat> = (0..dim)
        .map(|mu| nabla_par(pf, ff, point, mu, fd))
        .collect::<Result<_>>()?;
    let dp: Vec<CMat> = (0..dim)
        .map(|mu| pf.nabla_p(point, mu, fd))
        .collect::<Result<_>>()?;
    let complement = CMat::identity(n, n) - &p;

    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let mut sym = 0.0f64;
    let mut antisym = 0.0f64;
    let mut alt1 = 0.0f64;
    let mut alt2 = 0.0f64;
    for mu in 0..dim {
        for nu in 0..dim {
            let q_sym = (&q[mu][nu] + &q[nu][mu]) * half;
            let q_anti = (&q[mu][nu] - &q[nu][mu]) * half;
            sym = sym.max(max_abs(&(&q_sym - &metric.g[mu][nu])));
            antisym = antisym.max(max_abs(
                &(&q_anti + &curv.f_derivative[mu][nu] * half_i + &omega_par[mu][nu] * half),
            ));
            let alt_orth = dpar[mu].adjoint() * &h * &complement * &dpar[nu];
            alt1 = alt1.max(max_abs(&(&alt_orth - &q[mu][nu])));
            let alt_prod = frame.par.adjoint() * &h * &dp[mu] * &dp[nu] * &frame.par;
            alt2 = alt2.max(max_abs(&(&alt_prod - &q[mu][nu])));
        }
    }
    Ok(Qgt {
        q,
        report: QgtReport {
            sym_vs_metric: sym,
            antisym_vs_decomposition: antisym,
            alt_orthogonal: alt1,
            alt_projector_product: alt2,
        },
    })
}

/// Residuals of the parallel and perpendicular Gauss equations: the curvature
/// of each projected connection against its shape-operator expression.
pub fn gauss_residuals(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
) -> Result<GaussResiduals> {
    let chart = pf.bundle().chart().clone();
    let dim = chart.dim();
    let frame = ff.frame_at(point)?;
    let curv = berry_curvature(pf, ff, point, fd)?;

    let mut parallel = 0.0f64;
    for mu in 0..dim {
        for nu in 0..dim {
            parallel = parallel
                .max(max_abs(&(&curv.f_derivative[mu][nu] - &curv.f_gauss[mu][nu])));
        }
    }

    // perpendicular block: curvature of D' from the lowered coefficients
    let hperp_inv = frame.h_perp_inv()?;
    let w = perp_connection(pf, ff, point, fd)?;
    let shape = shape_operator(pf, &frame, fd)?;
    let (_, omega_perp) = full_curvature_blocks(pf, &frame, fd)?;
    let mut perp = 0.0f64;
    for mu in 0..dim {
        for nu in 0..dim {
            if mu == nu {
                continue;
            }
            let dw_mu_nu = fd_partial_fn(&chart, point, mu, fd, |y| perp_axis(pf, ff, y, nu, fd))?;
            let dw_nu_mu = fd_partial_fn(&chart, point, nu, fd, |y| perp_axis(pf, ff, y, mu, fd))?;
            let route1 =
                dw_mu_nu - dw_nu_mu + &w[mu] * &hperp_inv * &w[nu] - &w[nu] * &hperp_inv * &w[mu];
            let s_term = shape.s_adj[mu].adjoint() * &frame.h_par * &shape.s_adj[nu]
                - shape.s_adj[nu].adjoint() * &frame.h_par * &shape.s_adj[mu];
            let route2 = &omega_perp[mu][nu] + s_term;
            perp = perp.max(max_abs(&(route1 - route2)));
        }
    }
    Ok(GaussResiduals { parallel, perp })
}

/// Residuals of the Codazzi-Mainardi equations with a chosen torsion-free
/// base connection, plus the base-independence report.
pub fn codazzi_residuals(
    pf: &ProjectorField,
    ff: &dyn FrameField,
    point: &[f64],
    fd: FdConfig,
    base: &BaseConnection,
) -> Result<CodazziResiduals> {
    let chart = pf.bundle().chart().clone();
    let dim = chart.dim();
    let frame = ff.frame_at(point)?;
    let h = pf.bundle().h_at(point);
    let hpar_inv = frame.h_par_inv()?;
    let hperp_inv = frame.h_perp_inv()?;

    // mixed-index projected connection coefficients at the center
    let mut w_par = Vec::with_capacity(dim);
    let mut w_perp = Vec::with_capacity(dim);
    for mu in 0..dim {
        let dpar = nabla_par(pf, ff, point, mu, fd)?;
        let dperp = nabla_perp(pf, ff, point, mu, fd)?;
        w_par.push(&hpar_inv * (frame.par.adjoint() * &h * dpar));
        w_perp.push(&hperp_inv * (frame.perp.adjoint() * &h * dperp));
    }

    // shape-component fields in the gauge of the frame field
    let s_up_at = |y: &[f64], nu: usize| -> Result<CMat> {
        let f = ff.frame_at(y)?;
        let dp = pf.nabla_p(y, nu, fd)?;
        Ok(f.coframe_perp() * dp * &f.par)
    };
    let s_down_at = |y: &[f64], nu: usize| -> Result<CMat> {
        let f = ff.frame_at(y)?;
        let dp = pf.nabla_p(y, nu, fd)?;
        Ok(f.coframe_par() * dp * &f.perp)
    };

    let s_up: Vec<CMat> = (0..dim).map(|nu| s_up_at(point, nu)).collect::<Result<_>>()?;
    let s_down: Vec<CMat> = (0..dim).map(|nu| s_down_at(point, nu)).collect::<Result<_>>()?;

    let mut ds_up = vec![vec![CMat::zeros(0, 0); dim]; dim];
    let mut ds_down = vec![vec![CMat::zeros(0, 0); dim]; dim];
    for mu in 0..dim {
        for nu in 0..dim {
            if mu == nu {
                continue;
            }
            ds_up[mu][nu] = fd_partial_fn(&chart, point, mu, fd, |y| s_up_at(y, nu))?;
            ds_down[mu][nu] = fd_partial_fn(&chart, point, mu, fd, |y| s_down_at(y, nu))?;
        }
    }

    // mixed projections of the full curvature
    let co_par = frame.coframe_par();
    let co_perp = frame.coframe_perp();
    let mut omega_up = vec![vec![CMat::zeros(0, 0); dim]; dim];
    let mut omega_down = vec![vec![CMat::zeros(0, 0); dim]; dim];
    for mu in 0..dim {
        for nu in 0..dim {
            if mu == nu {
                continue;
            }
            let slice = crate::bundle::curvature(pf.bundle(), point, mu, nu, fd)?;
            omega_up[mu][nu] = &co_perp * &slice.matrix * &frame.par;
            omega_down[mu][nu] = &co_par * &slice.matrix * &frame.perp;
        }
    }

    let residuals = |gammas: &[RMat]| -> (f64, f64) {
        let mut res_par = 0.0f64;
        let mut res_perp = 0.0f64;
        for mu in 0..dim {
            for nu in (mu + 1)..dim {
                let mut lhs_up = &ds_up[mu][nu] - &ds_up[nu][mu]
                    + &w_perp[mu] * &s_up[nu]
                    - &w_perp[nu] * &s_up[mu]
                    - &s_up[nu] * &w_par[mu]
                    + &s_up[mu] * &w_par[nu];
                let mut lhs_down = &ds_down[mu][nu] - &ds_down[nu][mu]
                    + &w_par[mu] * &s_down[nu]
                    - &w_par[nu] * &s_down[mu]
                    - &s_down[nu] * &w_perp[mu]
                    + &s_down[mu] * &w_perp[nu];
                for rho in 0..dim {
                    let coeff = Complex64::new(gammas[rho][(mu, nu)] - gammas[rho][(nu, mu)], 0.0);
                    lhs_up -= &s_up[rho] * coeff;
                    lhs_down -= &s_down[rho] * coeff;
                }
                res_par = res_par.max(max_abs(&(&lhs_up - &omega_up[mu][nu])));
                res_perp = res_perp.max(max_abs(&(&lhs_down + &omega_down[mu][nu])));
            }
        }
        (res_par, res_perp)
    };

    let gammas = base.eval(point, dim)?;
    let (res_par, res_perp) = residuals(&gammas);

    let alternate = if gammas.iter().all(|g| g.iter().all(|&x| x == 0.0)) {
        BaseConnection::reference_constant(dim)
    } else {
        BaseConnection::Zero
    };
    let alt_gammas = alternate.eval(point, dim)?;
    let (alt_par, alt_perp) = residuals(&alt_gammas);

    Ok(CodazziResiduals {
        parallel: res_par,
        perp: res_perp,
        base_independence: (res_par - alt_par).abs().max((res_perp - alt_perp).abs()),
    })
}
