//! Mass-shell phase space of the Dirac symbol: on-shell phase points, the
//! seven-dimensional chart (x^mu, p_1, p_2, p_3) with p_0 eliminated through
//! the dispersion relation, spectral projectors, kernel frames, the pullback
//! spinor bundle, and the covariant momentum one-forms Pi_alpha.

use std::sync::Arc;

use num_complex::Complex64;

use crate::bundle::BundleSpec;
use crate::chart::{CMat, Chart, FdConfig, MatrixField};
use crate::error::{Error, Result};
use crate::subgeometry::{h_mgs, AdaptedFrame, FrameField, ProjectorField};

use super::gamma::{dirac_pairing, gamma_flat};
use super::model::{christoffels, gamma_curved, spinor_bundle, RMat, SpacetimeModel};

/// Residual above which a momentum is rejected as off the mass shell.
pub const SHELL_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// An on-shell, future-directed point (x, p) of phase space, with
/// `p_0 = -E(x, p_i)` fixed by the dispersion relation.
#[derive(Debug, Clone, Copy)]
pub struct PhasePoint {
    pub x: [f64; 4],
    pub p: [f64; 4],
}

impl PhasePoint {
    /// Positive energy `E = sqrt(m^2 + g^{ij} p_i p_j)` at (x, p_spatial).
    pub fn energy(model: &SpacetimeModel, x: &[f64; 4], p_spatial: &[f64; 3]) -> Result<f64> {
        let ginv = model.metric_inv_at(x)?;
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += ginv[(i + 1, j + 1)] * p_spatial[i] * p_spatial[j];
            }
        }
        let e2 = model.mass * model.mass + quad;
        if !(e2 > 0.0) {
            return Err(Error::DomainError(format!(
                "dispersion relation has no real energy (E^2 = {e2})"
            )));
        }
        Ok(e2.sqrt())
    }

    /// Construct the on-shell point with the positive-energy branch.
    pub fn on_shell(model: &SpacetimeModel, x: [f64; 4], p_spatial: [f64; 3]) -> Result<Self> {
        let e = Self::energy(model, &x, &p_spatial)?;
        Ok(Self { x, p: [-e, p_spatial[0], p_spatial[1], p_spatial[2]] })
    }

    /// Accept an explicit four-momentum, rejecting it when the mass-shell
    /// residual exceeds the tolerance or when it is past-directed.
    pub fn from_momentum(model: &SpacetimeModel, x: [f64; 4], p: [f64; 4]) -> Result<Self> {
        let pp = Self { x, p };
        let residual = pp.shell_residual(model)?;
        if residual.abs() > SHELL_TOL {
            return Err(Error::OffShell { residual });
        }
        if p[0] >= 0.0 {
            return Err(Error::OffShell { residual: p[0] });
        }
        Ok(pp)
    }

    /// Mass-shell residual `g^{mu nu} p_mu p_nu + m^2`.
    pub fn shell_residual(&self, model: &SpacetimeModel) -> Result<f64> {
        let ginv = model.metric_inv_at(&self.x)?;
        let mut s = model.mass * model.mass;
        for mu in 0..4 {
            for nu in 0..4 {
                s += ginv[(mu, nu)] * self.p[mu] * self.p[nu];
            }
        }
        Ok(s)
    }

    /// Chart coordinates (x^mu, p_1, p_2, p_3) on the mass shell.
    pub fn coords(&self) -> [f64; 7] {
        [self.x[0], self.x[1], self.x[2], self.x[3], self.p[1], self.p[2], self.p[3]]
    }

    pub fn from_coords(model: &SpacetimeModel, y: &[f64]) -> Result<Self> {
        let x = [y[0], y[1], y[2], y[3]];
        Self::on_shell(model, x, [y[4], y[5], y[6]])
    }
}

/// The 7-dimensional chart (t, x, y, z, p1, p2, p3) over the mass shell.
pub fn gamma_chart(model: &SpacetimeModel) -> Chart {
    let mut names: Vec<String> = model.chart.names().to_vec();
    names.extend(["p1".into(), "p2".into(), "p3".into()]);
    let mut intervals: Vec<(f64, f64)> = (0..4).map(|a| model.chart.interval(a)).collect();
    intervals.extend([model.momentum_interval; 3]);
    let steps = vec![model.fd_step; 7];
    Chart::new(names, intervals, steps).expect("model chart intervals are valid")
}

/// Slashed momentum `p_mu gamma^mu(x)`.
pub fn slashed(model: &SpacetimeModel, x: &[f64], p: &[f64; 4]) -> CMat {
    let gammas = gamma_curved(model, x);
    let mut out = CMat::zeros(4, 4);
    for mu in 0..4 {
        if p[mu] != 0.0 {
            out += &gammas[mu] * c(p[mu]);
        }
    }
    out
}

/// Spectral projectors of the principal symbol `D = -p_slash - m`:
/// `P = (m - p_slash)/2m` onto ker D and `P' = (m + p_slash)/2m`, so that
/// `D = 0 P - 2m P'`.
pub fn dirac_projectors(model: &SpacetimeModel, pp: &PhasePoint) -> Result<(CMat, CMat)> {
    let residual = pp.shell_residual(model)?;
    if residual.abs() > SHELL_TOL {
        return Err(Error::OffShell { residual });
    }
    let ps = slashed(model, &pp.x, &pp.p);
    let id = CMat::identity(4, 4);
    let half_inv_m = c(0.5 / model.mass);
    let p = (&id * c(model.mass) - &ps) * half_inv_m;
    let pprime = (&id * c(model.mass) + &ps) * half_inv_m;
    Ok((p, pprime))
}

/// Positive-energy kernel frame at (x, p): the rest-frame basis {e1, e2}
/// projected with P and h-orthonormalized, plus the analogous negative
/// branch {e3, e4} projected with P'. Smooth in (x, p) for future-directed
/// momenta; the parallel block has h_par = I and the perpendicular block
/// h_perp = -I.
pub fn kernel_frame(model: &SpacetimeModel, pp: &PhasePoint) -> Result<(CMat, CMat)> {
    let (p, pprime) = dirac_projectors(model, pp)?;
    let h = dirac_pairing();
    let par_cols: Vec<_> = (0..2).map(|j| p.column(j).into_owned()).collect();
    let perp_cols: Vec<_> = (2..4).map(|j| pprime.column(j).into_owned()).collect();
    let (par, _) = h_mgs(&h, &par_cols)?;
    let (perp, _) = h_mgs(&h, &perp_cols)?;
    Ok((par, perp))
}

/// The spinor bundle pulled back to the mass-shell chart: the connection has
/// the spacetime spin-connection matrices in the dx directions and vanishes
/// in the dp directions; the pairing stays the constant Dirac form.
pub fn gamma_bundle(model: &Arc<SpacetimeModel>, fd: FdConfig) -> Result<(Arc<BundleSpec>, ProjectorField)> {
    let chart = gamma_chart(model);
    let spacetime_bundle = Arc::new(spinor_bundle(model, fd));
    let h = MatrixField::constant(chart.clone(), dirac_pairing());
    let st = spacetime_bundle.clone();
    let omega = crate::bundle::ConnectionField::new(chart.clone(), 4, move |y, mu| {
        if mu < 4 {
            st.omega().eval(&y[0..4], mu)
        } else {
            CMat::zeros(4, 4)
        }
    });
    let bundle = Arc::new(BundleSpec::new(chart.clone(), 4, h, omega));
    let m = model.clone();
    let p_field = MatrixField::new(chart, 4, 4, move |y| {
        let pp = PhasePoint::from_coords(&m, y).expect("dispersion relation solvable on chart");
        dirac_projectors(&m, &pp).expect("on-shell by construction").0
    });
    let projector = ProjectorField::new(bundle, p_field, 2)?;
    Ok((projector.bundle_arc(), projector))
}

/// The kernel frame as a smooth frame field over the mass-shell chart.
pub struct KernelFrameField {
    model: Arc<SpacetimeModel>,
}

impl KernelFrameField {
    pub fn new(model: Arc<SpacetimeModel>) -> Self {
        Self { model }
    }
}

impl FrameField for KernelFrameField {
    fn frame_at(&self, point: &[f64]) -> Result<AdaptedFrame> {
        let pp = PhasePoint::from_coords(&self.model, point)?;
        let (par, perp) = kernel_frame(&self.model, &pp)?;
        let h = dirac_pairing();
        let mut full = CMat::zeros(4, 4);
        for j in 0..2 {
            full.set_column(j, &par.column(j));
            full.set_column(2 + j, &perp.column(j));
        }
        let coframe = full
            .try_inverse()
            .ok_or_else(|| Error::FrameDiscontinuity { point: point.to_vec() })?;
        let h_par = par.adjoint() * &h * &par;
        let h_perp = perp.adjoint() * &h * &perp;
        Ok(AdaptedFrame {
            point: point.to_vec(),
            par,
            perp,
            h_par,
            h_perp,
            coframe,
            par_signs: vec![1.0, 1.0],
            perp_signs: vec![-1.0, -1.0],
        })
    }
}

/// The covariant momentum one-forms
/// `Pi_alpha = dp_alpha - p_rho Gamma^rho_{alpha mu} dx^mu` expressed on the
/// chart basis of the mass shell: `components[alpha][k]` is Pi_alpha applied
/// to the k-th chart direction (dx^0..dx^3, dp_1..dp_3), with dp_0 eliminated
/// through the dispersion relation.
pub struct PiForm {
    pub components: [[f64; 7]; 4],
    /// Chain-rule coefficients of the eliminated coordinate:
    /// dp_0 = dp0_dx[mu] dx^mu + dp0_dp[i] dp_i.
    pub dp0_dx: [f64; 4],
    pub dp0_dp: [f64; 3],
}

pub fn pi_form(model: &SpacetimeModel, pp: &PhasePoint, fd: FdConfig) -> Result<PiForm> {
    let gammas = christoffels(model, &pp.x, fd)?;
    let g = model.metric_at(&pp.x);
    let ginv = model.metric_inv_at(&pp.x)?;
    let e = -pp.p[0];

    // metric-compatibility recovery of the metric gradient keeps the
    // constraint identity p^alpha Pi_alpha = 0 exact to rounding
    let mut dginv: Vec<RMat> = Vec::with_capacity(4);
    for mu in 0..4 {
        let mut dg = RMat::zeros(4, 4);
        for lam in 0..4 {
            for nu in 0..4 {
                let mut s = 0.0;
                for rho in 0..4 {
                    s += g[(lam, rho)] * gammas[rho][(nu, mu)] + g[(nu, rho)] * gammas[rho][(lam, mu)];
                }
                dg[(lam, nu)] = s;
            }
        }
        dginv.push(-(&ginv * dg * &ginv));
    }

    let mut dp0_dx = [0.0; 4];
    for mu in 0..4 {
        let mut s = 0.0;
        for i in 1..4 {
            for j in 1..4 {
                s += dginv[mu][(i, j)] * pp.p[i] * pp.p[j];
            }
        }
        dp0_dx[mu] = -s / (2.0 * e);
    }
    let mut p_upper = [0.0; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            p_upper[mu] += ginv[(mu, nu)] * pp.p[nu];
        }
    }
    let mut dp0_dp = [0.0; 3];
    for i in 0..3 {
        dp0_dp[i] = -p_upper[i + 1] / e;
    }

    let mut components = [[0.0; 7]; 4];
    for alpha in 0..4 {
        for k in 0..4 {
            let mut v = if alpha == 0 { dp0_dx[k] } else { 0.0 };
            for rho in 0..4 {
                v -= pp.p[rho] * gammas[rho][(alpha, k)];
            }
            components[alpha][k] = v;
        }
        for i in 0..3 {
            components[alpha][4 + i] =
                if alpha == 0 { dp0_dp[i] } else if alpha == i + 1 { 1.0 } else { 0.0 };
        }
    }
    Ok(PiForm { components, dp0_dx, dp0_dp })
}

/// Residual of the tangency constraint `p^alpha Pi_alpha = 0` over all chart
/// directions.
pub fn pi_constraint_residual(model: &SpacetimeModel, pp: &PhasePoint, pi: &PiForm) -> Result<f64> {
    let ginv = model.metric_inv_at(&pp.x)?;
    let mut p_upper = [0.0; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            p_upper[mu] += ginv[(mu, nu)] * pp.p[nu];
        }
    }
    let mut worst = 0.0f64;
    for k in 0..7 {
        let mut s = 0.0;
        for alpha in 0..4 {
            s += p_upper[alpha] * pi.components[alpha][k];
        }
        worst = worst.max(s.abs());
    }
    Ok(worst)
}

/// The principal symbol `D = -p_slash - m` at a phase point.
pub fn principal_symbol(model: &SpacetimeModel, pp: &PhasePoint) -> CMat {
    let ps = slashed(model, &pp.x, &pp.p);
    -(ps + CMat::identity(4, 4) * c(model.mass))
}

/// Flat gammas re-exported for consumers assembling spin observables.
pub fn flat_gammas() -> [CMat; 4] {
    gamma_flat()
}
