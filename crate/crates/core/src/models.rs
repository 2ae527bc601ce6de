//! Ready-made bundle/projector configurations: the two-level Bloch-sphere
//! model and seeded families of random h-compatible projector/connection
//! pairs used by property sweeps.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{BundleSpec, ConnectionField};
use crate::chart::{CMat, Chart, MatrixField};
use crate::error::Result;
use crate::subgeometry::{ClosureFrameField, ProjectorField};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Two-level Bloch model over the (theta, phi) chart with h = I and a flat
/// connection. The projector is P = |psi><psi| with
/// psi = (cos(theta/2), e^{-i phi} sin(theta/2)), a gauge in which
/// A_{11 phi} = sin^2(theta/2), F_{11 theta phi} = sin(theta)/2 and the
/// base-trace quantum metric is diag(1, sin^2 theta)/4.
pub struct BlochModel {
    pub projector: ProjectorField,
    pub frame_field: ClosureFrameField,
}

/// The Bloch spinor in the fixed gauge used by [`bloch_model`].
pub fn bloch_spinor(theta: f64, phi: f64) -> CMat {
    let half = 0.5 * theta;
    CMat::from_column_slice(
        2,
        1,
        &[
            c(half.cos()),
            Complex64::from_polar(half.sin(), -phi),
        ],
    )
}

/// Orthogonal complement of the Bloch spinor, smooth in the same gauge.
pub fn bloch_perp_spinor(theta: f64, phi: f64) -> CMat {
    let half = 0.5 * theta;
    CMat::from_column_slice(
        2,
        1,
        &[
            -Complex64::from_polar(half.sin(), phi),
            c(half.cos()),
        ],
    )
}

/// Chart for the Bloch model, bounded away from the coordinate poles where
/// the gauge degenerates.
pub fn bloch_chart() -> Chart {
    Chart::new(
        vec!["theta", "phi"],
        vec![(0.35, std::f64::consts::PI - 0.35), (0.0, 2.0 * std::f64::consts::PI)],
        vec![2e-2, 2e-2],
    )
    .expect("static chart is valid")
}

pub fn bloch_model() -> Result<BlochModel> {
    let chart = bloch_chart();
    let h = MatrixField::constant(chart.clone(), CMat::identity(2, 2));
    let omega = ConnectionField::flat(chart.clone(), 2);
    let bundle = Arc::new(BundleSpec::new(chart.clone(), 2, h, omega));
    let p_field = MatrixField::new(chart, 2, 2, |x| {
        let psi = bloch_spinor(x[0], x[1]);
        &psi * psi.adjoint()
    });
    let projector = ProjectorField::new(bundle, p_field, 1)?;
    let frame_field = ClosureFrameField::new(
        &projector,
        |x| bloch_spinor(x[0], x[1]),
        |x| bloch_perp_spinor(x[0], x[1]),
    );
    Ok(BlochModel { projector, frame_field })
}

/// A seeded random h-compatible configuration: constant pseudo-metric
/// h = diag(signature), a smoothly varying anti-self-adjoint connection and
/// a smoothly varying h-compatible projector of exact rank m.
pub struct RandomModel {
    pub projector: ProjectorField,
    pub n: usize,
    pub m: usize,
    pub signature: Vec<f64>,
}

fn random_complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(
            scale * (rng.gen::<f64>() * 2.0 - 1.0),
            scale * (rng.gen::<f64>() * 2.0 - 1.0),
        )
    })
}

/// Deterministic family indexed by seed. Even seeds use a positive-definite
/// metric, odd seeds an indefinite one, exercising the pseudo-metric paths.
pub fn random_compatible(seed: u64) -> Result<RandomModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 + (rng.gen::<u64>() % 3) as usize; // fiber rank 3..=5
    let m = 1 + (rng.gen::<u64>() % (n as u64 - 1)) as usize;
    let indefinite = seed % 2 == 1;
    let signature: Vec<f64> = (0..n)
        .map(|i| if indefinite && i >= m { -1.0 } else { 1.0 })
        .collect();

    let chart = Chart::uniform(2, (-1.0, 1.0), 1e-2).expect("static chart is valid");
    let h_mat = CMat::from_fn(n, n, |i, j| if i == j { c(signature[i]) } else { c(0.0) });
    let h_field = MatrixField::constant(chart.clone(), h_mat.clone());

    // connection omega_mu = h^{-1} K_mu(x) with K anti-Hermitian: exactly
    // compatible with the constant metric
    let k0: Vec<CMat> = (0..2)
        .map(|_| {
            let a = random_complex_matrix(&mut rng, n, n, 0.4);
            (&a - a.adjoint()) * c(0.5)
        })
        .collect();
    let k1: Vec<CMat> = (0..2)
        .map(|_| {
            let a = random_complex_matrix(&mut rng, n, n, 0.4);
            (&a - a.adjoint()) * c(0.5)
        })
        .collect();
    let h_inv = h_mat.clone().try_inverse().expect("diag +-1 is invertible");
    let omega = ConnectionField::new(chart.clone(), n, {
        let h_inv = h_inv.clone();
        move |x, mu| {
            let k = &k0[mu] * c(x[0].sin()) + &k1[mu] * c((1.3 * x[1]).cos());
            &h_inv * k
        }
    });
    let bundle = Arc::new(BundleSpec::new(chart.clone(), n, h_field, omega));

    // projector built from an h-orthonormalized moving frame: idempotent and
    // h-compatible by construction at every point
    let amp0 = random_complex_matrix(&mut rng, n, m, 0.25);
    let amp1 = random_complex_matrix(&mut rng, n, m, 0.25);
    let p_field = MatrixField::new(chart, n, n, {
        let h_mat = h_mat.clone();
        move |x| {
            let mut cand = CMat::zeros(n, m);
            for a in 0..m {
                let mut col = CMat::zeros(n, 1);
                col[(a, 0)] = c(1.0);
                let wobble =
                    amp0.column(a) * c(x[0].sin()) + amp1.column(a) * c((0.7 * x[1]).cos());
                for i in 0..n {
                    col[(i, 0)] += wobble[i];
                }
                cand.set_column(a, &col.column(0));
            }
            // h-orthonormalize the columns, then P = sum_A eps_A s_A s_A^dag h
            let cols: Vec<_> = (0..m).map(|j| cand.column(j).into_owned()).collect();
            let (basis, signs) = crate::subgeometry::h_mgs(&h_mat, &cols)
                .expect("construction keeps candidates h-nondegenerate");
            let mut p = CMat::zeros(n, n);
            for a in 0..m {
                let s = basis.column(a);
                let row = s.adjoint() * &h_mat;
                p += (s * row) * c(signs[a]);
            }
            p
        }
    });
    let projector = ProjectorField::new(bundle, p_field, m)?;
    Ok(RandomModel { projector, n, m, signature })
}

/// Seeded rank-1 projector on C^3 with h = I, built as P = v v^dagger with a
/// normalized random vector (for frame property tests).
pub fn random_rank1_projector(seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_complex_matrix(&mut rng, 3, 1, 1.0);
    let norm = v.norm();
    let v = v / c(norm.max(1e-9));
    &v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{max_abs, FdConfig};
    use crate::subgeometry;

    #[test]
    fn bloch_projector_invariants() {
        let model = bloch_model().unwrap();
        for &(t, p) in &[(0.7, 0.3), (1.2, 4.0), (std::f64::consts::FRAC_PI_2, 0.0)] {
            let check = model.projector.validate_at(&[t, p]);
            assert!(check.idempotency <= 1e-12);
            assert!(check.h_compatibility <= 1e-12);
            assert!(check.trace_deviation <= 1e-12);
        }
    }

    #[test]
    fn random_models_satisfy_projector_invariants() {
        for seed in 0..12 {
            let model = random_compatible(seed).unwrap();
            let check = model.projector.validate_at(&[0.3, -0.4]);
            assert!(check.idempotency <= 1e-12, "seed {seed}");
            assert!(check.h_compatibility <= 1e-12, "seed {seed}");
            assert!(check.trace_deviation <= 1e-10, "seed {seed}");
            let res = crate::bundle::check_compatibility(
                model.projector.bundle(),
                &[0.3, -0.4],
                FdConfig::central4(1e-2),
            )
            .unwrap();
            assert!(res <= 1e-12, "seed {seed}: compatibility {res:.3e}");
        }
    }

    #[test]
    fn random_rank1_projector_is_projector() {
        for seed in 0..8 {
            let p = random_rank1_projector(seed);
            assert!(max_abs(&(&p * &p - &p)) <= 1e-12);
            let _ = subgeometry::RANK_TOL;
        }
    }
}
