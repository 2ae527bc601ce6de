//! Flat gamma matrices in the standard Dirac representation, satisfying
//! `gamma^a gamma^b + gamma^b gamma^a = -2 eta^{ab}` for the signature
//! (-,+,+,+), together with the Dirac pairing beta = gamma^0.

use num_complex::Complex64;

use crate::chart::CMat;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// Minkowski frame metric eta_{ab} = diag(-1, 1, 1, 1).
pub fn eta() -> [f64; 4] {
    [-1.0, 1.0, 1.0, 1.0]
}

/// The four flat gamma matrices `gamma^a` in the Dirac representation:
/// `gamma^0 = diag(1,1,-1,-1)`, `gamma^k = [[0, sigma_k], [-sigma_k, 0]]`.
pub fn gamma_flat() -> [CMat; 4] {
    let z = c(0.0);
    let g0 = CMat::from_row_slice(
        4,
        4,
        &[
            c(1.0), z, z, z,
            z, c(1.0), z, z,
            z, z, c(-1.0), z,
            z, z, z, c(-1.0),
        ],
    );
    let g1 = CMat::from_row_slice(
        4,
        4,
        &[
            z, z, z, c(1.0),
            z, z, c(1.0), z,
            z, c(-1.0), z, z,
            c(-1.0), z, z, z,
        ],
    );
    let g2 = CMat::from_row_slice(
        4,
        4,
        &[
            z, z, z, ci(-1.0),
            z, z, ci(1.0), z,
            z, ci(1.0), z, z,
            ci(-1.0), z, z, z,
        ],
    );
    let g3 = CMat::from_row_slice(
        4,
        4,
        &[
            z, z, c(1.0), z,
            z, z, z, c(-1.0),
            c(-1.0), z, z, z,
            z, c(1.0), z, z,
        ],
    );
    [g0, g1, g2, g3]
}

/// Dirac pairing matrix beta = gamma^0: `h(Phi, Psi) = Phi^dagger beta Psi`,
/// an indefinite Hermitian form with signature (+, +, -, -).
pub fn dirac_pairing() -> CMat {
    gamma_flat()[0].clone()
}

/// Flat gamma with lowered index, `gamma_a = eta_{ab} gamma^b`.
pub fn gamma_flat_lower() -> [CMat; 4] {
    let g = gamma_flat();
    let e = eta();
    [0, 1, 2, 3].map(|a| &g[a] * c(e[a]))
}

/// Spin generator `sigma^{ab} = (i/2)[gamma^a, gamma^b]` for arbitrary
/// (possibly curved) gamma matrices.
pub fn sigma(gamma_a: &CMat, gamma_b: &CMat) -> CMat {
    (gamma_a * gamma_b - gamma_b * gamma_a) * ci(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::max_abs;

    #[test]
    fn anticommutators_reproduce_eta() {
        let g = gamma_flat();
        let e = eta();
        for a in 0..4 {
            for b in 0..4 {
                let anti = &g[a] * &g[b] + &g[b] * &g[a];
                let expected = CMat::identity(4, 4) * c(-2.0 * if a == b { e[a] } else { 0.0 });
                assert!(max_abs(&(anti - expected)) == 0.0, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn pairing_makes_gammas_self_adjoint() {
        // beta gamma^a = (gamma^a)^dagger beta for every a
        let g = gamma_flat();
        let beta = dirac_pairing();
        for a in 0..4 {
            let lhs = &beta * &g[a];
            let rhs = g[a].adjoint() * &beta;
            assert!(max_abs(&(lhs - rhs)) == 0.0, "a={a}");
        }
    }

    #[test]
    fn sigma_is_antisymmetric() {
        let g = gamma_flat();
        for a in 0..4 {
            for b in 0..4 {
                let s = sigma(&g[a], &g[b]) + sigma(&g[b], &g[a]);
                assert!(max_abs(&s) == 0.0);
            }
        }
    }
}
