//! The transverse-field Hamiltonian on the maximal-spin sector.
//!
//! In the sector basis `|m_k>` the Hamiltonian is tridiagonal: the classical
//! energy `E(m_k)` on the diagonal and the transverse-field coupling
//! `-Gamma sqrt((N - k)(k + 1))` between adjacent sectors (the angular
//! momentum ladder element, equal to `-(N/2) Gamma K^+(m_k)`).

use crate::eigen::lowest_eigenpairs;
use crate::error::{Error, Result};
use crate::model::{critical_field_estimate, ModelParams};
use crate::tridiag::TridiagonalOperator;

/// ln C(n, k) via log-gamma, stable up to n ~ 10^3 and beyond.
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Build `H_Q(Gamma)` for the given model: symmetric tridiagonal on the
/// `N + 1` sectors.
///
/// For even p the operator commutes with the reflection `k -> N - k`.
pub fn build_quantum_hamiltonian(params: &ModelParams, gamma: f64) -> Result<TridiagonalOperator> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("Gamma must be finite and >= 0, got {gamma}")));
    }
    let n = params.spins();
    let diagonal: Vec<f64> = (0..=n).map(|k| params.sector_energy(k)).collect();
    let off_diagonal: Vec<f64> = (0..n)
        .map(|k| -gamma * (((n - k) * (k + 1)) as f64).sqrt())
        .collect();
    Ok(TridiagonalOperator::new_symmetric(diagonal, off_diagonal))
}

/// The x-polarized product state in the sector basis: amplitudes
/// `sqrt(C(N, k) / 2^N)`. This is the `Gamma -> infinity` ground state and the
/// sector image of the uniform superposition over all 2^N configurations.
pub fn x_polarized_state(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| (0.5 * (ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2)).exp())
        .collect()
}

/// Ground state of `H_Q(Gamma_i)`: real, nodeless (stoquastic operator),
/// unit normalized. Logs a warning when `Gamma_i` does not exceed the
/// critical-field estimate, where the paramagnetic initial condition stops
/// being meaningful.
pub fn initial_quantum_state(params: &ModelParams, gamma_i: f64) -> Result<Vec<f64>> {
    if let Ok(gc) = critical_field_estimate(params) {
        if gamma_i <= gc {
            log::warn!(
                "initial field Gamma_i = {gamma_i} does not exceed the critical-field estimate {gc:.4}"
            );
        }
    }
    let op = build_quantum_hamiltonian(params, gamma_i)?;
    let (_, mut vectors) = lowest_eigenpairs(&op, 1)?;
    let mut ground = vectors.pop().expect("one eigenpair requested");
    // Perron-Frobenius: fix the global sign so the state is nonnegative.
    let sum: f64 = ground.iter().sum();
    if sum < 0.0 {
        for a in ground.iter_mut() {
            *a = -*a;
        }
    }
    Ok(ground)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spin_diagonal_at_zero_field() {
        let params = ModelParams::with_unit_coupling(2, 1).unwrap();
        let op = build_quantum_hamiltonian(&params, 0.0).unwrap();
        assert_eq!(op.diagonal(), &[-0.5, -0.5]);
        assert_eq!(op.off_diagonal(), &[0.0]);
    }

    #[test]
    fn single_spin_ground_state_closed_form() {
        // H = [[-1/2, -2], [-2, -1/2]]: ground (1, 1)/sqrt(2), energy -5/2.
        let params = ModelParams::with_unit_coupling(2, 1).unwrap();
        let op = build_quantum_hamiltonian(&params, 2.0).unwrap();
        let vals = crate::eigen::lowest_eigenvalues(&op, 2);
        assert!((vals[0] - (-2.5)).abs() < 1e-14);
        assert!((vals[1] - 1.5).abs() < 1e-14);
        let state = initial_quantum_state(&params, 2.0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state[0] - r).abs() < 1e-12);
        assert!((state[1] - r).abs() < 1e-12);
    }

    #[test]
    fn reflection_symmetry_for_even_p() {
        let params = ModelParams::with_unit_coupling(4, 10).unwrap();
        let op = build_quantum_hamiltonian(&params, 0.7).unwrap();
        let n = params.spins();
        for k in 0..=n {
            assert_eq!(op.diagonal()[k], op.diagonal()[n - k]);
        }
        for k in 0..n {
            assert_eq!(op.off_diagonal()[k], op.off_diagonal()[n - 1 - k]);
        }
    }

    #[test]
    fn triplet_sector_matches_full_two_spin_hamiltonian() {
        // N = 2, p = 2, J = 1, Gamma = 1: the 3x3 sector operator must share
        // its ground energy with the full two-spin Hamiltonian
        // -(1 + s1 s2)/2 - Gamma (sx1 + sx2) restricted to the triplet.
        // Dense 4x4 oracle in the product basis |s1 s2>.
        let gamma = 1.0;
        let mut h = [[0.0_f64; 4]; 4];
        for (idx, row) in h.iter_mut().enumerate() {
            let s1 = if idx & 1 == 0 { 1.0 } else { -1.0 };
            let s2 = if idx & 2 == 0 { 1.0 } else { -1.0 };
            row[idx] = -(1.0 + s1 * s2) / 2.0;
        }
        for idx in 0..4_usize {
            for j in 0..2 {
                h[idx][idx ^ (1 << j)] -= gamma;
            }
        }
        let dense = crate::oracle::dense_symmetric_eigenvalues(
            &h.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
        );
        let params = ModelParams::with_unit_coupling(2, 2).unwrap();
        let op = build_quantum_hamiltonian(&params, gamma).unwrap();
        let vals = crate::eigen::lowest_eigenvalues(&op, 1);
        // The singlet state has energy 0 > ground, so the global ground
        // state lives in the triplet sector.
        assert!((vals[0] - dense[0]).abs() < 1e-12, "{} vs {}", vals[0], dense[0]);
    }

    #[test]
    fn strong_field_limit() {
        // Gamma >> J: lowest eigenvalue -> -N Gamma + O(1), first gap -> 2 Gamma.
        let params = ModelParams::with_unit_coupling(3, 12).unwrap();
        let gamma = 1e4;
        let op = build_quantum_hamiltonian(&params, gamma).unwrap();
        let vals = crate::eigen::lowest_eigenvalues(&op, 2);
        let n = params.spins() as f64;
        assert!((vals[0] + n * gamma).abs() < 10.0);
        assert!(((vals[1] - vals[0]) - 2.0 * gamma).abs() < 10.0);
    }

    #[test]
    fn large_field_ground_state_is_binomial() {
        let n = 8;
        let params = ModelParams::with_unit_coupling(2, n).unwrap();
        let state = initial_quantum_state(&params, 1e6).unwrap();
        let binom = x_polarized_state(n);
        for k in 0..=n {
            assert!((state[k] - binom[k]).abs() < 1e-6, "k = {k}");
        }
        let norm: f64 = binom.iter().map(|a| a * a).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_is_nodeless() {
        let params = ModelParams::with_unit_coupling(3, 64).unwrap();
        let state = initial_quantum_state(&params, 2.0).unwrap();
        assert!(state.iter().all(|&a| a > 0.0), "amplitudes must be strictly one sign");
    }
}
