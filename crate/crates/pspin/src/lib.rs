//! Annealing dynamics on the fully-connected p-spin Ising ferromagnet.
//!
//! The model is the uniform ferromagnet `E(m) = -(J N / 2) m^p` on `N` spins,
//! where `m` is the magnetization per spin. Permutation symmetry confines both
//! the quantum and the classical single-spin-flip dynamics to the `N + 1`
//! magnetization sectors `m_k = -1 + 2k/N`, so everything here works with
//! tridiagonal operators and costs `O(N)` per time step.
//!
//! What the crate provides:
//!
//! - [`model`]: model parameters, magnetization grid, entropy and free-energy
//!   landscape, classical critical temperature.
//! - [`schedule`]: linear annealing ramps of the transverse field or the
//!   temperature.
//! - [`quantum`] / [`master`]: the transverse-field Hamiltonian, the heat-bath
//!   master-equation generator, the equilibrium distribution, and the
//!   symmetrized effective Hamiltonian with its inverse-temperature derivative.
//! - [`dynamics`]: real-time Schroedinger annealing (QA-RT), imaginary-time
//!   annealing (QA-IT), and thermal master-equation annealing (SA), with
//!   residual-energy evaluation.
//! - [`spectral`]: instantaneous spectra, dynamical gaps, minimum-gap scans,
//!   and gap-scaling fits.
//! - [`analysis`]: Landau-Zener fits, envelope extrapolation to the
//!   thermodynamic limit, Kramers escape predictions, and adiabatic tails.
//! - [`oracle`]: brute-force evolutions over all 2^N configurations used to
//!   validate the sector reduction at small N.
//!
//! All SA times are in units of the single-flip attempt rate (the overall
//! rate constant of the heat-bath rates is fixed to 1); quantum evolution
//! sets hbar = 1.

pub mod analysis;
pub mod dynamics;
pub mod eigen;
pub mod error;
mod fit;
pub mod integrate;
pub mod master;
pub mod model;
pub mod oracle;
pub mod quantum;
pub mod schedule;
pub mod spectral;
pub mod tridiag;

pub use analysis::{
    adiabatic_qa_prediction, adiabatic_sa_tail, barrier, envelope_closed_form_p2,
    envelope_implicit_pge3, fit_lz_regime, fit_sa_exponential, kramers_predict, lz_probability,
    Barrier, EnvelopeResult, KramersPrediction, LzFit, ResidualEnergyCurve, SaTail,
};
pub use dynamics::{
    evolve_it, evolve_rt, evolve_sa, residual_energy_classical, residual_energy_quantum,
    ClassicalEvolution, ProbabilityVector, QuantumEvolution, TrajectoryRecord, WaveFunction,
};
pub use error::{Error, Result};
pub use integrate::{IntegratorConfig, Method};
pub use master::{
    build_effective_hamiltonian, build_master_generator, effective_hamiltonian_beta_derivative,
    equilibrium_distribution, heat_bath_rate, EquilibriumDistribution, MasterGenerator,
};
pub use model::{
    classical_energy, critical_field_estimate, critical_temperature, entropy_density,
    free_energy_density, kinetic_coefficients, ModelParams,
};
pub use quantum::{build_quantum_hamiltonian, initial_quantum_state, x_polarized_state};
pub use schedule::{AnnealingSchedule, Driver};
pub use spectral::{
    classical_spectrum, dynamical_gap, gap_scaling_fit, min_gap_scan, quantum_spectrum,
    tridiag_lowest_eigs, GapScaling, ScalingModel, SpectrumSlice,
};
pub use tridiag::TridiagonalOperator;

/// `count` logarithmically spaced values from `start` to `end` (inclusive).
pub fn logspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    assert!(start > 0.0 && end > 0.0 && count >= 2, "logspace needs positive endpoints and >= 2 points");
    let (a, b) = (start.ln(), end.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
