//! Heat-bath master equation on the magnetization sectors: transition
//! generator, thermal equilibrium, and the symmetrized effective Hamiltonian.
//!
//! Transition rates use the heat-bath form `w(dE) = 1 / (1 + exp(beta dE))`
//! with the overall attempt rate fixed to 1 (this sets the unit of SA time).
//! Aggregated over the `C(N, k)` configurations of each sector, the rate for
//! the move `k -> k + 1` is `(N - k) w(E_{k+1} - E_k)` and for `k -> k - 1`
//! it is `k w(E_{k-1} - E_k)`: the integer prefactors count the spins that
//! can flip, and probability conservation holds exactly by construction.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::ln_binomial;
use crate::tridiag::TridiagonalOperator;

/// Heat-bath acceptance `w(dE) = exp(-beta dE / 2) / (2 cosh(beta dE / 2))`,
/// computed in the overflow-safe form `1 / (1 + exp(beta dE))`.
///
/// `beta = +inf` (T = 0) gives the sign rule 0 / 1/2 / 1.
pub fn heat_bath_rate(delta_e: f64, beta: f64) -> f64 {
    debug_assert!(beta >= 0.0, "inverse temperature must be >= 0");
    if beta.is_infinite() {
        return match delta_e.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Less) => 1.0,
            _ => 0.5,
        };
    }
    1.0 / (1.0 + (beta * delta_e).exp())
}

/// The master-equation generator: a tridiagonal stochastic matrix on the
/// `N + 1` sectors. Columns sum to zero exactly (the diagonal is built as
/// the negative of the stored gain rates).
#[derive(Debug, Clone)]
pub struct MasterGenerator {
    /// Gain rate into `k + 1` from `k` (subdiagonal), `k = 0..N-1`.
    up: Vec<f64>,
    /// Gain rate into `k` from `k + 1` (superdiagonal), `k = 0..N-1`.
    down: Vec<f64>,
    /// Loss rates `-(up[k] + down[k-1])`.
    diag: Vec<f64>,
}

impl MasterGenerator {
    pub fn sectors(&self) -> usize {
        self.diag.len()
    }

    /// Subdiagonal gain rates (moves raising the magnetization).
    pub fn lower(&self) -> &[f64] {
        &self.up
    }

    /// Superdiagonal gain rates (moves lowering the magnetization).
    pub fn upper(&self) -> &[f64] {
        &self.down
    }

    /// Diagonal loss rates.
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `out = G x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.sectors();
        for k in 0..n {
            let mut acc = self.diag[k] * x[k];
            if k > 0 {
                acc += self.up[k - 1] * x[k - 1];
            }
            if k + 1 < n {
                acc += self.down[k] * x[k + 1];
            }
            out[k] = acc;
        }
    }

    /// Column sums of the generator (all zero up to the arithmetic itself).
    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.sectors();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k];
                if k < n - 1 {
                    s += self.up[k];
                }
                if k > 0 {
                    s += self.down[k - 1];
                }
                s
            })
            .collect()
    }
}

/// Build the generator at temperature `T` (`T = 0` uses the zero-temperature
/// limit of the rates; `T = inf` gives the infinite-temperature walk).
pub fn build_master_generator(params: &ModelParams, temperature: f64) -> Result<MasterGenerator> {
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    let beta = if temperature == 0.0 { f64::INFINITY } else { 1.0 / temperature };
    let n = params.spins();
    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    for k in 0..n {
        let de = params.sector_energy(k + 1) - params.sector_energy(k);
        let w = heat_bath_rate(de, beta);
        up[k] = (n - k) as f64 * w;
        down[k] = (k + 1) as f64 * (1.0 - w);
    }
    let diag: Vec<f64> = (0..=n)
        .map(|k| {
            let mut loss = 0.0;
            if k < n {
                loss += up[k];
            }
            if k > 0 {
                loss += down[k - 1];
            }
            -loss
        })
        .collect();
    Ok(MasterGenerator { up, down, diag })
}

/// Thermal distribution over the magnetization sectors,
/// `P(m_k) ~ C(N, k) exp(-beta E_k)`, normalized in log space.
#[derive(Debug, Clone)]
pub struct EquilibriumDistribution {
    probabilities: Vec<f64>,
    temperature: f64,
}

impl EquilibriumDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `<E>` over the distribution.
    pub fn mean_energy(&self, params: &ModelParams) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| params.sector_energy(k) * p)
            .sum()
    }
}

/// Equilibrium distribution at temperature `T`.
///
/// `T = 0` returns the point mass on the global minimum (split equally over
/// `m = +-1` for even p). Weights are assembled in log space so N ~ 10^3 and
/// beta up to infinity cannot overflow.
pub fn equilibrium_distribution(
    params: &ModelParams,
    temperature: f64,
) -> Result<EquilibriumDistribution> {
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    let n = params.spins();
    let mut probabilities = vec![0.0; n + 1];
    if temperature == 0.0 {
        if params.is_even() {
            probabilities[0] = 0.5;
            probabilities[n] = 0.5;
        } else {
            probabilities[n] = 1.0;
        }
        return Ok(EquilibriumDistribution { probabilities, temperature });
    }
    let beta = 1.0 / temperature; // T = inf gives beta = 0.
    let log_weights: Vec<f64> =
        (0..=n).map(|k| ln_binomial(n, k) - beta * params.sector_energy(k)).collect();
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (p, lw) in probabilities.iter_mut().zip(log_weights.iter()) {
        *p = (lw - max).exp();
        z += *p;
    }
    for p in probabilities.iter_mut() {
        *p /= z;
    }
    Ok(EquilibriumDistribution { probabilities, temperature })
}

/// The symmetrized effective Hamiltonian `Heff = -S G S^{-1}` with
/// `S = diag(P_eq^{-1/2})`: symmetric tridiagonal, positive semidefinite,
/// with `sqrt(P_eq)` as its zero mode.
///
/// Entries follow from detailed balance alone: the diagonal carries the loss
/// rates and the off-diagonal is `-sqrt(up_k down_k)`, the geometric mean of
/// the opposing gain rates (equal to
/// `-(N/2) K^+(m_k) / (2 cosh(beta dE_k / 2))`).
///
/// Not defined at `T = 0`, where all matrix elements vanish together with
/// the adiabatic expansion built on them.
pub fn build_effective_hamiltonian(
    params: &ModelParams,
    temperature: f64,
) -> Result<TridiagonalOperator> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "effective Hamiltonian needs T > 0, got {temperature}"
        )));
    }
    let gen = build_master_generator(params, temperature)?;
    let n = params.spins();
    let diagonal: Vec<f64> = gen.diagonal().iter().map(|d| -d).collect();
    let off_diagonal: Vec<f64> =
        (0..n).map(|k| -(gen.lower()[k] * gen.upper()[k]).sqrt()).collect();
    Ok(TridiagonalOperator::new_symmetric(diagonal, off_diagonal))
}

/// Inverse-temperature derivative of the effective Hamiltonian, entrywise
/// analytic:
///
/// - diagonal: `-(N-k) dE_k / (4 cosh^2(beta dE_k/2)) - k dE'_k / (4 cosh^2(beta dE'_k/2))`
///   with `dE_k = E_{k+1} - E_k` and `dE'_k = E_{k-1} - E_k`;
/// - off-diagonal: `+ sqrt((N-k)(k+1)) (dE_k/2) tanh(beta dE_k/2) / (2 cosh(beta dE_k/2))`.
///
/// All entries vanish exponentially as `beta -> inf`, and rows with
/// `dE = 0` contribute nothing (the energy step multiplies every term).
pub fn effective_hamiltonian_beta_derivative(
    params: &ModelParams,
    temperature: f64,
) -> Result<TridiagonalOperator> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "effective Hamiltonian derivative needs T > 0, got {temperature}"
        )));
    }
    let beta = 1.0 / temperature;
    let n = params.spins();
    let de_up: Vec<f64> =
        (0..n).map(|k| params.sector_energy(k + 1) - params.sector_energy(k)).collect();
    // d/dbeta of w(dE) = -dE / (4 cosh^2(beta dE / 2)); cosh overflow gives 0.
    let dw = |de: f64| {
        if de == 0.0 {
            return 0.0;
        }
        let c = (0.5 * beta * de).cosh();
        -de / (4.0 * c * c)
    };
    let diagonal: Vec<f64> = (0..=n)
        .map(|k| {
            let mut acc = 0.0;
            if k < n {
                acc += (n - k) as f64 * dw(de_up[k]);
            }
            if k > 0 {
                acc += k as f64 * dw(-de_up[k - 1]);
            }
            acc
        })
        .collect();
    let off_diagonal: Vec<f64> = (0..n)
        .map(|k| {
            let de = de_up[k];
            if de == 0.0 {
                return 0.0;
            }
            let half = 0.5 * beta * de;
            let c = half.cosh();
            (((n - k) * (k + 1)) as f64).sqrt() * 0.5 * de * half.tanh() / (2.0 * c)
        })
        .collect();
    Ok(TridiagonalOperator::new_symmetric(diagonal, off_diagonal))
}
