//! Brute-force cross-checks over the full 2^N configuration space.
//!
//! These validate the magnetization-sector reduction: the quantum dynamics
//! assembled from bitmask rules (diagonal `-(J N / 2) m(sigma)^p`,
//! off-diagonal `-Gamma` per single spin flip) and the configuration-space
//! master equation with heat-bath rates. A hard size cap keeps accidental
//! use at large N out of test runs.

use crate::dynamics::WaveFunction;
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::master::heat_bath_rate;
use crate::model::ModelParams;
use crate::quantum::ln_binomial;
use crate::schedule::{AnnealingSchedule, Driver};
use num_complex::Complex64;

/// Hard cap on the oracle's spin count (4096 configurations).
pub const MAX_ORACLE_SPINS: usize = 12;

fn check_cap(params: &ModelParams) -> Result<()> {
    if params.spins() > MAX_ORACLE_SPINS {
        return Err(Error::OracleSizeCap { n: params.spins(), cap: MAX_ORACLE_SPINS });
    }
    Ok(())
}

/// Per-configuration classical energies, indexed by spin bitmask
/// (bit j set = spin j up).
fn config_energies(params: &ModelParams) -> Vec<f64> {
    let n = params.spins();
    (0..1usize << n)
        .map(|s| {
            let k = s.count_ones() as usize;
            params.sector_energy(k)
        })
        .collect()
}

/// Full-space quantum state over all 2^N configurations.
#[derive(Debug, Clone)]
pub struct FullQuantumState {
    amplitudes: Vec<Complex64>,
    n: usize,
}

impl FullQuantumState {
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Residual energy per spin against the classical ground state.
    pub fn residual_energy(&self, params: &ModelParams) -> f64 {
        let energies = config_energies(params);
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            num += energies[s] * w;
            den += w;
        }
        (num / den - params.ground_energy()) / params.spins() as f64
    }

    /// Projection amplitudes onto the symmetric-sector basis states
    /// `|m_k> = C(N,k)^{-1/2} sum_{|sigma| = k} |sigma>`.
    pub fn sector_amplitudes(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
        for (s, a) in self.amplitudes.iter().enumerate() {
            sums[s.count_ones() as usize] += a;
        }
        (0..=n)
            .map(|k| sums[k] * (-0.5 * ln_binomial(n, k)).exp())
            .collect()
    }

    /// Total weight carried by the symmetric sector (1 when the dynamics
    /// never left it).
    pub fn symmetric_sector_weight(&self) -> f64 {
        let norm2: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let proj: f64 = self.sector_amplitudes().iter().map(|a| a.norm_sqr()).sum();
        proj / norm2
    }
}

/// Full-space probability distribution over all 2^N configurations.
#[derive(Debug, Clone)]
pub struct FullClassicalState {
    probabilities: Vec<f64>,
    n: usize,
}

impl FullClassicalState {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Magnetization marginal `P(m_k) = sum_{|sigma| = k} P(sigma)`.
    pub fn sector_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (s, p) in self.probabilities.iter().enumerate() {
            out[s.count_ones() as usize] += p;
        }
        out
    }

    /// Residual energy per spin against equilibrium at `t_f`.
    pub fn residual_energy(&self, params: &ModelParams, t_f: f64) -> Result<f64> {
        let eq = crate::master::equilibrium_distribution(params, t_f)?;
        let energies = config_energies(params);
        let mean: f64 =
            self.probabilities.iter().enumerate().map(|(s, p)| energies[s] * p).sum();
        Ok((mean - eq.mean_energy(params)) / params.spins() as f64)
    }

    /// Largest probability spread among configurations of equal
    /// magnetization (zero when permutation symmetry is exact).
    pub fn permutation_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut lo = vec![f64::INFINITY; n + 1];
        let mut hi = vec![f64::NEG_INFINITY; n + 1];
        for (s, p) in self.probabilities.iter().enumerate() {
            let k = s.count_ones() as usize;
            lo[k] = lo[k].min(*p);
            hi[k] = hi[k].max(*p);
        }
        (0..=n).map(|k| hi[k] - lo[k]).fold(0.0, f64::max)
    }
}

/// Embed a sector-basis state into the full space: each configuration of
/// sector k receives `psi(k) / sqrt(C(N, k))`. `None` gives the uniform
/// superposition (the x-polarized state).
fn embed_initial(params: &ModelParams, initial: Option<&WaveFunction>) -> Result<Vec<Complex64>> {
    let n = params.spins();
    let dim = 1usize << n;
    match initial {
        None => {
            let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
            Ok(vec![a; dim])
        }
        Some(state) => {
            if state.len() != params.sectors() {
                return Err(Error::Domain(format!(
                    "initial state has {} sectors, model needs {}",
                    state.len(),
                    params.sectors()
                )));
            }
            let per_config: Vec<Complex64> = (0..=n)
                .map(|k| state.amplitudes()[k] * (-0.5 * ln_binomial(n, k)).exp())
                .collect();
            Ok((0..dim).map(|s| per_config[s.count_ones() as usize]).collect())
        }
    }
}

fn quantum_radius(params: &ModelParams, gamma: f64) -> f64 {
    0.5 * params.coupling() * params.spins() as f64 + gamma.abs() * params.spins() as f64
}

/// Integrate `i d|psi>/dt = H_Q(t) |psi>` over the full configuration space.
pub fn full_quantum_evolve(
    params: &ModelParams,
    schedule: &AnnealingSchedule,
    config: &IntegratorConfig,
    initial: Option<&WaveFunction>,
) -> Result<FullQuantumState> {
    check_cap(params)?;
    if schedule.driver() != Driver::TransverseField {
        return Err(Error::Domain("full_quantum_evolve requires a transverse-field schedule".into()));
    }
    let n = params.spins();
    let energies = config_energies(params);
    let mut y = embed_initial(params, initial)?;
    let radius = quantum_radius(params, schedule.start_value().max(schedule.end_value()));
    integrate(
        config,
        0.0,
        schedule.total_time(),
        2.5 / radius,
        &mut y,
        |t, x: &[Complex64], out: &mut [Complex64]| {
            let g = schedule.value(t);
            for (s, o) in out.iter_mut().enumerate() {
                let mut acc = x[s] * energies[s];
                for j in 0..n {
                    acc -= x[s ^ (1 << j)] * g;
                }
                *o = Complex64::new(acc.im, -acc.re);
            }
        },
        |_, _| Ok(false),
    )?;
    Ok(FullQuantumState { amplitudes: y, n })
}

/// Wick-rotated full-space evolution `-d|psi>/dt = H_Q(t) |psi>`, with
/// per-step renormalization.
pub fn full_imaginary_evolve(
    params: &ModelParams,
    schedule: &AnnealingSchedule,
    config: &IntegratorConfig,
    initial: Option<&WaveFunction>,
) -> Result<FullQuantumState> {
    check_cap(params)?;
    if schedule.driver() != Driver::TransverseField {
        return Err(Error::Domain("full_imaginary_evolve requires a transverse-field schedule".into()));
    }
    let n = params.spins();
    let energies = config_energies(params);
    let mut y: Vec<f64> = embed_initial(params, initial)?.iter().map(|a| a.re).collect();
    let radius = quantum_radius(params, schedule.start_value().max(schedule.end_value()));
    integrate(
        config,
        0.0,
        schedule.total_time(),
        2.5 / radius,
        &mut y,
        |t, x: &[f64], out: &mut [f64]| {
            let g = schedule.value(t);
            for (s, o) in out.iter_mut().enumerate() {
                let mut acc = x[s] * energies[s];
                for j in 0..n {
                    acc -= x[s ^ (1 << j)] * g;
                }
                *o = -acc;
            }
        },
        |_, y| {
            let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in y.iter_mut() {
                *a /= norm;
            }
            Ok(true)
        },
    )?;
    let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    let amplitudes = y.into_iter().map(|a| Complex64::new(a / norm, 0.0)).collect();
    Ok(FullQuantumState { amplitudes, n })
}

/// Integrate the configuration-space master equation with heat-bath
/// single-spin-flip rates, starting from the Boltzmann distribution at the
/// schedule's initial temperature. Detailed balance of the rates is checked
/// entrywise at construction.
pub fn full_master_evolve(
    params: &ModelParams,
    schedule: &AnnealingSchedule,
    config: &IntegratorConfig,
) -> Result<FullClassicalState> {
    check_cap(params)?;
    if schedule.driver() != Driver::Temperature {
        return Err(Error::Domain("full_master_evolve requires a temperature schedule".into()));
    }
    let n = params.spins();
    let dim = 1usize << n;
    let energies = config_energies(params);

    // Entrywise detailed balance at the initial temperature: every
    // single-flip pair must satisfy w(dE) e^{-beta E'} = w(-dE) e^{-beta E}.
    {
        let t_i = schedule.start_value();
        let beta = if t_i == 0.0 { f64::INFINITY } else { 1.0 / t_i };
        if beta.is_finite() {
            for s in 0..dim {
                for j in 0..n {
                    let s2 = s ^ (1 << j);
                    let de = energies[s2] - energies[s];
                    let lhs = heat_bath_rate(de, beta) * (-beta * energies[s]).exp();
                    let rhs = heat_bath_rate(-de, beta) * (-beta * energies[s2]).exp();
                    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
                    if ((lhs - rhs) / scale).abs() > 1e-12 {
                        return Err(Error::Domain(format!(
                            "detailed balance violated for pair ({s}, {s2})"
                        )));
                    }
                }
            }
        }
    }

    // Boltzmann start in log space.
    let t_i = schedule.start_value();
    let beta_i = if t_i == 0.0 { f64::INFINITY } else { 1.0 / t_i };
    let mut y: Vec<f64> = if beta_i.is_infinite() {
        let mut v = vec![0.0; dim];
        let full = dim - 1; // all spins up
        if params.is_even() {
            v[0] = 0.5;
            v[full] = 0.5;
        } else {
            v[full] = 1.0;
        }
        v
    } else {
        let logs: Vec<f64> = energies.iter().map(|e| -beta_i * e).collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ws: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = ws.iter().sum();
        ws.into_iter().map(|w| w / z).collect()
    };

    // Sector-level rate tables rebuilt at each evaluation time.
    let mut w_up = vec![0.0; n + 1]; // flip one down spin up, from sector k
    let mut w_dn = vec![0.0; n + 1]; // flip one up spin down, from sector k
    let de_up: Vec<f64> =
        (0..n).map(|k| params.sector_energy(k + 1) - params.sector_energy(k)).collect();
    let radius = 2.0 * n as f64;
    integrate(
        config,
        0.0,
        schedule.total_time(),
        2.5 / radius,
        &mut y,
        |t, x: &[f64], out: &mut [f64]| {
            let temp = schedule.value(t);
            let beta = if temp == 0.0 { f64::INFINITY } else { 1.0 / temp };
            for k in 0..n {
                let w = heat_bath_rate(de_up[k], beta);
                w_up[k] = w;
                w_dn[k + 1] = 1.0 - w;
            }
            for (s, o) in out.iter_mut().enumerate() {
                let k = s.count_ones() as usize;
                let mut gain = 0.0;
                let mut loss = 0.0;
                for j in 0..n {
                    let s2 = s ^ (1 << j);
                    if s & (1 << j) == 0 {
                        // Neighbor s2 has spin j up: it decays into s, and s
                        // escapes to s2 by flipping j up.
                        gain += w_dn[k + 1] * x[s2];
                        loss += w_up[k];
                    } else {
                        gain += w_up[k - 1] * x[s2];
                        loss += w_dn[k];
                    }
                }
                *o = gain - loss * x[s];
            }
        },
        |_, y| {
            let sum: f64 = y.iter().sum();
            let dev = (sum - 1.0).abs();
            if dev > 1e-6 {
                return Err(Error::ProbabilityLoss { deviation: dev });
            }
            Ok(false)
        },
    )?;
    Ok(FullClassicalState { probabilities: y, n })
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending. Test oracle for the tridiagonal solver; O(n^3) per
/// sweep, fine up to n of a few hundred.
pub fn dense_symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "matrix must be square (row {i})");
    }
    let fro: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if fro == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off < 1e-15 * fro {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = a[i][j];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[j][j] - a[i][i]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let aki = a[k][i];
                    let akj = a[k][j];
                    a[k][i] = c * aki - s * akj;
                    a[k][j] = s * aki + c * akj;
                }
                for k in 0..n {
                    let aik = a[i][k];
                    let ajk = a[j][k];
                    a[i][k] = c * aik - s * ajk;
                    a[j][k] = s * aik + c * ajk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}
