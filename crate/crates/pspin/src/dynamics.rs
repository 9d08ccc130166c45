//! Time integration of the three annealing dynamics and residual energies.
//!
//! QA-RT solves `i dpsi/dt = H_Q(Gamma(t)) psi`, QA-IT its Wick rotation
//! `-dpsi/dt = H_Q psi` with per-step renormalization, and SA the heat-bath
//! master equation `dP/dt = G(T(t)) P`. All three run on the `N + 1`
//! magnetization sectors with tridiagonal right-hand sides.

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegrationStats, IntegratorConfig};
use crate::master::{equilibrium_distribution, heat_bath_rate};
use crate::model::ModelParams;
use crate::schedule::{AnnealingSchedule, Driver};
use num_complex::Complex64;

/// Stability-margin fraction of the explicit RK stability boundary.
const STABILITY_MARGIN: f64 = 2.5;

/// Complex amplitudes on the magnetization grid.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl WaveFunction {
    /// Wrap amplitudes, normalizing them to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!("state norm {norm} is not normalizable")));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(Self { amplitudes, normalized: true })
    }

    /// Wrap real amplitudes (quantum states of this model are real).
    pub fn from_real(amps: Vec<f64>) -> Result<Self> {
        Self::normalized(amps.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    /// Point mass on sector `k`.
    pub fn point_mass(sectors: usize, k: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); sectors];
        amps[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes: amps, normalized: true }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// Whether the stored normalization claim still holds to 1e-9.
    pub fn is_normalized(&self) -> bool {
        self.normalized && (self.norm() - 1.0).abs() < 1e-9
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &WaveFunction) -> f64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Probabilities on the magnetization grid.
#[derive(Debug, Clone)]
pub struct ProbabilityVector {
    probabilities: Vec<f64>,
    /// Most negative raw entry seen before clipping (<= 0).
    worst_negative: f64,
}

impl ProbabilityVector {
    /// Wrap probabilities: negative excursions are clipped to zero and the
    /// worst one is kept for reporting; the sum must be 1 within 1e-6.
    pub fn new(mut probabilities: Vec<f64>) -> Result<Self> {
        let mut worst = 0.0_f64;
        for p in probabilities.iter_mut() {
            if *p < 0.0 {
                worst = worst.min(*p);
                *p = 0.0;
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::ProbabilityLoss { deviation: (sum - 1.0).abs() });
        }
        for p in probabilities.iter_mut() {
            *p /= sum;
        }
        Ok(Self { probabilities, worst_negative: worst })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Most negative raw entry that was clipped at construction.
    pub fn worst_negative(&self) -> f64 {
        self.worst_negative
    }

    /// Total-variation distance to another distribution.
    pub fn total_variation(&self, other: &ProbabilityVector) -> f64 {
        0.5 * self
            .probabilities
            .iter()
            .zip(other.probabilities.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// One sampled observable set along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    /// Wave-function norm (pre-renormalization) or probability sum.
    pub norm: f64,
    /// Instantaneous energy: `<H_Q(t)>` for quantum runs, `<E>` for SA.
    pub energy: f64,
    pub m_mean: f64,
    pub m_square: f64,
}

/// Observables sampled every `record_every` time units.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub samples: Vec<TrajectorySample>,
}

/// Result of a quantum annealing run.
#[derive(Debug, Clone)]
pub struct QuantumEvolution {
    pub state: WaveFunction,
    pub record: Option<TrajectoryRecord>,
    /// `| ||psi|| - 1 |` at the end of the run, before renormalization (RT).
    pub norm_drift: f64,
    /// Accumulated `ln ||psi||` removed by renormalization (IT).
    pub log_norm: f64,
    pub stats: IntegrationStats,
}

/// Result of a master-equation annealing run.
#[derive(Debug, Clone)]
pub struct ClassicalEvolution {
    pub probabilities: ProbabilityVector,
    pub record: Option<TrajectoryRecord>,
    /// `| sum P - 1 |` at the end of the run, before clipping.
    pub sum_drift: f64,
    pub stats: IntegrationStats,
}

/// Precomputed sector data shared by the quantum right-hand sides.
struct QuantumRhs {
    energies: Vec<f64>,
    /// Ladder couplings c_k = sqrt((N - k)(k + 1)), k = 0..N-1.
    couplings: Vec<f64>,
}

impl QuantumRhs {
    fn new(params: &ModelParams) -> Self {
        let n = params.spins();
        Self {
            energies: (0..=n).map(|k| params.sector_energy(k)).collect(),
            couplings: (0..n).map(|k| (((n - k) * (k + 1)) as f64).sqrt()).collect(),
        }
    }

    /// `out = H_Q(gamma) x` (real arithmetic).
    fn apply_real(&self, gamma: f64, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let (d, c) = (&self.energies, &self.couplings);
        for k in 0..n {
            let mut acc = d[k] * x[k];
            if k > 0 {
                acc -= gamma * c[k - 1] * x[k - 1];
            }
            if k + 1 < n {
                acc -= gamma * c[k] * x[k + 1];
            }
            out[k] = acc;
        }
    }

    /// Gershgorin bound on the spectral radius of `H_Q(gamma)`.
    fn radius(&self, gamma: f64) -> f64 {
        self.radius_shifted(gamma, 0.0)
    }

    /// Gershgorin bound on the spectral radius of `H_Q(gamma) - shift`.
    fn radius_shifted(&self, gamma: f64, shift: f64) -> f64 {
        let n = self.energies.len();
        let mut r: f64 = 0.0;
        for k in 0..n {
            let mut row = (self.energies[k] - shift).abs();
            if k > 0 {
                row += gamma.abs() * self.couplings[k - 1];
            }
            if k + 1 < n {
                row += gamma.abs() * self.couplings[k];
            }
            r = r.max(row);
        }
        r
    }

    fn quantum_energy(&self, gamma: f64, x: &[Complex64]) -> f64 {
        let n = x.len();
        let mut acc = 0.0;
        for k in 0..n {
            acc += self.energies[k] * x[k].norm_sqr();
        }
        for k in 0..n - 1 {
            acc -= 2.0 * gamma * self.couplings[k] * (x[k].conj() * x[k + 1]).re;
        }
        acc
    }
}

fn moments(weights: impl Iterator<Item = f64>, params: &ModelParams) -> (f64, f64, f64) {
    let mut total = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (k, w) in weights.enumerate() {
        let m = params.magnetization(k);
        total += w;
        m1 += w * m;
        m2 += w * m * m;
    }
    (total, m1, m2)
}

/// Sampler state driving optional trajectory records.
struct Recorder {
    every: Option<f64>,
    next: f64,
    record: TrajectoryRecord,
}

impl Recorder {
    fn new(cfg: &IntegratorConfig) -> Self {
        Self { every: cfg.record_every, next: 0.0, record: TrajectoryRecord::default() }
    }

    fn due(&mut self, t: f64) -> bool {
        match self.every {
            None => false,
            Some(dt) => {
                if t + 1e-12 >= self.next {
                    while self.next <= t + 1e-12 {
                        self.next += dt;
                    }
                    true
                } else {
                    false
                }
            }
        }
    }

    fn push(&mut self, sample: TrajectorySample) {
        self.record.samples.push(sample);
    }

    fn finish(mut self, final_sample: Option<TrajectorySample>) -> Option<TrajectoryRecord> {
        self.every?;
        if let Some(s) = final_sample {
            let repeat = self.record.samples.last().map(|l| (l.t - s.t).abs() < 1e-12).unwrap_or(false);
            if !repeat {
                self.record.samples.push(s);
            }
        }
        Some(self.record)
    }
}

fn require_driver(schedule: &AnnealingSchedule, want: Driver, what: &str) -> Result<()> {
    if schedule.driver() != want {
        return Err(Error::Domain(format!("{what} requires a {want:?} schedule")));
    }
    Ok(())
}

/// Real-time Schroedinger annealing: `i dpsi/dt = H_Q(Gamma(t)) psi`.
///
/// Integration runs in a rotating frame: the instantaneous ground energy
/// (interpolated along the ramp) is subtracted from the Hamiltonian, which
/// removes the fast global phase and keeps the truncation error of the
/// explicit method from eating the norm on long runs. Observables are
/// phase-invariant, so the returned state is physically identical. The
/// final norm must stay within 1e-4 of unity (it is then renormalized for
/// reporting); larger drift is reported as an integration failure.
pub fn evolve_rt(
    state: &WaveFunction,
    schedule: &AnnealingSchedule,
    params: &ModelParams,
    config: &IntegratorConfig,
) -> Result<QuantumEvolution> {
    require_driver(schedule, Driver::TransverseField, "evolve_rt")?;
    check_state(state, params)?;
    let rhs_data = QuantumRhs::new(params);

    // Reference energy E_0(Gamma(t)) sampled along the ramp, linearly
    // interpolated in t.
    let tau = schedule.total_time();
    let frame_samples = 33;
    let frame: Vec<f64> = (0..frame_samples)
        .map(|i| {
            let t = tau * i as f64 / (frame_samples - 1) as f64;
            let op = crate::quantum::build_quantum_hamiltonian(params, schedule.value(t))
                .expect("schedule values validated");
            crate::eigen::lowest_eigenvalues(&op, 1)[0]
        })
        .collect();
    let e_ref = move |t: f64| -> f64 {
        let x = (t / tau * (frame_samples - 1) as f64).clamp(0.0, (frame_samples - 1) as f64);
        let i = (x.floor() as usize).min(frame_samples - 2);
        let f = x - i as f64;
        frame[i] * (1.0 - f) + frame[i + 1] * f
    };

    let radius = {
        let mut r: f64 = 0.0;
        for i in 0..frame_samples {
            let t = tau * i as f64 / (frame_samples - 1) as f64;
            r = r.max(rhs_data.radius_shifted(schedule.value(t), e_ref(t)));
        }
        r
    };
    let stability_step = STABILITY_MARGIN / radius.max(1e-300);

    let mut y = state.amplitudes().to_vec();
    let mut recorder = Recorder::new(config);
    let sample = |t: f64, y: &[Complex64], rhs_data: &QuantumRhs| {
        let g = schedule.value(t);
        let (norm2, m1, m2) = moments(y.iter().map(|a| a.norm_sqr()), params);
        TrajectorySample {
            t,
            norm: norm2.sqrt(),
            energy: rhs_data.quantum_energy(g, y) / norm2,
            m_mean: m1 / norm2,
            m_square: m2 / norm2,
        }
    };
    if recorder.due(0.0) {
        recorder.push(sample(0.0, &y, &rhs_data));
    }

    let n = y.len();
    let stats = integrate(
        config,
        0.0,
        schedule.total_time(),
        stability_step,
        &mut y,
        |t, x: &[Complex64], out: &mut [Complex64]| {
            let g = schedule.value(t);
            let shift = e_ref(t);
            let (d, c) = (&rhs_data.energies, &rhs_data.couplings);
            for k in 0..n {
                let mut acc = x[k] * (d[k] - shift);
                if k > 0 {
                    acc -= x[k - 1] * (g * c[k - 1]);
                }
                if k + 1 < n {
                    acc -= x[k + 1] * (g * c[k]);
                }
                // -i * acc
                out[k] = Complex64::new(acc.im, -acc.re);
            }
        },
        |t, y| {
            if recorder.due(t) {
                recorder.push(sample(t, y, &rhs_data));
            }
            Ok(false)
        },
    )?;

    let norm = l2_norm(&y);
    let drift = (norm - 1.0).abs();
    if drift > 1e-4 {
        return Err(Error::NormDrift { drift });
    }
    let final_sample = config.record_every.map(|_| sample(schedule.total_time(), &y, &rhs_data));
    Ok(QuantumEvolution {
        state: WaveFunction::normalized(y)?,
        record: recorder.finish(final_sample),
        norm_drift: drift,
        log_norm: 0.0,
        stats,
    })
}

/// Imaginary-time Schroedinger annealing: `-dpsi/dt = H_Q(Gamma(t)) psi`,
/// renormalized after every accepted step. The removed `ln ||psi||` is
/// accumulated in `log_norm`.
pub fn evolve_it(
    state: &WaveFunction,
    schedule: &AnnealingSchedule,
    params: &ModelParams,
    config: &IntegratorConfig,
) -> Result<QuantumEvolution> {
    require_driver(schedule, Driver::TransverseField, "evolve_it")?;
    check_state(state, params)?;
    let imag: f64 = state.amplitudes().iter().map(|a| a.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 {
        return Err(Error::Domain(
            "imaginary-time evolution expects a real state (this model's eigenstates are real)"
                .into(),
        ));
    }
    let rhs_data = QuantumRhs::new(params);
    let radius = rhs_data.radius(schedule.start_value()).max(rhs_data.radius(schedule.end_value()));
    let stability_step = STABILITY_MARGIN / radius.max(1e-300);

    let mut y: Vec<f64> = state.amplitudes().iter().map(|a| a.re).collect();
    let mut log_norm = 0.0_f64;
    let mut recorder = Recorder::new(config);
    let sample = |t: f64, y: &[f64], rhs_data: &QuantumRhs| {
        let g = schedule.value(t);
        let (norm2, m1, m2) = moments(y.iter().map(|a| a * a), params);
        let mut h = vec![0.0; y.len()];
        rhs_data.apply_real(g, y, &mut h);
        let energy = y.iter().zip(h.iter()).map(|(a, b)| a * b).sum::<f64>() / norm2;
        TrajectorySample { t, norm: norm2.sqrt(), energy, m_mean: m1 / norm2, m_square: m2 / norm2 }
    };
    if recorder.due(0.0) {
        recorder.push(sample(0.0, &y, &rhs_data));
    }

    let stats = integrate(
        config,
        0.0,
        schedule.total_time(),
        stability_step,
        &mut y,
        |t, x: &[f64], out: &mut [f64]| {
            rhs_data.apply_real(schedule.value(t), x, out);
            for o in out.iter_mut() {
                *o = -*o;
            }
        },
        |t, y| {
            let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::NormDrift { drift: f64::INFINITY });
            }
            for a in y.iter_mut() {
                *a /= norm;
            }
            log_norm += norm.ln();
            if recorder.due(t) {
                recorder.push(sample(t, y, &rhs_data));
            }
            Ok(true)
        },
    )?;

    let final_sample = config.record_every.map(|_| sample(schedule.total_time(), &y, &rhs_data));
    Ok(QuantumEvolution {
        state: WaveFunction::from_real(y)?,
        record: recorder.finish(final_sample),
        norm_drift: 0.0,
        log_norm,
        stats,
    })
}

/// Thermal master-equation annealing: `dP/dt = G(T(t)) P`.
///
/// Probability is conserved by construction (generator columns sum to zero);
/// the residual float drift is reported in `sum_drift` and must stay below
/// 1e-6 during the run.
pub fn evolve_sa(
    prob: &ProbabilityVector,
    schedule: &AnnealingSchedule,
    params: &ModelParams,
    config: &IntegratorConfig,
) -> Result<ClassicalEvolution> {
    require_driver(schedule, Driver::Temperature, "evolve_sa")?;
    if prob.len() != params.sectors() {
        return Err(Error::Domain(format!(
            "probability vector has {} sectors, model needs {}",
            prob.len(),
            params.sectors()
        )));
    }
    let n = params.spins();
    let sectors = params.sectors();
    // Energy steps dE_k = E_{k+1} - E_k and the integer flip multiplicities.
    let de_up: Vec<f64> = (0..n).map(|k| params.sector_energy(k + 1) - params.sector_energy(k)).collect();

    let rates = |t: f64, up: &mut [f64], down: &mut [f64]| {
        let temp = schedule.value(t);
        let beta = if temp == 0.0 { f64::INFINITY } else { 1.0 / temp };
        for k in 0..n {
            let w = heat_bath_rate(de_up[k], beta);
            up[k] = (n - k) as f64 * w;
            down[k] = (k + 1) as f64 * (1.0 - w);
        }
    };

    // Stability bound: worst row radius of the generator along the ramp.
    let mut radius: f64 = 0.0;
    {
        let mut up = vec![0.0; n];
        let mut down = vec![0.0; n];
        for i in 0..=4 {
            let t = schedule.total_time() * i as f64 / 4.0;
            rates(t, &mut up, &mut down);
            for k in 0..sectors {
                let mut row = 0.0;
                if k < n {
                    row += up[k] + down[k];
                }
                if k > 0 {
                    row += down[k - 1] + up[k - 1];
                }
                radius = radius.max(row);
            }
        }
    }
    let stability_step = STABILITY_MARGIN / radius.max(1e-300);

    let mut y = prob.probabilities().to_vec();
    let mut recorder = Recorder::new(config);
    let sample = |t: f64, y: &[f64]| {
        let (sum, m1, m2) = moments(y.iter().copied(), params);
        let energy: f64 = y
            .iter()
            .enumerate()
            .map(|(k, p)| params.sector_energy(k) * p)
            .sum::<f64>()
            / sum;
        TrajectorySample { t, norm: sum, energy, m_mean: m1 / sum, m_square: m2 / sum }
    };
    if recorder.due(0.0) {
        recorder.push(sample(0.0, &y));
    }

    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    let stats = integrate(
        config,
        0.0,
        schedule.total_time(),
        stability_step,
        &mut y,
        |t, x: &[f64], out: &mut [f64]| {
            rates(t, &mut up, &mut down);
            for k in 0..sectors {
                let mut acc = 0.0;
                if k < n {
                    acc += down[k] * x[k + 1] - up[k] * x[k];
                }
                if k > 0 {
                    acc += up[k - 1] * x[k - 1] - down[k - 1] * x[k];
                }
                out[k] = acc;
            }
        },
        |t, y| {
            let sum: f64 = y.iter().sum();
            let dev = (sum - 1.0).abs();
            if dev > 1e-6 {
                return Err(Error::ProbabilityLoss { deviation: dev });
            }
            if recorder.due(t) {
                recorder.push(sample(t, y));
            }
            Ok(false)
        },
    )?;

    let sum_drift = (y.iter().sum::<f64>() - 1.0).abs();
    let final_sample = config.record_every.map(|_| sample(schedule.total_time(), &y));
    Ok(ClassicalEvolution {
        probabilities: ProbabilityVector::new(y)?,
        record: recorder.finish(final_sample),
        sum_drift,
        stats,
    })
}

fn check_state(state: &WaveFunction, params: &ModelParams) -> Result<()> {
    if state.len() != params.sectors() {
        return Err(Error::Domain(format!(
            "state has {} sectors, model needs {}",
            state.len(),
            params.sectors()
        )));
    }
    if (state.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("initial state norm {} is not 1", state.norm())));
    }
    Ok(())
}

/// Residual energy per spin of a quantum state:
/// `(<psi|H_C|psi> / <psi|psi> - E_0) / N`.
pub fn residual_energy_quantum(state: &WaveFunction, params: &ModelParams) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, a) in state.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        num += params.sector_energy(k) * w;
        den += w;
    }
    (num / den - params.ground_energy()) / params.spins() as f64
}

/// Residual energy per spin of a classical distribution:
/// `(<E>_P - <E>_eq(T_f)) / N`.
pub fn residual_energy_classical(
    prob: &ProbabilityVector,
    params: &ModelParams,
    t_f: f64,
) -> Result<f64> {
    if !(t_f >= 0.0) {
        return Err(Error::Domain(format!("final temperature must be >= 0, got {t_f}")));
    }
    let eq = equilibrium_distribution(params, t_f)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, p) in prob.probabilities().iter().enumerate() {
        num += params.sector_energy(k) * p;
        den += p;
    }
    Ok((num / den - eq.mean_energy(params)) / params.spins() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{initial_quantum_state, x_polarized_state};

    fn params(p: u32, n: usize) -> ModelParams {
        ModelParams::with_unit_coupling(p, n).unwrap()
    }

    fn x_state(n: usize) -> WaveFunction {
        WaveFunction::from_real(x_polarized_state(n)).unwrap()
    }

    #[test]
    fn sudden_quench_p3_residual_is_half() {
        // tau -> 0+: the x-polarized state has <m^p> = 0 for odd p, so
        // eps_res -> J/2.
        let p = params(3, 24);
        let sched = AnnealingSchedule::transverse_field(2.0, 0.0, 1e-9).unwrap();
        let out = evolve_rt(&x_state(24), &sched, &p, &IntegratorConfig::default()).unwrap();
        let eps = residual_energy_quantum(&out.state, &p);
        assert!((eps - 0.5).abs() < 1e-5, "eps = {eps}");
    }

    #[test]
    fn sudden_quench_p2_residual() {
        // <m^2> = 1/N in the x-polarized state: eps = J (N - 1) / (2 N).
        let n = 16;
        let p = params(2, n);
        let sched = AnnealingSchedule::transverse_field(2.0, 0.0, 1e-9).unwrap();
        let out = evolve_rt(&x_state(n), &sched, &p, &IntegratorConfig::default()).unwrap();
        let eps = residual_energy_quantum(&out.state, &p);
        assert!((eps - 15.0 / 32.0).abs() < 1e-5, "eps = {eps}");
    }

    #[test]
    fn x_polarized_residual_closed_form() {
        let n = 16;
        let p = params(2, n);
        let eps = residual_energy_quantum(&x_state(n), &p);
        assert!((eps - 0.46875).abs() < 1e-10);
        let point = WaveFunction::point_mass(n + 1, n);
        assert!(residual_energy_quantum(&point, &p).abs() < 1e-12);
    }

    #[test]
    fn rt_norm_conservation() {
        let n = 32;
        let p = params(2, n);
        let state = WaveFunction::from_real(initial_quantum_state(&p, 2.0).unwrap()).unwrap();
        let sched = AnnealingSchedule::transverse_field(2.0, 0.0, 50.0).unwrap();
        let out = evolve_rt(&state, &sched, &p, &IntegratorConfig::default()).unwrap();
        assert!(out.norm_drift < 1e-6, "norm drift {}", out.norm_drift);
    }

    #[test]
    fn landau_zener_two_level_oracle() {
        // Synthetic two-level crossing: diabatic splitting swept from -1 to 1
        // over tau (rate 2/tau), constant coupling Delta/2. The final
        // excitation probability must match exp(-pi Delta^2 tau / 4).
        let tau = 2000.0;
        let cfg = IntegratorConfig { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        for d2t in [0.5, 1.0, 2.0, 4.0] {
            let delta = (d2t / tau as f64).sqrt();
            let eps = |t: f64| -1.0 + 2.0 * t / tau;
            // Instantaneous eigenvectors of (e/2) sz + (delta/2) sx: with
            // chi = atan2(delta, e), excited = (cos chi/2, sin chi/2).
            let eigvec = |t: f64, excited: bool| -> [f64; 2] {
                let ang = 0.5 * delta.atan2(eps(t));
                let (s, c) = (ang.sin(), ang.cos());
                if excited {
                    [c, s]
                } else {
                    [-s, c]
                }
            };
            let g0 = eigvec(0.0, false);
            let mut y = vec![
                Complex64::new(g0[0], 0.0),
                Complex64::new(g0[1], 0.0),
            ];
            integrate(
                &cfg,
                0.0,
                tau,
                0.5,
                &mut y,
                |t, x, out| {
                    let e = eps(t);
                    let h00 = 0.5 * e;
                    let h01 = 0.5 * delta;
                    let a = x[0] * h00 + x[1] * h01;
                    let b = x[0] * h01 - x[1] * h00;
                    out[0] = Complex64::new(a.im, -a.re);
                    out[1] = Complex64::new(b.im, -b.re);
                },
                |_, _| Ok(false),
            )
            .unwrap();
            let ex = eigvec(tau, true);
            let amp = y[0] * ex[0] + y[1] * ex[1];
            let p_ex = amp.norm_sqr();
            let p_lz = (-std::f64::consts::PI * delta * delta * tau / 4.0).exp();
            assert!(
                (p_ex - p_lz).abs() / p_lz < 0.02,
                "Delta^2 tau = {d2t}: P = {p_ex} vs LZ {p_lz}"
            );
        }
    }

    #[test]
    fn it_filters_to_ground_state() {
        let n = 16;
        let p = params(2, n);
        let sched = AnnealingSchedule::transverse_field(1.5, 1.5, 40.0).unwrap();
        let out = evolve_it(&x_state(n), &sched, &p, &IntegratorConfig::default()).unwrap();
        let ground = WaveFunction::from_real(initial_quantum_state(&p, 1.5).unwrap()).unwrap();
        let deficit = 1.0 - out.state.overlap(&ground);
        assert!(deficit < 1e-8, "overlap deficit {deficit}");
        assert!(out.log_norm.is_finite());
    }

    #[test]
    fn it_energy_monotone_under_constant_field() {
        let n = 12;
        let p = params(3, n);
        let sched = AnnealingSchedule::transverse_field(1.2, 1.2, 30.0).unwrap();
        let cfg = IntegratorConfig { record_every: Some(1.0), ..Default::default() };
        let out = evolve_it(&x_state(n), &sched, &p, &cfg).unwrap();
        let record = out.record.unwrap();
        assert!(record.samples.len() > 10);
        for w in record.samples.windows(2) {
            assert!(w[0].t < w[1].t, "sample times must increase");
            assert!(
                w[1].energy <= w[0].energy + 1e-9,
                "imaginary-time energy rose: {} -> {}",
                w[0].energy,
                w[1].energy
            );
        }
    }

    #[test]
    fn sa_sudden_quench_residual() {
        let n = 16;
        let p = params(2, n);
        let (t_i, t_f) = (2.0, 0.5);
        let eq = equilibrium_distribution(&p, t_i).unwrap();
        let start = ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
        let sched = AnnealingSchedule::temperature(t_i, t_f, 1e-9).unwrap();
        let out = evolve_sa(&start, &sched, &p, &IntegratorConfig::default()).unwrap();
        let eps = residual_energy_classical(&out.probabilities, &p, t_f).unwrap();
        let eq_f = equilibrium_distribution(&p, t_f).unwrap();
        let expect = (eq.mean_energy(&p) - eq_f.mean_energy(&p)) / n as f64;
        assert!((eps - expect).abs() < 1e-7, "eps = {eps} vs {expect}");
    }

    #[test]
    fn sa_relaxes_to_equilibrium() {
        let n = 16;
        let p = params(2, n);
        let eq_hot = equilibrium_distribution(&p, 2.0).unwrap();
        let start = ProbabilityVector::new(eq_hot.probabilities().to_vec()).unwrap();
        let sched = AnnealingSchedule::temperature(1.0, 1.0, 100.0).unwrap();
        let out = evolve_sa(&start, &sched, &p, &IntegratorConfig::default()).unwrap();
        let eq = equilibrium_distribution(&p, 1.0).unwrap();
        let eq_pv = ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
        let tv = out.probabilities.total_variation(&eq_pv);
        assert!(tv < 1e-8, "TV distance {tv}");
        assert!(out.sum_drift < 1e-9, "sum drift {}", out.sum_drift);
    }

    #[test]
    fn sa_distance_to_equilibrium_monotone() {
        let n = 12;
        let p = params(3, n);
        let eq_hot = equilibrium_distribution(&p, 3.0).unwrap();
        let start = ProbabilityVector::new(eq_hot.probabilities().to_vec()).unwrap();
        let eq = equilibrium_distribution(&p, 0.9).unwrap();
        let eq_pv = ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
        let mut last = f64::INFINITY;
        for tau in [1.0, 5.0, 20.0, 80.0] {
            let sched = AnnealingSchedule::temperature(0.9, 0.9, tau).unwrap();
            let out = evolve_sa(&start, &sched, &p, &IntegratorConfig::default()).unwrap();
            let tv = out.probabilities.total_variation(&eq_pv);
            assert!(tv <= last + 1e-10, "distance rose at tau = {tau}: {tv} > {last}");
            last = tv;
        }
    }

    #[test]
    fn uniform_configuration_distribution_has_zero_residual_at_infinite_t() {
        let n = 12;
        let p = params(2, n);
        let eq = equilibrium_distribution(&p, f64::INFINITY).unwrap();
        let pv = ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
        let eps = residual_energy_classical(&pv, &p, f64::INFINITY).unwrap();
        assert!(eps.abs() < 1e-12);
    }

    #[test]
    fn wrong_driver_rejected() {
        let p = params(2, 8);
        let sched_t = AnnealingSchedule::temperature(2.0, 0.0, 1.0).unwrap();
        assert!(evolve_rt(&x_state(8), &sched_t, &p, &IntegratorConfig::default()).is_err());
        let eq = equilibrium_distribution(&p, 2.0).unwrap();
        let pv = ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
        let sched_g = AnnealingSchedule::transverse_field(2.0, 0.0, 1.0).unwrap();
        assert!(evolve_sa(&pv, &sched_g, &p, &IntegratorConfig::default()).is_err());
    }
}
