//! Explicit Runge-Kutta time integration.
//!
//! The default method is the Dormand-Prince 5(4) embedded pair with adaptive
//! step control; a fixed-step classical RK4 is kept for cross-checks. Both
//! work on real and complex state vectors through the [`OdeScalar`] trait.
//! Step sizes are capped by a stability bound supplied by the caller (the
//! spectral-radius estimate of the generator), so loose tolerances can never
//! push the explicit method outside its stability region.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Scalar element of an ODE state vector.
pub trait OdeScalar: Copy {
    fn zero() -> Self;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
}

impl OdeScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
}

impl OdeScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
}

/// Integration method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dormand-Prince 5(4) with embedded error control.
    AdaptiveRk,
    /// Classical fixed-step RK4 (step = the stability-bounded max step).
    FixedRk4,
}

/// Integrator settings shared by all three dynamics.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on the step size; `None` derives it from the stability bound.
    pub max_step: Option<f64>,
    /// Observable sampling interval for trajectory records; `None` disables.
    pub record_every: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk,
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            record_every: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Domain(format!(
                "tolerances must be positive: rtol = {}, atol = {}",
                self.rtol, self.atol
            )));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::Domain(format!("max_step must be positive, got {h}")));
            }
        }
        if let Some(r) = self.record_every {
            if !(r > 0.0) {
                return Err(Error::Domain(format!("record_every must be positive, got {r}")));
            }
        }
        Ok(())
    }

    /// Effective step cap given the stability-derived bound.
    pub fn step_cap(&self, stability_step: f64) -> f64 {
        self.max_step.unwrap_or(stability_step).min(stability_step)
    }
}

/// Counters from one integration run.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights are row A[5]; error weights b5 - b4.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` in place.
///
/// `stability_step` caps the step size (explicit-method stability);
/// `after_step` runs after every accepted step and may mutate the state
/// (renormalization, clipping) or record observables. It returns `true`
/// when it modified the state, which invalidates the FSAL stage.
pub fn integrate<T, F, G>(
    cfg: &IntegratorConfig,
    t0: f64,
    t1: f64,
    stability_step: f64,
    y: &mut Vec<T>,
    mut rhs: F,
    mut after_step: G,
) -> Result<IntegrationStats>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
    G: FnMut(f64, &mut [T]) -> Result<bool>,
{
    cfg.validate()?;
    let span = t1 - t0;
    if !(span > 0.0) {
        return Err(Error::Domain(format!("integration span must be positive, got {span}")));
    }
    let cap = cfg.step_cap(stability_step).min(span);
    match cfg.method {
        Method::AdaptiveRk => adaptive_dp5(cfg, t0, t1, cap, y, &mut rhs, &mut after_step),
        Method::FixedRk4 => fixed_rk4(t0, t1, cap, y, &mut rhs, &mut after_step),
    }
}

fn adaptive_dp5<T, F, G>(
    cfg: &IntegratorConfig,
    t0: f64,
    t1: f64,
    cap: f64,
    y: &mut Vec<T>,
    rhs: &mut F,
    after_step: &mut G,
) -> Result<IntegrationStats>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
    G: FnMut(f64, &mut [T]) -> Result<bool>,
{
    let n = y.len();
    let mut stats = IntegrationStats::default();
    let mut k: Vec<Vec<T>> = (0..7).map(|_| vec![T::zero(); n]).collect();
    let mut y_stage = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];

    let mut t = t0;
    let mut h = cap;
    let h_floor = 1e-14 * (t1 - t0).max(t1.abs()).max(1.0);

    rhs(t, y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut fsal_valid = true;

    while t < t1 {
        h = h.min(t1 - t);
        if h < h_floor {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if !fsal_valid {
            rhs(t, y, &mut k[0]);
            stats.rhs_evals += 1;
            fsal_valid = true;
        }
        // Stages 2..7 (k[6] is the FSAL stage at t + h).
        for s in 0..6 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc = acc.add(kj[i].scale(a));
                    }
                }
                y_stage[i] = y[i].add(acc.scale(h));
            }
            rhs(t + C[s] * h, &y_stage, &mut k[s + 1]);
            stats.rhs_evals += 1;
        }
        // 5th-order solution is the last stage argument (A row 5 = b).
        y_new.copy_from_slice(&y_stage);

        // Weighted RMS error of the embedded difference.
        let mut err_acc = 0.0;
        for i in 0..n {
            let mut e = T::zero();
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e = e.add(kj[i].scale(E[j]));
                }
            }
            let e2 = e.abs2() * h * h;
            let scale = cfg.atol + cfg.rtol * y[i].abs2().max(y_new[i].abs2()).sqrt();
            err_acc += e2 / (scale * scale);
        }
        let err = (err_acc / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            std::mem::swap(y, &mut y_new);
            k.swap(0, 6); // FSAL
            let modified = after_step(t, y)?;
            stats.accepted += 1;
            fsal_valid = !modified;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * grow).min(cap);
        } else {
            stats.rejected += 1;
            let shrink = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= shrink;
        }
    }
    Ok(stats)
}

fn fixed_rk4<T, F, G>(
    t0: f64,
    t1: f64,
    dt: f64,
    y: &mut Vec<T>,
    rhs: &mut F,
    after_step: &mut G,
) -> Result<IntegrationStats>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
    G: FnMut(f64, &mut [T]) -> Result<bool>,
{
    let n = y.len();
    let span = t1 - t0;
    let steps = (span / dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut stats = IntegrationStats::default();
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        rhs(t, y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i].add(k1[i].scale(0.5 * h));
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i].add(k2[i].scale(0.5 * h));
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i].add(k3[i].scale(h));
        }
        rhs(t + h, &tmp, &mut k4);
        for i in 0..n {
            let incr = k1[i]
                .add(k2[i].scale(2.0))
                .add(k3[i].scale(2.0))
                .add(k4[i]);
            y[i] = y[i].add(incr.scale(h / 6.0));
        }
        stats.rhs_evals += 4;
        stats.accepted += 1;
        after_step(t + h, y)?;
    }
    Ok(stats)
}
