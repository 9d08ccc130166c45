//! Model definition: the fully-connected p-spin ferromagnet and its
//! free-energy landscape.
//!
//! The classical energy of a configuration with magnetization per spin `m` is
//! `E(m) = -(J N / 2) m^p`. On `N` spins, `m` lives on the grid
//! `m_k = -1 + 2k/N`, `k = 0..=N`, and every operator in this crate is indexed
//! by the sector index `k`, never by the floating-point magnetization, so the
//! grid cannot drift.

use crate::error::{Error, Result};

/// Slack accepted on domain checks of magnetization arguments.
const M_DOMAIN_SLACK: f64 = 1e-12;

/// The triple (p, J, N) defining the ferromagnet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: u32,
    j: f64,
    n: usize,
}

impl ModelParams {
    /// Build model parameters, enforcing `p >= 2`, `N >= 1`, `J > 0`.
    pub fn new(p: u32, j: f64, n: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("p must be >= 2, got {p}")));
        }
        if n < 1 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::Domain(format!("J must be positive and finite, got {j}")));
        }
        Ok(Self { p, j, n })
    }

    /// Standard parameters with `J = 1`.
    pub fn with_unit_coupling(p: u32, n: usize) -> Result<Self> {
        Self::new(p, 1.0, n)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coupling(&self) -> f64 {
        self.j
    }

    pub fn spins(&self) -> usize {
        self.n
    }

    /// Number of magnetization sectors, `N + 1`.
    pub fn sectors(&self) -> usize {
        self.n + 1
    }

    /// Grid point `m_k = -1 + 2k/N`, computed as `(2k - N)/N` so that
    /// `m_{N-k}` is the exact negation of `m_k` (and the endpoints are
    /// exactly +-1). This keeps even-p operators bit-exactly symmetric
    /// under the reflection `k -> N - k`.
    pub fn magnetization(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n);
        (2.0 * k as f64 - self.n as f64) / self.n as f64
    }

    /// Classical sector energy `E(m_k) = -(J N / 2) m_k^p`.
    pub fn sector_energy(&self, k: usize) -> f64 {
        -0.5 * self.j * self.n as f64 * self.magnetization(k).powi(self.p as i32)
    }

    /// Ground-state energy `E_0 = -N J / 2` (attained at `m = 1`; for even p
    /// also at `m = -1`).
    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.j * self.n as f64
    }

    /// Whether the energy is even under `m -> -m`.
    pub fn is_even(&self) -> bool {
        self.p % 2 == 0
    }
}

/// Classical energy `E(m) = -(J N / 2) m^p` at arbitrary magnetization.
pub fn classical_energy(m: f64, params: &ModelParams) -> Result<f64> {
    if m.abs() > 1.0 + M_DOMAIN_SLACK {
        return Err(Error::Domain(format!("|m| = {} exceeds 1", m.abs())));
    }
    Ok(-0.5 * params.coupling() * params.spins() as f64 * m.powi(params.p() as i32))
}

/// Kinetic square-root coefficients `K^(+-) = sqrt(1 - m^2 + 2(1 -+ m)/N)`
/// of the sector-raising and -lowering couplings.
///
/// `K^+` vanishes exactly at `m = 1` and `K^-` at `m = -1`: the grid has no
/// sectors beyond the endpoints.
pub fn kinetic_coefficients(m: f64, n: usize) -> Result<(f64, f64)> {
    let arg_plus = 1.0 - m * m + 2.0 * (1.0 - m) / n as f64;
    let arg_minus = 1.0 - m * m + 2.0 * (1.0 + m) / n as f64;
    for arg in [arg_plus, arg_minus] {
        if arg < -1e-9 {
            return Err(Error::Domain(format!(
                "kinetic coefficient argument {arg:.3e} < 0: m = {m} is off the grid"
            )));
        }
    }
    Ok((arg_plus.max(0.0).sqrt(), arg_minus.max(0.0).sqrt()))
}

/// Entropy per spin of the magnetization macrostate,
/// `s(m) = ln 2 - (1-m)/2 ln(1-m) - (1+m)/2 ln(1+m)`.
pub fn entropy_density(m: f64) -> Result<f64> {
    if m.abs() > 1.0 + M_DOMAIN_SLACK {
        return Err(Error::Domain(format!("|m| = {} exceeds 1", m.abs())));
    }
    let xlogx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    Ok(std::f64::consts::LN_2 - 0.5 * xlogx(1.0 - m) - 0.5 * xlogx(1.0 + m))
}

/// Free energy per spin `f(m, T) = -(J/2) m^p - T s(m)`.
pub fn free_energy_density(m: f64, t: f64, params: &ModelParams) -> Result<f64> {
    let s = entropy_density(m)?;
    Ok(-0.5 * params.coupling() * m.powi(params.p() as i32) - t * s)
}

/// d f / d m = -(J p / 2) m^(p-1) + T atanh(m).
fn free_energy_slope(m: f64, t: f64, params: &ModelParams) -> f64 {
    -0.5 * params.coupling() * params.p() as f64 * m.powi(params.p() as i32 - 1)
        + t * m.atanh()
}

/// Locate the two positive stationary points of a slope function with the
/// sign pattern + - + on (0, 1): the barrier top and the ordered minimum.
/// Returns `None` when the slope never turns negative (single minimum).
/// When the slope stays negative all the way to the upper grid edge, the
/// ordered minimum has merged with `m = 1` beyond float resolution (the
/// low-temperature regime) and 1.0 is returned for it.
fn two_roots(slope: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    // Log-spaced scan so barriers at m ~ 1e-6 are still bracketed.
    const POINTS: usize = 1600;
    let lo = 1e-9_f64;
    let hi = 1.0 - 1e-12_f64;
    let grid = |i: usize| lo * (hi / lo).powf(i as f64 / (POINTS - 1) as f64);

    let bisect = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (slope(mid) > 0.0) == (slope(a) > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-15 * b.max(1.0) {
                break;
            }
        }
        0.5 * (a + b)
    };

    let mut barrier = None;
    let mut prev = grid(0);
    let mut prev_sign = slope(prev) > 0.0;
    for i in 1..POINTS {
        let x = grid(i);
        let sign = slope(x) > 0.0;
        if sign != prev_sign {
            if prev_sign {
                barrier = Some(bisect(prev, x));
            } else if let Some(b) = barrier {
                return Some((b, bisect(prev, x)));
            }
            prev_sign = sign;
        }
        prev = x;
    }
    barrier.map(|b| (b, 1.0))
}

/// Stationary points of `f(m, T)` on (0, 1): `(m_barrier, m_ordered)`.
/// `None` when the paramagnetic minimum is the only one.
pub(crate) fn free_energy_stationary_points(
    params: &ModelParams,
    t: f64,
) -> Option<(f64, f64)> {
    two_roots(|m| free_energy_slope(m, t, params))
}

/// Classical critical temperature of the p-spin ferromagnet.
///
/// For `p = 2` the transition is continuous and `T_c = J` (the curvature of
/// `f` at `m = 0` changes sign there). For `p >= 3` the transition is first
/// order; `T_c` is found by bisecting on the temperature at which the
/// paramagnetic and ferromagnetic minima of `f(m, T)` are degenerate.
pub fn critical_temperature(params: &ModelParams) -> Result<f64> {
    if params.p() == 2 {
        return Ok(params.coupling());
    }
    let depth_gap = |t: f64| -> f64 {
        match free_energy_stationary_points(params, t) {
            // Ordered minimum missing entirely: paramagnet wins.
            None => 1.0,
            Some((_, m_min)) => {
                let f_min = free_energy_density(m_min, t, params).expect("m in domain");
                let f_para = free_energy_density(0.0, t, params).expect("m in domain");
                f_min - f_para
            }
        }
    };
    let j = params.coupling();
    let (mut lo, mut hi) = (0.01 * j, j);
    if depth_gap(lo) >= 0.0 || depth_gap(hi) <= 0.0 {
        return Err(Error::Convergence(format!(
            "critical temperature not bracketed in [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if depth_gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Convergence(
        "critical temperature bisection did not reach 1e-10 in 200 iterations".into(),
    ))
}

/// Estimate of the quantum critical transverse field from the product-state
/// variational energy `e(m, Gamma) = -(J/2) m^p - Gamma sqrt(1 - m^2)`
/// (exact for this mean-field model as N -> infinity).
///
/// `p = 2` gives `Gamma_c = J`; for `p >= 3` the field at which the two
/// variational minima are degenerate is bisected. For large p the value
/// approaches `J / 2`.
pub fn critical_field_estimate(params: &ModelParams) -> Result<f64> {
    if params.p() == 2 {
        return Ok(params.coupling());
    }
    let j = params.coupling();
    let p = params.p() as f64;
    let energy = |m: f64, g: f64| -0.5 * j * m.powf(p) - g * (1.0 - m * m).sqrt();
    // d e / d m with the overall factor m removed.
    let slope = |m: f64, g: f64| g / (1.0 - m * m).sqrt() - 0.5 * j * p * m.powf(p - 2.0);
    let depth_gap = |g: f64| -> f64 {
        match two_roots(|m| slope(m, g)) {
            None => 1.0,
            Some((_, m_min)) => energy(m_min, g) - energy(0.0, g),
        }
    };
    let (mut lo, mut hi) = (0.4 * j, j);
    if depth_gap(lo) >= 0.0 || depth_gap(hi) <= 0.0 {
        return Err(Error::Convergence(format!(
            "critical field not bracketed in [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if depth_gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
