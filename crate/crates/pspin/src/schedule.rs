//! Linear annealing schedules for the transverse field and the temperature.

use crate::error::{Error, Result};

/// Which control parameter the schedule drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    /// Transverse field Gamma(t) (quantum annealing).
    TransverseField,
    /// Temperature T(t) (simulated annealing).
    Temperature,
}

/// Linear ramp `value(t) = start (1 - t/tau) + end (t/tau)` over `t in [0, tau]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule {
    driver: Driver,
    start: f64,
    end: f64,
    total_time: f64,
}

impl AnnealingSchedule {
    pub fn new(driver: Driver, start: f64, end: f64, total_time: f64) -> Result<Self> {
        if !(start >= 0.0 && start.is_finite()) || !(end >= 0.0 && end.is_finite()) {
            return Err(Error::Domain(format!(
                "schedule endpoints must be finite and >= 0, got {start}, {end}"
            )));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::Domain(format!("total time must be > 0, got {total_time}")));
        }
        Ok(Self { driver, start, end, total_time })
    }

    /// Field ramp Gamma_i -> Gamma_f.
    pub fn transverse_field(gamma_i: f64, gamma_f: f64, tau: f64) -> Result<Self> {
        Self::new(Driver::TransverseField, gamma_i, gamma_f, tau)
    }

    /// Temperature ramp T_i -> T_f.
    pub fn temperature(t_i: f64, t_f: f64, tau: f64) -> Result<Self> {
        Self::new(Driver::Temperature, t_i, t_f, tau)
    }

    pub fn driver(&self) -> Driver {
        self.driver
    }

    pub fn start_value(&self) -> f64 {
        self.start
    }

    pub fn end_value(&self) -> f64 {
        self.end
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// Control value at time `t`. Exact at both endpoints.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.start;
        }
        if t >= self.total_time {
            return self.end;
        }
        let x = t / self.total_time;
        self.start * (1.0 - x) + self.end * x
    }
}
