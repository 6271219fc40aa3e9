//! Uniform time grids and the piecewise-constant drive schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `t_n = n * dt`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "t_max must be non-negative, got {t_max}"
            )));
        }
        let ratio = t_max / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "t_max = {t_max} is not an integer multiple of dt = {dt}"
            )));
        }
        Ok(Self {
            dt,
            steps: steps as usize,
        })
    }

    pub fn from_steps(dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt * steps as f64, dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|n| self.time(n))
    }

    /// Index of `t` on the grid, or an error when `t` falls between nodes.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let n = x.round();
        if n < 0.0 || n as usize > self.steps || (x - n).abs() > 1e-6 {
            return Err(Error::OffGrid { t, dt: self.dt });
        }
        Ok(n as usize)
    }

    /// The same window sampled with half the step.
    pub fn halved(&self) -> Self {
        Self {
            dt: self.dt / 2.0,
            steps: self.steps * 2,
        }
    }
}

/// Effective coupling switched from `g_eff` to zero at `tau_off`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub g_eff: f64,
    pub tau_off: Option<f64>,
}

impl DriveSchedule {
    pub fn constant(g_eff: f64) -> Self {
        Self {
            g_eff,
            tau_off: None,
        }
    }

    pub fn switched_off(g_eff: f64, tau_off: f64) -> Self {
        Self {
            g_eff,
            tau_off: Some(tau_off),
        }
    }

    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        if let Some(tau) = self.tau_off {
            if !(tau.is_finite() && tau >= 0.0 && tau <= grid.t_max()) {
                return Err(Error::InvalidParameter {
                    name: "tau_off",
                    reason: format!(
                        "{tau} lies outside the simulation window [0, {}]",
                        grid.t_max()
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn coupling_at(&self, t: f64) -> f64 {
        match self.tau_off {
            Some(tau) if t >= tau => 0.0,
            _ => self.g_eff,
        }
    }

    /// Pieces of `[t0, t0 + dt]` over which the coupling is constant.
    pub(crate) fn pieces(&self, t0: f64, dt: f64) -> Pieces {
        let t1 = t0 + dt;
        match self.tau_off {
            Some(tau) if tau > t0 + 1e-9 * dt && tau < t1 - 1e-9 * dt => Pieces {
                first: (tau - t0, self.g_eff),
                second: Some((t1 - tau, 0.0)),
            },
            _ => Pieces {
                first: (dt, self.coupling_at(t0 + 0.5 * dt)),
                second: None,
            },
        }
    }
}

pub(crate) struct Pieces {
    pub first: (f64, f64),
    pub second: Option<(f64, f64)>,
}

impl Pieces {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> {
        std::iter::once(self.first).chain(self.second)
    }
}
