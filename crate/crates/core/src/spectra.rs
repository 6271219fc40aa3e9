//! Lorentzian reservoirs centred on their system mode.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Optical cavity.
    A,
    /// Microwave resonator.
    C,
}

/// `J(w) = gamma lambda^2 / ((w - w_o)^2 + lambda^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianBath {
    pub gamma: f64,
    pub lambda: f64,
    pub n_bar: f64,
    pub mode: Mode,
}

impl LorentzianBath {
    pub fn new(mode: Mode, gamma: f64, lambda: f64, n_bar: f64) -> Result<Self> {
        let bath = Self {
            gamma,
            lambda,
            n_bar,
            mode,
        };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        let (g, l, n) = match self.mode {
            Mode::A => ("gamma_a", "lambda_a", "nbar_a"),
            Mode::C => ("gamma_c", "lambda_c", "nbar_c"),
        };
        ensure(self.gamma.is_finite() && self.gamma > 0.0, g, || {
            format!("must be > 0, got {}", self.gamma)
        })?;
        ensure(self.lambda.is_finite() && self.lambda > 0.0, l, || {
            format!("must be > 0, got {}", self.lambda)
        })?;
        ensure(self.n_bar.is_finite() && self.n_bar >= 0.0, n, || {
            format!("must be >= 0, got {}", self.n_bar)
        })
    }

    pub fn spectral_density(&self, detuning: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        self.gamma * l2 / (detuning * detuning + l2)
    }

    /// Rotating-frame correlation `f(t) = pi gamma lambda e^{-lambda t}`.
    pub fn memory_kernel(&self, t: f64) -> f64 {
        self.kernel_weight() * (-self.lambda * t.abs()).exp()
    }

    /// Prefactor `pi gamma lambda` of the exponential kernel.
    pub fn kernel_weight(&self) -> f64 {
        PI * self.gamma * self.lambda
    }

    /// Weisskopf-Wigner decay rate `pi J(w_o) = pi gamma`.
    pub fn markovian_rate(&self) -> f64 {
        markovian_rate(self.gamma)
    }
}

pub fn markovian_rate(gamma: f64) -> f64 {
    PI * gamma
}

/// Bose occupation `1 / (e^{hbar w / k_B T} - 1)`.
pub fn thermal_occupation(freq_over_temp: f64) -> Result<f64> {
    if freq_over_temp.is_nan() || freq_over_temp <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "freq_over_temp",
            reason: format!("Bose factor undefined for {freq_over_temp}"),
        });
    }
    Ok(1.0 / freq_over_temp.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bath() -> LorentzianBath {
        LorentzianBath::new(Mode::A, 1e-3, 1e-2, 0.0).unwrap()
    }

    #[test]
    fn spectral_density_shape() {
        let b = bath();
        assert_eq!(b.spectral_density(0.0), 1e-3);
        assert_relative_eq!(b.spectral_density(1e-2), 5e-4, max_relative = 1e-14);
        assert_relative_eq!(b.spectral_density(-1e-2), 5e-4, max_relative = 1e-14);
        assert_relative_eq!(b.spectral_density(3e-2), 1e-4, max_relative = 1e-14);
    }

    #[test]
    fn kernel_values() {
        let b = bath();
        assert_relative_eq!(b.memory_kernel(0.0), PI * 1e-5, max_relative = 1e-15);
        assert_relative_eq!(b.memory_kernel(100.0), 1.1557e-5, max_relative = 1e-4);
        assert!(b.memory_kernel(1e5) < 1e-300);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let f = b.memory_kernel(i as f64 * 5.0);
            assert!(f > 0.0 && f < prev);
            prev = f;
        }
    }

    #[test]
    fn rates() {
        assert_relative_eq!(markovian_rate(1e-3), 3.14159e-3, max_relative = 1e-5);
        assert_eq!(markovian_rate(0.0), 0.0);
        assert_relative_eq!(markovian_rate(1.5e-3), 4.71239e-3, max_relative = 1e-5);
    }

    #[test]
    fn bose_factor() {
        assert_eq!(thermal_occupation(f64::INFINITY).unwrap(), 0.0);
        assert_relative_eq!(
            thermal_occupation(2f64.ln()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            thermal_occupation(1.0).unwrap(),
            0.581977,
            max_relative = 1e-6
        );
        assert!(thermal_occupation(0.0).is_err());
        assert!(thermal_occupation(-1.0).is_err());
    }

    #[test]
    fn bath_validation() {
        assert!(LorentzianBath::new(Mode::C, 0.0, 1.0, 0.0).is_err());
        assert!(LorentzianBath::new(Mode::C, 1.0, 0.0, 0.0).is_err());
        assert!(LorentzianBath::new(Mode::C, 1.0, 1.0, -0.1).is_err());
    }
}
