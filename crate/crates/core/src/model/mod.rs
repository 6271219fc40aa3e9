//! System parameters and the mechanically mediated two-mode squeezing model.
//!
//! All rates, detunings and couplings are expressed in units of the
//! effective mechanical frequency, so `TILDE_OMEGA_B == 1`.

mod splitting;

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

pub use splitting::{eigen_splitting, relevant_branches, scan_grid, CVector6, SplittingScan};

/// Effective mechanical frequency; the unit of every rate in the crate.
pub const TILDE_OMEGA_B: f64 = 1.0;

/// Default ratio for the large-detuning criterion of [`validity_check`].
pub const DEFAULT_DETUNING_RATIO: f64 = 10.0;

pub type Matrix6 = SMatrix<f64, 6, 6>;

/// Linearized-system inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Enhanced electromechanical (microwave) coupling.
    pub g: f64,
    /// Enhanced optomechanical coupling.
    #[serde(rename = "G")]
    pub big_g: f64,
    /// Mechanical parametric amplification parameter.
    pub r: f64,
    /// Microwave detuning.
    pub delta_c: f64,
    /// Optical detuning; `None` selects the resonance `-delta_c + delta`.
    pub delta_a: Option<f64>,
    /// Optical drive phase.
    pub alpha: f64,
    /// Microwave drive phase.
    pub phi: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 0.15,
            big_g: 0.15,
            r: 0.2,
            delta_c: 3.5,
            delta_a: None,
            alpha: 0.0,
            phi: 0.0,
        }
    }
}

impl SystemParams {
    pub fn new(g: f64, big_g: f64, r: f64, delta_c: f64) -> Self {
        Self {
            g,
            big_g,
            r,
            delta_c,
            ..Self::default()
        }
    }

    pub fn with_delta_a(mut self, delta_a: f64) -> Self {
        self.delta_a = Some(delta_a);
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.g.is_finite() && self.g >= 0.0, "g", || {
            format!("must be >= 0, got {}", self.g)
        })?;
        ensure(self.big_g.is_finite() && self.big_g >= 0.0, "G", || {
            format!("must be >= 0, got {}", self.big_g)
        })?;
        ensure(self.r.is_finite() && self.r >= 0.0, "r", || {
            format!("must be >= 0, got {}", self.r)
        })?;
        ensure(
            self.delta_c.is_finite() && self.delta_c > TILDE_OMEGA_B,
            "delta_c",
            || {
                format!(
                    "must exceed the mechanical frequency {TILDE_OMEGA_B}, got {}",
                    self.delta_c
                )
            },
        )?;
        if let Some(da) = self.delta_a {
            ensure(da.is_finite(), "delta_a", || {
                format!("must be finite, got {da}")
            })?;
        }
        ensure(self.alpha.is_finite(), "alpha", || "must be finite".into())?;
        ensure(self.phi.is_finite(), "phi", || "must be finite".into())?;
        Ok(())
    }

    /// Total drive phase `alpha + phi`.
    pub fn theta(&self) -> f64 {
        self.alpha + self.phi
    }

    /// Optical detuning, resolved against the energy shift when unset.
    pub fn resolved_delta_a(&self) -> Result<f64> {
        match self.delta_a {
            Some(da) => Ok(da),
            None => Ok(-self.delta_c + energy_shift(self)?),
        }
    }
}

fn detuning_denominator(params: &SystemParams) -> Result<f64> {
    let den = params.delta_c * params.delta_c - TILDE_OMEGA_B * TILDE_OMEGA_B;
    let scale = (params.delta_c * params.delta_c).max(TILDE_OMEGA_B * TILDE_OMEGA_B);
    if !den.is_finite() || den.abs() <= 1e-12 * scale {
        return Err(Error::DegenerateDetuning { denominator: den });
    }
    Ok(den)
}

/// Mechanically mediated squeezing rate `2 w g G e^{2r} / (delta_c^2 - w^2)`.
pub fn effective_coupling(params: &SystemParams) -> Result<f64> {
    let den = detuning_denominator(params)?;
    Ok(2.0 * TILDE_OMEGA_B * params.g * params.big_g * (2.0 * params.r).exp() / den)
}

/// Second-order energy shift `delta = Delta_a + Delta_c` that restores resonance.
/// Negative whenever `delta_c > w`.
pub fn energy_shift(params: &SystemParams) -> Result<f64> {
    let den = detuning_denominator(params)?;
    let sum_sq = params.big_g * params.big_g + params.g * params.g;
    Ok(-2.0 * sum_sq * (2.0 * params.r).exp() * TILDE_OMEGA_B / den)
}

/// Squeeze parameter and effective frequency of the MPA frame.
pub fn mpa_frame(delta_b: f64, omega_b: f64) -> Result<(f64, f64)> {
    ensure(delta_b.is_finite() && delta_b > 0.0, "Delta_b", || {
        format!("must be positive, got {delta_b}")
    })?;
    let ratio = 2.0 * omega_b / delta_b;
    if !(ratio.abs() < 1.0) {
        return Err(Error::UnstableParametricDrive { ratio });
    }
    let r = 0.5 * ratio.atanh();
    Ok((r, delta_b / (2.0 * r).cosh()))
}

/// Outcome of one validity criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub pass: bool,
    /// Signed distance to the threshold; positive when satisfied.
    pub margin: f64,
}

impl Criterion {
    fn at_least(value: f64, bound: f64) -> Self {
        Self {
            pass: value >= bound,
            margin: value - bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// `0.1 <= g, G <= 0.3`.
    pub coupling_range: Criterion,
    /// `r <= 0.2`.
    pub mpa_range: Criterion,
    /// Large-detuning ratio against its threshold.
    pub large_detuning: Criterion,
    /// `min(|w - Delta_a|, |w - Delta_c|) / max(g e^r, G e^r)`.
    pub detuning_ratio: f64,
}

impl Validity {
    pub fn all_pass(&self) -> bool {
        self.coupling_range.pass && self.mpa_range.pass && self.large_detuning.pass
    }
}

/// Diagnostic check of the regime in which the effective model is trusted.
pub fn validity_check(params: &SystemParams, ratio_threshold: f64) -> Validity {
    let (lo, hi) = (0.1, 0.3);
    let coupling_margin = [params.g, params.big_g]
        .iter()
        .map(|&x| (x - lo).min(hi - x))
        .fold(f64::INFINITY, f64::min);
    let coupling_range = Criterion {
        pass: coupling_margin >= -1e-12,
        margin: coupling_margin,
    };
    let mpa_range = Criterion {
        pass: params.r <= 0.2 + 1e-12,
        margin: 0.2 - params.r,
    };

    let delta_a = params.resolved_delta_a().unwrap_or(-params.delta_c);
    let gap = (TILDE_OMEGA_B - delta_a)
        .abs()
        .min((TILDE_OMEGA_B - params.delta_c).abs());
    let strength = params.g.max(params.big_g) * params.r.exp();
    let detuning_ratio = if strength > 0.0 {
        gap / strength
    } else {
        f64::INFINITY
    };
    let large_detuning = Criterion::at_least(detuning_ratio, ratio_threshold);

    Validity {
        coupling_range,
        mpa_range,
        large_detuning,
        detuning_ratio,
    }
}

/// Derived effective two-mode squeezing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub g_eff: f64,
    pub delta: f64,
    pub theta: f64,
    pub validity: Validity,
}

impl EffectiveModel {
    pub fn from_params(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            g_eff: effective_coupling(params)?,
            delta: energy_shift(params)?,
            theta: params.theta(),
            validity: validity_check(params, DEFAULT_DETUNING_RATIO),
        })
    }
}

/// Real generator `M` of the quadrature flow `d/dt (X_a,Y_a,X_b,Y_b,X_c,Y_c) = M u`.
pub fn transition_matrix(params: &SystemParams, delta_a: f64) -> Matrix6 {
    let ge = 2.0 * params.big_g * params.r.exp();
    let gc = 2.0 * params.g * params.r.exp();
    let w = TILDE_OMEGA_B;
    let dc = params.delta_c;
    #[rustfmt::skip]
    let m = Matrix6::from_row_slice(&[
        0.0,      delta_a, 0.0, 0.0, 0.0, 0.0,
        -delta_a, 0.0,     -ge, 0.0, 0.0, 0.0,
        0.0,      0.0,     0.0, w,   0.0, 0.0,
        -ge,      0.0,     -w,  0.0, -gc, 0.0,
        0.0,      0.0,     0.0, 0.0, 0.0, dc,
        0.0,      0.0,     -gc, 0.0, -dc, 0.0,
    ]);
    m
}

/// Complex eigenvalues of `M`.
pub fn spectrum(m: &Matrix6) -> Result<Vec<Complex64>> {
    faer::Mat::<f64>::from_fn(6, 6, |i, j| m[(i, j)])
        .eigenvalues()
        .map_err(|e| Error::UnresolvedBranches(format!("eigenvalue iteration failed: {e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn weak_drive(g: f64) -> SystemParams {
        SystemParams::new(g, g, 0.2, 3.5)
    }

    #[test]
    fn effective_coupling_values() {
        assert_relative_eq!(
            effective_coupling(&weak_drive(0.15)).unwrap(),
            0.0059673,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            effective_coupling(&weak_drive(0.2)).unwrap(),
            0.010608,
            max_relative = 1e-4
        );
        let p = SystemParams {
            g: 0.0,
            ..weak_drive(0.15)
        };
        assert_eq!(effective_coupling(&p).unwrap(), 0.0);
    }

    #[test]
    fn energy_shift_values() {
        assert_relative_eq!(
            energy_shift(&weak_drive(0.15)).unwrap(),
            -0.011935,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            energy_shift(&weak_drive(0.2)).unwrap(),
            -0.021217,
            max_relative = 1e-4
        );
        assert_eq!(energy_shift(&weak_drive(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_detuning_is_rejected() {
        let p = SystemParams::new(0.15, 0.15, 0.2, 1.0);
        assert!(matches!(
            effective_coupling(&p),
            Err(Error::DegenerateDetuning { .. })
        ));
        assert!(matches!(
            energy_shift(&p),
            Err(Error::DegenerateDetuning { .. })
        ));
        assert!(p.validate().is_err());
    }

    #[test]
    fn mpa_frame_examples() {
        let (r, w) = mpa_frame(0.4f64.cosh(), 0.5 * 0.4f64.sinh()).unwrap();
        assert_relative_eq!(r, 0.2, epsilon = 1e-12);
        assert_relative_eq!(w, 1.0, epsilon = 1e-12);
        let (r, w) = mpa_frame(1.081072, 0.205395).unwrap();
        assert_relative_eq!(r, 0.2, epsilon = 1e-4);
        assert_relative_eq!(w, 1.0, epsilon = 1e-4);
        assert_eq!(mpa_frame(2.0, 0.0).unwrap(), (0.0, 2.0));
        assert!(matches!(
            mpa_frame(1.0, 0.6),
            Err(Error::UnstableParametricDrive { .. })
        ));
    }

    #[test]
    fn validity_examples() {
        let v = validity_check(&weak_drive(0.15), DEFAULT_DETUNING_RATIO);
        assert!(v.all_pass(), "{v:?}");
        assert!(v.detuning_ratio > 13.0);

        let v = validity_check(&weak_drive(0.5), DEFAULT_DETUNING_RATIO);
        assert!(!v.coupling_range.pass);

        let v = validity_check(
            &SystemParams::new(0.15, 0.15, 0.2, 1.3),
            DEFAULT_DETUNING_RATIO,
        );
        assert!(!v.large_detuning.pass);
        assert_relative_eq!(
            v.detuning_ratio,
            0.3 / (0.15 * 0.2f64.exp()),
            max_relative = 1e-12
        );
        assert!((v.detuning_ratio - 1.64).abs() < 5e-3);
    }

    #[test]
    fn transition_matrix_entries() {
        let p = weak_drive(0.15);
        let m = transition_matrix(&p, -3.5);
        assert_relative_eq!(m[(3, 0)], -2.0 * 0.15 * 0.2f64.exp());
        assert_eq!(m[(3, 2)], -TILDE_OMEGA_B);
        assert_eq!(m.trace(), 0.0);
    }

    #[test]
    fn uncoupled_matrix_is_block_rotation() {
        let p = weak_drive(0.0);
        let m = transition_matrix(&p, -3.4);
        for (blk, w) in [(0, -3.4), (2, 1.0), (4, 3.5)] {
            assert_eq!(m[(blk, blk + 1)], w);
            assert_eq!(m[(blk + 1, blk)], -w);
        }
        let off = m.iter().filter(|x| **x != 0.0).count();
        assert_eq!(off, 6);
    }

    proptest! {
        #[test]
        fn couplings_scale_quadratically(g in 0.01..0.4f64, big_g in 0.01..0.4f64, r in 0.0..0.4f64,
                                         dc in 1.5..6.0f64, s in 0.1..3.0f64) {
            let p = SystemParams::new(g, big_g, r, dc);
            let q = SystemParams::new(s * g, s * big_g, r, dc);
            let ge = effective_coupling(&p).unwrap();
            let de = energy_shift(&p).unwrap();
            prop_assert!((effective_coupling(&q).unwrap() - s * s * ge).abs() <= 1e-12 * ge.abs().max(1e-300));
            prop_assert!((energy_shift(&q).unwrap() - s * s * de).abs() <= 1e-12 * de.abs());
            // linear in e^{2r}
            let p0 = SystemParams { r: 0.0, ..p };
            let e2r = (2.0 * r).exp();
            prop_assert!((ge - e2r * effective_coupling(&p0).unwrap()).abs() <= 1e-12 * ge);
        }

        #[test]
        fn mpa_frame_round_trip(delta_b in 0.1..10.0f64, frac in -0.99..0.99f64) {
            let omega_b = 0.5 * frac * delta_b;
            let (r, w) = mpa_frame(delta_b, omega_b).unwrap();
            // r carries the sign of the drive here; the forward map is odd in r.
            prop_assert!(((2.0 * r).tanh() * delta_b / 2.0 - omega_b).abs() < 1e-12 * delta_b);
            prop_assert!((w * (2.0 * r).cosh() - delta_b).abs() < 1e-12 * delta_b);
        }

        #[test]
        fn spectrum_is_closed_under_negation(g in 0.0..0.3f64, big_g in 0.0..0.3f64, r in 0.0..0.2f64,
                                             dc in 1.5..5.0f64, shift in -0.2..0.2f64) {
            let p = SystemParams::new(g, big_g, r, dc);
            let eig = spectrum(&transition_matrix(&p, -dc + shift)).unwrap();
            for l in eig.iter() {
                let best = eig.iter().map(|m| (m + l).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-10, "no partner for {l}");
            }
        }
    }
}
