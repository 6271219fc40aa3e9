//! Quadrature variances, optimal squeezing and squeezing levels.

mod sweep;

pub use sweep::{
    default_gamma_grid, default_lambda_grid, default_tau_grid, linspace, sweep_generation,
    sweep_persistence, BathConfig, Environment, GenerationAxis, PersistencePoint, SweepBase,
    SweepOutcome, SweepPoint,
};

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use nalgebra::Matrix4;

use crate::covariance::{Cm4, Cm6, CovarianceTrajectory};
use crate::error::{Error, Result};

/// Relative tolerance for the `V22 = V11`, `V33 = V44`, `V23 = V14` pattern.
pub const STRUCTURE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureFrame {
    pub alpha: f64,
    pub phi: f64,
    pub mix_angle: f64,
}

impl QuadratureFrame {
    pub fn new(alpha: f64, phi: f64, mix_angle: f64) -> Result<Self> {
        if !(mix_angle > -FRAC_PI_2 && mix_angle <= FRAC_PI_2) {
            return Err(Error::InvalidParameter {
                name: "mix_angle",
                reason: format!("{mix_angle} lies outside (-pi/2, pi/2]"),
            });
        }
        Ok(Self {
            alpha,
            phi,
            mix_angle,
        })
    }
}

/// Angle minimizing the Markovian variance: `tan 2 phi = 2 g_eff / (kappa_a - kappa_c)`.
pub fn optimal_angle(g_eff: f64, kappa_a: f64, kappa_c: f64) -> Result<f64> {
    if g_eff == 0.0 && kappa_a == kappa_c {
        return Err(Error::UndefinedAngle);
    }
    Ok(0.5 * (2.0 * g_eff).atan2(kappa_a - kappa_c))
}

/// Variances of `X = cos(phi) X_a + sin(phi) Y_c` and its orthogonal partner.
pub fn variance_xy(v: &Cm4, mix_angle: f64) -> (f64, f64) {
    let m = &v.entries;
    let (s, c) = mix_angle.sin_cos();
    let cross = (2.0 * mix_angle).sin() * m[(0, 3)];
    let dx = c * c * m[(0, 0)] + s * s * m[(3, 3)] + cross;
    let dy = s * s * m[(0, 0)] + c * c * m[(3, 3)] - cross;
    (dx, dy)
}

/// Eigen-variances of the `(X_a, Y_c)` block and the angle that attains the
/// smaller one.
pub fn optimal_variances(v: &Cm4) -> Result<(f64, f64, f64)> {
    let m = &v.entries;
    let scale = m.abs().max().max(1.0);
    let deviation = [
        (m[(1, 1)] - m[(0, 0)]).abs(),
        (m[(2, 2)] - m[(3, 3)]).abs(),
        (m[(1, 2)] - m[(0, 3)]).abs(),
        m[(0, 1)].abs(),
        m[(0, 2)].abs(),
        m[(1, 3)].abs(),
        m[(2, 3)].abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / scale;
    if deviation > STRUCTURE_TOLERANCE {
        return Err(Error::BrokenStructure { deviation });
    }
    Ok(block_eigen(m[(0, 0)], m[(3, 3)], m[(0, 3)]))
}

/// Eigenvalues of `[[a, b], [b, d]]` and the angle of the smaller one.
fn block_eigen(a: f64, d: f64, b: f64) -> (f64, f64, f64) {
    let root = ((a - d).powi(2) + 4.0 * b * b).sqrt();
    let low = 0.5 * (a + d - root);
    let high = 0.5 * (a + d + root);
    let mut angle = 0.5 * (2.0 * b).atan2(a - d) + FRAC_PI_2;
    if angle > FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    }
    (low, high, angle)
}

/// Optical and microwave block `(X_a, Y_a, X_c, Y_c)` of a three-mode CM.
pub fn reduce_full(v: &Cm6) -> Cm4 {
    const KEEP: [usize; 4] = [0, 1, 4, 5];
    Cm4::new(v.t, Matrix4::from_fn(|i, j| v.entries[(KEEP[i], KEEP[j])]))
}

/// `S = -10 log10(dX / 0.5)` in dB.
pub fn squeezing_level(dx: f64) -> Result<f64> {
    if !(dx > 0.0) {
        return Err(Error::NonPositiveVariance(dx));
    }
    Ok(-10.0 * (dx / 0.5).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRecord {
    pub t: f64,
    pub dx: f64,
    pub dy: f64,
    pub dx_opt: f64,
    pub dy_opt: f64,
    pub s_db: f64,
    pub s_opt_db: f64,
    pub phi_opt: f64,
}

impl SqueezingRecord {
    pub fn from_cm(v: &Cm4, mix_angle: f64) -> Result<Self> {
        let (dx, dy) = variance_xy(v, mix_angle);
        let (dx_opt, dy_opt, phi_opt) = optimal_variances(v)?;
        Ok(Self {
            t: v.t,
            dx,
            dy,
            dx_opt,
            dy_opt,
            s_db: squeezing_level(dx)?,
            s_opt_db: squeezing_level(dx_opt)?,
            phi_opt,
        })
    }
}

impl SqueezingRecord {
    /// Like [`SqueezingRecord::from_cm`] but only uses the `(X_a, Y_c)` block,
    /// so it applies to reduced three-mode states without the two-mode symmetry.
    pub fn from_block(v: &Cm4, mix_angle: f64) -> Result<Self> {
        let m = &v.entries;
        let (dx, dy) = variance_xy(v, mix_angle);
        let (dx_opt, dy_opt, phi_opt) = block_eigen(m[(0, 0)], m[(3, 3)], m[(0, 3)]);
        Ok(Self {
            t: v.t,
            dx,
            dy,
            dx_opt,
            dy_opt,
            s_db: squeezing_level(dx)?,
            s_opt_db: squeezing_level(dx_opt)?,
            phi_opt,
        })
    }
}

pub fn squeezing_records(
    traj: &CovarianceTrajectory<4>,
    mix_angle: f64,
) -> Result<Vec<SqueezingRecord>> {
    traj.iter()
        .map(|cm| SqueezingRecord::from_cm(cm, mix_angle))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn structured(a: f64, d: f64, b: f64) -> Cm4 {
        Cm4::new(
            0.0,
            Matrix4::new(
                a, 0.0, 0.0, b, 0.0, a, b, 0.0, 0.0, b, d, 0.0, b, 0.0, 0.0, d,
            ),
        )
    }

    #[test]
    fn angle_examples() {
        assert!((optimal_angle(0.01, 0.003, 0.003).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(optimal_angle(1e-12, 0.004, 0.003).unwrap().abs() < 1e-8);
        let phi = optimal_angle(0.010608, PI * 1e-3, PI * 1.5e-3).unwrap();
        assert!((phi - 0.8223).abs() < 1e-4, "{phi}");
        assert_eq!(optimal_angle(0.0, 0.002, 0.002), Err(Error::UndefinedAngle));
        assert!(QuadratureFrame::new(0.0, 0.0, phi).is_ok());
        assert!(QuadratureFrame::new(0.0, 0.0, -FRAC_PI_2).is_err());
    }

    #[test]
    fn variance_examples() {
        let vac = Cm4::vacuum();
        assert_eq!(variance_xy(&vac, 0.7), (0.5, 0.5));
        let v = structured(1.3, 0.9, -0.4);
        assert_eq!(variance_xy(&v, 0.0), (1.3, 0.9));
        assert_eq!(optimal_variances(&vac).unwrap().0, 0.5);
        let (lo, hi, _) = optimal_variances(&structured(2.0, 2.0, -0.7)).unwrap();
        assert!((lo - 1.3).abs() < 1e-14 && (hi - 2.7).abs() < 1e-14);
    }

    #[test]
    fn broken_structure_is_rejected() {
        let mut v = structured(1.0, 1.0, 0.2);
        v.entries[(1, 1)] = 1.1;
        assert!(matches!(
            optimal_variances(&v),
            Err(Error::BrokenStructure { .. })
        ));
    }

    #[test]
    fn level_examples() {
        assert_eq!(squeezing_level(0.5).unwrap(), 0.0);
        assert!((squeezing_level(0.25).unwrap() - 3.0103).abs() < 1e-4);
        assert!((squeezing_level(0.13688).unwrap() - 5.626).abs() < 1e-3);
        assert!(squeezing_level(0.0).is_err());
        assert!(squeezing_level(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn eigen_variance_beats_angle_scan(a in 0.5..5.0f64, d in 0.5..5.0f64, frac in -0.99..0.99f64) {
            let b = frac * ((a - 0.25) * (d - 0.25)).sqrt();
            let v = structured(a, d, b);
            let (lo, hi, angle) = optimal_variances(&v).unwrap();
            let scan = (0..360)
                .map(|k| variance_xy(&v, -FRAC_PI_2 + PI * k as f64 / 360.0).0)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(lo <= scan + 1e-9);
            prop_assert!((variance_xy(&v, angle).0 - lo).abs() < 1e-9 * a.max(d));
            prop_assert!(angle > -FRAC_PI_2 && angle <= FRAC_PI_2);
            prop_assert!((lo + hi - a - d).abs() < 1e-10 * (a + d));
        }

        #[test]
        fn rotation_preserves_trace(a in 0.5..5.0f64, d in 0.5..5.0f64, b in -1.0..1.0f64, phi in -1.5..1.5f64) {
            let (dx, dy) = variance_xy(&structured(a, d, b), phi);
            prop_assert!((dx + dy - a - d).abs() < 1e-10);
        }

        #[test]
        fn level_strictly_decreasing(x in 1e-3..10.0f64, dx in 1e-6..1.0f64) {
            prop_assert!(squeezing_level(x).unwrap() > squeezing_level(x + dx).unwrap());
        }
    }
}
