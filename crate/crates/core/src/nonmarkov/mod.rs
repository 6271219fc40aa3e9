//! Non-Markovian Heisenberg-Langevin dynamics of the effective two-mode model
//! with Lorentzian reservoirs.

mod greens;
mod noise;

pub use greens::{
    drift_matrix, solve_greens, solve_greens_checked, solve_greens_volterra, GreensFunction,
};
pub use noise::{noise_covariance, noise_series, NoiseCovariance};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::covariance::{Cm4, CovarianceTrajectory};
use crate::error::Result;
use crate::grid::{DriveSchedule, TimeGrid};
use crate::spectra::LorentzianBath;

/// Quadrature CM of `(a, c)` from the propagator and noise correlators.
pub fn assemble_cm(u: &Matrix2<Complex64>, noise: &NoiseCovariance, theta: f64) -> Cm4 {
    let (u11, u12, u21, u22) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let v11 = 0.5 * (u11.norm_sqr() + u12.norm_sqr() + noise.v1_v1d + noise.v1d_v1);
    let v44 = 0.5 * (u21.norm_sqr() + u22.norm_sqr() + noise.v2_v2d + noise.v2d_v2);
    let cross = u11 * u21.conj() + u22.conj() * u12 + noise.v1_v2d + noise.v2d_v1;
    let v14 = 0.5 * (Complex64::from_polar(1.0, -theta) * cross).im;
    let m = Matrix4::new(
        v11, 0.0, 0.0, v14, //
        0.0, v11, v14, 0.0, //
        0.0, v14, v44, 0.0, //
        v14, 0.0, 0.0, v44,
    );
    Cm4::new(noise.t, m)
}

/// Propagator, noise correlators and CM over the whole grid.
pub fn nmhl_run(
    theta: f64,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
    schedule: &DriveSchedule,
    grid: &TimeGrid,
) -> Result<CovarianceTrajectory<4>> {
    let u = solve_greens(schedule, theta, bath_a, bath_c, grid)?;
    Ok(trajectory(&u, bath_a, bath_c))
}

/// CM trajectory from an already solved propagator.
pub fn trajectory(
    u: &GreensFunction,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
) -> CovarianceTrajectory<4> {
    let noise = noise_series(u, bath_a, bath_c);
    let mut out = CovarianceTrajectory::with_capacity(noise.len());
    for (m, n) in u.u.iter().zip(&noise) {
        out.push(assemble_cm(m, n, u.theta));
    }
    out
}
