//! Markovian covariance dynamics `dV/dt = A V + V A^T + D`.

use nalgebra::{Matrix4, SMatrix};
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceMatrix, CovarianceTrajectory};
use crate::error::{ensure, Error, Result};
use crate::grid::{DriveSchedule, TimeGrid};
use crate::integrate::rk4_step;
use crate::model::{transition_matrix, Matrix6, SystemParams};

/// Entries beyond this magnitude abort propagation.
const OVERFLOW_GUARD: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Steady,
    Unsteady,
}

/// Steady iff `g_eff^2 < kappa_a kappa_c`; the boundary counts as unsteady.
pub fn stability(g_eff: f64, kappa_a: f64, kappa_c: f64) -> Stability {
    if g_eff * g_eff < kappa_a * kappa_c {
        Stability::Steady
    } else {
        Stability::Unsteady
    }
}

/// Effective two-mode model in the ordering `(X_a, Y_a, X_c, Y_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovModel {
    pub g_eff: f64,
    pub kappa_a: f64,
    pub kappa_c: f64,
    pub n_a: f64,
    pub n_c: f64,
    pub drift: Matrix4<f64>,
    pub diffusion: Matrix4<f64>,
}

impl MarkovModel {
    pub fn new(g_eff: f64, kappa_a: f64, kappa_c: f64, n_a: f64, n_c: f64) -> Result<Self> {
        ensure(g_eff.is_finite(), "g_eff", || {
            format!("must be finite, got {g_eff}")
        })?;
        ensure(kappa_a.is_finite() && kappa_a >= 0.0, "kappa_a", || {
            format!("must be >= 0, got {kappa_a}")
        })?;
        ensure(kappa_c.is_finite() && kappa_c >= 0.0, "kappa_c", || {
            format!("must be >= 0, got {kappa_c}")
        })?;
        ensure(n_a.is_finite() && n_a >= 0.0, "N_a", || {
            format!("must be >= 0, got {n_a}")
        })?;
        ensure(n_c.is_finite() && n_c >= 0.0, "N_c", || {
            format!("must be >= 0, got {n_c}")
        })?;
        let da = kappa_a * (2.0 * n_a + 1.0);
        let dc = kappa_c * (2.0 * n_c + 1.0);
        Ok(Self {
            g_eff,
            kappa_a,
            kappa_c,
            n_a,
            n_c,
            drift: effective_drift(g_eff, kappa_a, kappa_c),
            diffusion: Matrix4::from_diagonal(&nalgebra::Vector4::new(da, da, dc, dc)),
        })
    }

    pub fn stability(&self) -> Stability {
        stability(self.g_eff, self.kappa_a, self.kappa_c)
    }

    /// `A V + V A^T + D`.
    pub fn residual(&self, v: &Matrix4<f64>) -> Matrix4<f64> {
        lyapunov_rhs(&self.drift, &self.diffusion, v)
    }
}

fn effective_drift(g: f64, ka: f64, kc: f64) -> Matrix4<f64> {
    #[rustfmt::skip]
    let a = Matrix4::new(
        ka,  0.0, 0.0, g,
        0.0, ka,  g,   0.0,
        0.0, g,   kc,  0.0,
        g,   0.0, 0.0, kc,
    );
    -a
}

fn lyapunov_rhs<const N: usize>(
    a: &SMatrix<f64, N, N>,
    d: &SMatrix<f64, N, N>,
    v: &SMatrix<f64, N, N>,
) -> SMatrix<f64, N, N> {
    a * v + v * a.transpose() + d
}

/// Fixed-step RK4 integration of the Lyapunov equation with a drift that is
/// piecewise constant in time (`drift_for(g)` gives the drift at coupling `g`).
fn propagate<const N: usize>(
    drift_for: impl Fn(f64) -> SMatrix<f64, N, N>,
    diffusion: &SMatrix<f64, N, N>,
    schedule: &DriveSchedule,
    v0: &CovarianceMatrix<N>,
    grid: &TimeGrid,
) -> Result<CovarianceTrajectory<N>> {
    schedule.validate(grid)?;
    let dt = grid.dt();
    let mut traj = CovarianceTrajectory::with_capacity(grid.len());
    let mut v = v0.entries;
    traj.push(CovarianceMatrix::new(0.0, v));
    let mut cached: Option<(f64, SMatrix<f64, N, N>)> = None;
    for n in 0..grid.steps() {
        let t0 = grid.time(n);
        for (h, g) in schedule.pieces(t0, dt).iter() {
            let a = match cached {
                Some((cg, a)) if cg == g => a,
                _ => {
                    let a = drift_for(g);
                    cached = Some((g, a));
                    a
                }
            };
            v = rk4_step(&v, h, |v| lyapunov_rhs(&a, diffusion, v));
        }
        // symmetrize against round-off drift
        v = (v + v.transpose()) * 0.5;
        let magnitude = v.abs().max();
        if !magnitude.is_finite() || magnitude > OVERFLOW_GUARD {
            return Err(Error::Diverged {
                t: grid.time(n + 1),
                magnitude,
                suggested_dt: dt / 2.0,
            });
        }
        traj.push(CovarianceMatrix::new(grid.time(n + 1), v));
    }
    Ok(traj)
}

/// Propagate the effective 4x4 covariance under constant coupling.
pub fn propagate_cm(
    model: &MarkovModel,
    v0: &CovarianceMatrix<4>,
    grid: &TimeGrid,
) -> Result<CovarianceTrajectory<4>> {
    propagate_cm_scheduled(model, &DriveSchedule::constant(model.g_eff), v0, grid)
}

/// As [`propagate_cm`], with the coupling following `schedule` (the
/// schedule's `g_eff` overrides the model's).
pub fn propagate_cm_scheduled(
    model: &MarkovModel,
    schedule: &DriveSchedule,
    v0: &CovarianceMatrix<4>,
    grid: &TimeGrid,
) -> Result<CovarianceTrajectory<4>> {
    let (ka, kc) = (model.kappa_a, model.kappa_c);
    propagate(
        |g| effective_drift(g, ka, kc),
        &model.diffusion,
        schedule,
        v0,
        grid,
    )
}

/// Closed-form variance of the optimally mixed quadrature from `V(0) = I/2`.
pub fn analytic_variance(
    g_eff: f64,
    kappa_a: f64,
    kappa_c: f64,
    n_a: f64,
    n_c: f64,
    t: f64,
) -> f64 {
    let omega = (4.0 * g_eff * g_eff + (kappa_a - kappa_c).powi(2)).sqrt();
    let two_phi = (2.0 * g_eff).atan2(kappa_a - kappa_c);
    let k_plus = kappa_a * (2.0 * n_a + 1.0) + kappa_c * (2.0 * n_c + 1.0);
    let k_minus = kappa_a * (2.0 * n_a + 1.0) - kappa_c * (2.0 * n_c + 1.0);
    let rate = omega + kappa_a + kappa_c;
    if rate == 0.0 {
        return 0.5;
    }
    let c = -(k_plus + two_phi.cos() * k_minus) / (4.0 * rate) + 0.25;
    0.5 + 2.0 * c * (-rate * t).exp() - 2.0 * c
}

/// Drift and diffusion of the full three-mode model, ordering
/// `(X_a, Y_a, X_b, Y_b, X_c, Y_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullModel {
    pub drift: Matrix6,
    pub diffusion: Matrix6,
}

/// Full-model rates; the mechanical damping is amplified to `e^{2r} kappa_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullRates {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_c: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub n_c: f64,
}

pub fn full_model(params: &SystemParams, delta_a: f64, rates: &FullRates) -> Result<FullModel> {
    params.validate()?;
    for (name, x) in [
        ("kappa_a", rates.kappa_a),
        ("kappa_b", rates.kappa_b),
        ("kappa_c", rates.kappa_c),
    ] {
        ensure(x.is_finite() && x > 0.0, name, || {
            format!("must be > 0, got {x}")
        })?;
    }
    for (name, x) in [("N_a", rates.n_a), ("N_b", rates.n_b), ("N_c", rates.n_c)] {
        ensure(x.is_finite() && x >= 0.0, name, || {
            format!("must be >= 0, got {x}")
        })?;
    }
    let kb = (2.0 * params.r).exp() * rates.kappa_b;
    let k = nalgebra::Vector6::new(
        rates.kappa_a,
        rates.kappa_a,
        kb,
        kb,
        rates.kappa_c,
        rates.kappa_c,
    );
    let noise = nalgebra::Vector6::new(
        rates.n_a, rates.n_a, rates.n_b, rates.n_b, rates.n_c, rates.n_c,
    );
    let d = k.zip_map(&noise, |k, n| k * (2.0 * n + 1.0));
    Ok(FullModel {
        drift: transition_matrix(params, delta_a) - Matrix6::from_diagonal(&k),
        diffusion: Matrix6::from_diagonal(&d),
    })
}

pub fn full_propagate(
    model: &FullModel,
    v0: &CovarianceMatrix<6>,
    grid: &TimeGrid,
) -> Result<CovarianceTrajectory<6>> {
    let drift = model.drift;
    propagate(
        |_| drift,
        &model.diffusion,
        &DriveSchedule::constant(0.0),
        v0,
        grid,
    )
}
