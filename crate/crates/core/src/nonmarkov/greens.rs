//! Propagator `U(t)` of the non-Markovian Heisenberg-Langevin equation
//! acting on `(a, c^dagger)`.

use std::ops::{Add, Mul};

use nalgebra::{Matrix2, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DriveSchedule, TimeGrid};
use crate::integrate::rk4_step;
use crate::spectra::LorentzianBath;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct GreensFunction {
    pub grid: TimeGrid,
    pub theta: f64,
    pub u: Vec<Matrix2<Complex64>>,
}

impl GreensFunction {
    pub fn at(&self, n: usize) -> &Matrix2<Complex64> {
        &self.u[n]
    }

    /// Series of one entry, row-major index `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> Vec<Complex64> {
        self.u.iter().map(|m| m[(row, col)]).collect()
    }

    /// Largest elementwise difference against another solution sampled on a
    /// grid that refines this one by an integer factor.
    pub fn max_difference(&self, finer: &GreensFunction) -> f64 {
        let factor = finer.grid.steps() / self.grid.steps().max(1);
        self.u
            .iter()
            .enumerate()
            .map(|(n, m)| {
                (m - finer.u[n * factor])
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Coherent drift `T = i g [[0, -e^{i theta}], [e^{-i theta}, 0]]`.
pub fn drift_matrix(g_eff: f64, theta: f64) -> Matrix2<Complex64> {
    let e = Complex64::from_polar(1.0, theta);
    Matrix2::new(
        Complex64::new(0.0, 0.0),
        -e,
        e.conj(),
        Complex64::new(0.0, 0.0),
    ) * (I * g_eff)
}

/// `[U | W]` where row `k` of `W` is `int_0^t e^{-lambda_k (t-s)} U_k(s) ds`.
#[derive(Clone)]
struct Embedded(SMatrix<Complex64, 2, 4>);

impl Add for Embedded {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Mul<f64> for Embedded {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * Complex64::new(rhs, 0.0))
    }
}

/// Solve `dU/dt = T(t) U - int_0^t F(t-s) U(s) ds`, `U(0) = I`, by embedding the
/// exponential kernels as auxiliary accumulators and stepping the resulting
/// local ODE with RK4.
pub fn solve_greens(
    schedule: &DriveSchedule,
    theta: f64,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
    grid: &TimeGrid,
) -> Result<GreensFunction> {
    schedule.validate(grid)?;
    bath_a.validate()?;
    bath_c.validate()?;
    let weight = [bath_a.kernel_weight(), bath_c.kernel_weight()];
    let decay = [bath_a.lambda, bath_c.lambda];

    let rhs = |t_drift: &Matrix2<Complex64>, y: &Embedded| {
        let u = y.0.fixed_columns::<2>(0).into_owned();
        let w = y.0.fixed_columns::<2>(2).into_owned();
        let mut du = t_drift * u;
        let mut dw = u;
        for k in 0..2 {
            for j in 0..2 {
                du[(k, j)] -= w[(k, j)] * weight[k];
                dw[(k, j)] -= w[(k, j)] * decay[k];
            }
        }
        let mut out = SMatrix::<Complex64, 2, 4>::zeros();
        out.fixed_columns_mut::<2>(0).copy_from(&du);
        out.fixed_columns_mut::<2>(2).copy_from(&dw);
        Embedded(out)
    };

    let mut y = Embedded(SMatrix::zeros());
    y.0.fixed_columns_mut::<2>(0)
        .copy_from(&Matrix2::identity());
    let mut u = Vec::with_capacity(grid.len());
    u.push(Matrix2::identity());
    for n in 0..grid.steps() {
        for (h, g) in schedule.pieces(grid.time(n), grid.dt()).iter() {
            let t_drift = drift_matrix(g, theta);
            y = rk4_step(&y, h, |y| rhs(&t_drift, y));
        }
        let un = y.0.fixed_columns::<2>(0).into_owned();
        if un.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Diverged {
                t: grid.time(n + 1),
                magnitude: f64::INFINITY,
                suggested_dt: grid.dt() / 2.0,
            });
        }
        u.push(un);
    }
    Ok(GreensFunction {
        grid: *grid,
        theta,
        u,
    })
}

/// [`solve_greens`] plus a step-halving study: fails when the propagator
/// moves by more than `tolerance` (relative to its peak) under `dt / 2`.
pub fn solve_greens_checked(
    schedule: &DriveSchedule,
    theta: f64,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
    grid: &TimeGrid,
    tolerance: f64,
) -> Result<GreensFunction> {
    let coarse = solve_greens(schedule, theta, bath_a, bath_c, grid)?;
    let fine = solve_greens(schedule, theta, bath_a, bath_c, &grid.halved())?;
    let scale = coarse
        .u
        .iter()
        .flat_map(|m| m.iter().map(|z| z.norm()))
        .fold(1.0, f64::max);
    let change = coarse.max_difference(&fine) / scale;
    if change > tolerance {
        return Err(Error::UnderResolved {
            change,
            tolerance,
            dt: grid.dt(),
        });
    }
    Ok(coarse)
}

/// Direct trapezoidal quadrature of the Volterra equation with arbitrary
/// kernels `kernel(t) = (f_a(t), conj(f_c(t)))`. Costs O(N^2); used to
/// cross-check [`solve_greens`].
pub fn solve_greens_volterra(
    schedule: &DriveSchedule,
    theta: f64,
    kernel: impl Fn(f64) -> (Complex64, Complex64),
    grid: &TimeGrid,
) -> Result<GreensFunction> {
    schedule.validate(grid)?;
    let h = grid.dt();
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let table: Vec<Matrix2<Complex64>> = (0..grid.len())
        .map(|k| {
            let (fa, fc) = kernel(grid.time(k));
            Matrix2::new(fa, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), fc)
        })
        .collect();
    let eye = Matrix2::<Complex64>::identity();

    let mut u: Vec<Matrix2<Complex64>> = Vec::with_capacity(grid.len());
    u.push(eye);
    // memory integral at t_n, trapezoid weights over [0, t_n]
    let mut memory_n = Matrix2::zeros();
    for n in 0..grid.steps() {
        let g = schedule.coupling_at(grid.time(n) + 0.5 * h);
        let t_drift = drift_matrix(g, theta);
        let rate_n = t_drift * u[n] - memory_n;

        // all history terms of the memory integral at t_{n+1}
        let mut partial = Matrix2::zeros();
        for (j, uj) in u.iter().enumerate() {
            let w = if j == 0 { half } else { full };
            partial += table[n + 1 - j] * uj * w;
        }
        let lhs = eye - t_drift * half + table[0] * (half * half);
        let rhs = u[n] + rate_n * half - partial * half;
        let next = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidGrid("singular trapezoid step".into()))?;
        memory_n = partial + table[0] * next * half;
        u.push(next);
    }
    Ok(GreensFunction {
        grid: *grid,
        theta,
        u,
    })
}
