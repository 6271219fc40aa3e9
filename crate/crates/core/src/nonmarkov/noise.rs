//! Input-noise correlators as double time convolutions over the propagator.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectra::LorentzianBath;

use super::greens::GreensFunction;

/// Second moments of the accumulated noise operators `V_1`, `V_2` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseCovariance {
    pub t: f64,
    pub v1_v1d: f64,
    pub v1d_v1: f64,
    pub v2_v2d: f64,
    pub v2d_v2: f64,
    pub v1_v2d: Complex64,
    pub v2d_v1: Complex64,
}

impl NoiseCovariance {
    pub fn autocorrelators(&self) -> [f64; 4] {
        [self.v1_v1d, self.v1d_v1, self.v2_v2d, self.v2d_v2]
    }
}

/// Running evaluation of
/// `I_n = int_0^{t_n} int_0^{t_n} x(s) w e^{-lambda |s - s'|} conj(y(s')) ds ds'`
/// with the trapezoid rule in both variables. Each step costs O(1) because
/// the exponential kernel factorizes across the diagonal.
struct KernelIntegral {
    weight: f64,
    decay: f64,
    h: f64,
    full: Complex64,
    px: Complex64,
    py: Complex64,
}

impl KernelIntegral {
    fn new(bath: &LorentzianBath, h: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            weight: bath.kernel_weight(),
            decay: (-bath.lambda * h).exp(),
            h,
            full: zero,
            px: zero,
            py: zero,
        }
    }

    /// Fold in node `n` with samples `x_n`, `y_n` and return `I_n`.
    fn advance(&mut self, n: usize, x: Complex64, y: Complex64) -> Complex64 {
        let yc = y.conj();
        let c = if n == 0 { 0.5 * self.h } else { self.h };
        let w = self.weight;
        // full-weight sum, then replace the last node's weight by h/2
        self.full += (x * self.py + yc * self.px) * (c * w * self.decay) + x * yc * (c * c * w);
        self.px = self.px * self.decay + x * c;
        self.py = self.py * self.decay + yc * c;
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let half = 0.5 * self.h;
        self.full - (x * self.py + yc * self.px) * (half * w) + x * yc * (half * half * w)
    }
}

/// Correlators at every node of the propagator's grid.
pub fn noise_series(
    u: &GreensFunction,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
) -> Vec<NoiseCovariance> {
    noise_prefix(u, bath_a, bath_c, u.grid.steps())
}

fn noise_prefix(
    u: &GreensFunction,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
    last: usize,
) -> Vec<NoiseCovariance> {
    let h = u.grid.dt();
    let mut a11 = KernelIntegral::new(bath_a, h);
    let mut a21 = KernelIntegral::new(bath_a, h);
    let mut a_x = KernelIntegral::new(bath_a, h);
    let mut c12 = KernelIntegral::new(bath_c, h);
    let mut c22 = KernelIntegral::new(bath_c, h);
    let mut c_x = KernelIntegral::new(bath_c, h);
    let (na, nc) = (bath_a.n_bar, bath_c.n_bar);

    u.u[..=last]
        .iter()
        .enumerate()
        .map(|(n, m)| {
            let (u11, u12, u21, u22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let ia11 = a11.advance(n, u11, u11).re;
            let ia21 = a21.advance(n, u21, u21).re;
            let iax = a_x.advance(n, u11, u21);
            let ic12 = c12.advance(n, u12, u12).re;
            let ic22 = c22.advance(n, u22, u22).re;
            let icx = c_x.advance(n, u12, u22);
            NoiseCovariance {
                t: u.grid.time(n),
                v1_v1d: (na + 1.0) * ia11 + nc * ic12,
                v1d_v1: na * ia11 + (nc + 1.0) * ic12,
                v2_v2d: (na + 1.0) * ia21 + nc * ic22,
                v2d_v2: na * ia21 + (nc + 1.0) * ic22,
                v1_v2d: iax * (na + 1.0) + icx * nc,
                v2d_v1: iax * na + icx * (nc + 1.0),
            }
        })
        .collect()
}

/// Correlators at a single grid time `t`.
pub fn noise_covariance(
    u: &GreensFunction,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
    t: f64,
) -> Result<NoiseCovariance> {
    let n = u.grid.index_of(t)?;
    Ok(*noise_prefix(u, bath_a, bath_c, n)
        .last()
        .expect("prefix contains node 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DriveSchedule, TimeGrid};
    use crate::nonmarkov::solve_greens;
    use crate::spectra::Mode;

    fn brute_force(x: &[Complex64], y: &[Complex64], bath: &LorentzianBath, h: f64) -> Complex64 {
        let n = x.len() - 1;
        let w = |i: usize| if i == 0 || i == n { 0.5 * h } else { h };
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                let k = bath.memory_kernel((i as f64 - j as f64) * h);
                total += x[i] * y[j].conj() * (w(i) * w(j) * k);
            }
        }
        total
    }

    #[test]
    fn running_sum_matches_direct_double_sum() {
        let bath = LorentzianBath::new(Mode::A, 0.02, 0.3, 0.0).unwrap();
        let h = 0.1;
        let x: Vec<Complex64> = (0..40)
            .map(|n| Complex64::new((0.1 * n as f64).cos(), 0.05 * n as f64))
            .collect();
        let y: Vec<Complex64> = (0..40)
            .map(|n| Complex64::from_polar(1.0 + 0.01 * n as f64, 0.2 * n as f64))
            .collect();
        let mut acc = KernelIntegral::new(&bath, h);
        for n in 0..40 {
            let got = acc.advance(n, x[n], y[n]);
            let expect = if n == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                brute_force(&x[..=n], &y[..=n], &bath, h)
            };
            assert!(
                (got - expect).norm() < 1e-12 * expect.norm().max(1.0),
                "n={n}"
            );
        }
    }

    #[test]
    fn vanishes_at_origin_and_rejects_off_grid() {
        let a = LorentzianBath::new(Mode::A, 1e-3, 1e-2, 0.5).unwrap();
        let c = LorentzianBath::new(Mode::C, 1.5e-3, 1.5e-2, 0.2).unwrap();
        let grid = TimeGrid::new(10.0, 0.01).unwrap();
        let u = solve_greens(&DriveSchedule::constant(0.01), 0.0, &a, &c, &grid).unwrap();
        let n0 = noise_covariance(&u, &a, &c, 0.0).unwrap();
        assert_eq!(n0.autocorrelators(), [0.0; 4]);
        assert_eq!(n0.v1_v2d, Complex64::new(0.0, 0.0));
        assert!(noise_covariance(&u, &a, &c, 5.005).is_err());
        assert!(noise_covariance(&u, &a, &c, 10.5).is_err());
    }

    #[test]
    fn markov_limit_vacuum_replenishment() {
        let gamma = 1e-3;
        let kappa = std::f64::consts::PI * gamma;
        let a = LorentzianBath::new(Mode::A, gamma, 1.0, 0.0).unwrap();
        let c = LorentzianBath::new(Mode::C, gamma, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(300.0, 0.01).unwrap();
        let u = solve_greens(&DriveSchedule::constant(0.0), 0.0, &a, &c, &grid).unwrap();
        for t in [50.0, 150.0, 300.0] {
            let noise = noise_covariance(&u, &a, &c, t).unwrap();
            let expect = 1.0 - (-2.0 * kappa * t).exp();
            assert!((noise.v1_v1d / expect - 1.0).abs() < 0.02, "t={t}");
        }
    }

    #[test]
    fn vacuum_channels_at_zero_temperature() {
        let a = LorentzianBath::new(Mode::A, 1e-3, 1e-2, 0.0).unwrap();
        let c = LorentzianBath::new(Mode::C, 1.5e-3, 1.5e-2, 0.0).unwrap();
        let grid = TimeGrid::new(100.0, 0.01).unwrap();
        let u = solve_greens(&DriveSchedule::constant(0.0106), 0.0, &a, &c, &grid).unwrap();
        let series = noise_series(&u, &a, &c);
        let last = series.last().unwrap();
        // only the c bath feeds <V1^dag V1>, only the a bath feeds <V2 V2^dag>
        let c_only = LorentzianBath { gamma: 1e-300, ..a };
        let a_only = LorentzianBath { gamma: 1e-300, ..c };
        let from_c = *noise_series(&u, &c_only, &c).last().unwrap();
        let from_a = *noise_series(&u, &a, &a_only).last().unwrap();
        assert!((last.v1d_v1 - from_c.v1d_v1).abs() < 1e-14);
        assert!(from_a.v1d_v1.abs() < 1e-14);
        assert!((last.v2_v2d - from_a.v2_v2d).abs() < 1e-14);
        assert!(from_c.v2_v2d.abs() < 1e-14);
        assert!(series
            .iter()
            .all(|s| s.autocorrelators().iter().all(|&v| v >= -1e-10)));
    }
}
