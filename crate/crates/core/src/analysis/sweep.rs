//! Parameter sweeps over generation and persistence protocols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::Cm4;
use crate::error::{Error, Result};
use crate::grid::{DriveSchedule, TimeGrid};
use crate::markov::{propagate_cm_scheduled, MarkovModel};
use crate::model::{validity_check, EffectiveModel, SystemParams, DEFAULT_DETUNING_RATIO};
use crate::nonmarkov::nmhl_run;
use crate::spectra::LorentzianBath;

use super::{optimal_angle, optimal_variances, squeezing_level, variance_xy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    /// Lyapunov dynamics with `kappa_o = pi gamma_o`.
    Markov,
    /// Non-Markovian dynamics with Lorentzian memory kernels.
    Structured,
}

impl std::fmt::Display for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Environment::Markov => "markov",
            Environment::Structured => "structured",
        })
    }
}

/// Shared settings of a sweep; each point overrides some of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub params: SystemParams,
    pub bath_a: LorentzianBath,
    pub bath_c: LorentzianBath,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerationAxis {
    /// Grid over `g` (with `G = g`) and `r`, row-major in `g`.
    CouplingSqueezing { g: Vec<f64>, r: Vec<f64> },
    /// `gamma_a` values; `gamma_c` keeps its ratio to `gamma_a`.
    GammaA(Vec<f64>),
    /// `lambda_a` values; `lambda_c` keeps its ratio to `lambda_a`.
    LambdaA(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub s_db: f64,
    pub s_opt_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub coords: Vec<(&'static str, f64)>,
    pub environment: Environment,
    /// Whether the point satisfies every validity criterion of the effective model.
    pub valid: bool,
    pub outcome: std::result::Result<SweepOutcome, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathConfig {
    pub label: String,
    pub environment: Environment,
    pub bath_a: LorentzianBath,
    pub bath_c: LorentzianBath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePoint {
    pub label: String,
    pub tau_off: f64,
    pub outcome: std::result::Result<SweepOutcome, Error>,
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn default_gamma_grid() -> Vec<f64> {
    linspace(0.5e-3, 2e-3, 16)
}

pub fn default_lambda_grid() -> Vec<f64> {
    linspace(0.005, 0.1, 20)
}

pub fn default_tau_grid() -> Vec<f64> {
    (1..=18).map(|k| 50.0 * k as f64).collect()
}

impl GenerationAxis {
    pub fn default_coupling_squeezing() -> Self {
        Self::CouplingSqueezing {
            g: linspace(0.1, 0.2, 21),
            r: linspace(0.0, 0.2, 21),
        }
    }

    fn points(&self, base: &SweepBase) -> Vec<(Vec<(&'static str, f64)>, SweepBase)> {
        match self {
            Self::CouplingSqueezing { g, r } => g
                .iter()
                .flat_map(|&g| r.iter().map(move |&r| (g, r)))
                .map(|(g, r)| {
                    let mut b = *base;
                    b.params.g = g;
                    b.params.big_g = g;
                    b.params.r = r;
                    (vec![("g", g), ("r", r)], b)
                })
                .collect(),
            Self::GammaA(values) => values
                .iter()
                .map(|&gamma| {
                    let mut b = *base;
                    b.bath_c.gamma = base.bath_c.gamma / base.bath_a.gamma * gamma;
                    b.bath_a.gamma = gamma;
                    (vec![("gamma_a", gamma)], b)
                })
                .collect(),
            Self::LambdaA(values) => values
                .iter()
                .map(|&lambda| {
                    let mut b = *base;
                    b.bath_c.lambda = base.bath_c.lambda / base.bath_a.lambda * lambda;
                    b.bath_a.lambda = lambda;
                    (vec![("lambda_a", lambda)], b)
                })
                .collect(),
        }
    }
}

/// Final-time squeezing of one protocol run.
pub fn run_protocol(
    params: &SystemParams,
    bath_a: &LorentzianBath,
    bath_c: &LorentzianBath,
    environment: Environment,
    tau_off: Option<f64>,
    t_end: f64,
    dt: f64,
) -> Result<SweepOutcome> {
    let eff = EffectiveModel::from_params(params)?;
    let grid = TimeGrid::new(t_end, dt)?;
    let schedule = DriveSchedule {
        g_eff: eff.g_eff,
        tau_off,
    };
    let (kappa_a, kappa_c) = (bath_a.markovian_rate(), bath_c.markovian_rate());
    let last: Cm4 = match environment {
        Environment::Markov => {
            let model = MarkovModel::new(eff.g_eff, kappa_a, kappa_c, bath_a.n_bar, bath_c.n_bar)?;
            *propagate_cm_scheduled(&model, &schedule, &Cm4::vacuum(), &grid)?
                .last()
                .expect("trajectory contains the initial state")
        }
        Environment::Structured => *nmhl_run(eff.theta, bath_a, bath_c, &schedule, &grid)?
            .last()
            .expect("trajectory contains the initial state"),
    };
    let (dx, _) = variance_xy(&last, optimal_angle(eff.g_eff, kappa_a, kappa_c)?);
    let (dx_opt, _, _) = optimal_variances(&last)?;
    Ok(SweepOutcome {
        s_db: squeezing_level(dx)?,
        s_opt_db: squeezing_level(dx_opt)?,
    })
}

/// Squeezing at `tau` over a one- or two-dimensional grid, in grid order.
pub fn sweep_generation(
    base: &SweepBase,
    axis: &GenerationAxis,
    environment: Environment,
    tau: f64,
) -> Vec<SweepPoint> {
    axis.points(base)
        .into_par_iter()
        .map(|(coords, b)| SweepPoint {
            coords,
            environment,
            valid: validity_check(&b.params, DEFAULT_DETUNING_RATIO).all_pass(),
            outcome: run_protocol(
                &b.params,
                &b.bath_a,
                &b.bath_c,
                environment,
                None,
                tau,
                b.dt,
            ),
        })
        .collect()
}

/// Squeezing at `t_end` after switching the drive off at each `tau_off`, for
/// every bath configuration (configuration-major order).
pub fn sweep_persistence(
    params: &SystemParams,
    configs: &[BathConfig],
    taus: &[f64],
    t_end: f64,
    dt: f64,
) -> Vec<PersistencePoint> {
    let jobs: Vec<(&BathConfig, f64)> = configs
        .iter()
        .flat_map(|c| taus.iter().map(move |&t| (c, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(config, tau_off)| {
            let outcome = if tau_off < t_end {
                run_protocol(
                    params,
                    &config.bath_a,
                    &config.bath_c,
                    config.environment,
                    Some(tau_off),
                    t_end,
                    dt,
                )
            } else {
                Err(Error::InvalidParameter {
                    name: "tau_off",
                    reason: format!("{tau_off} must precede the final time {t_end}"),
                })
            };
            PersistencePoint {
                label: config.label.clone(),
                tau_off,
                outcome,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Mode;

    fn base() -> SweepBase {
        SweepBase {
            params: SystemParams::default(),
            bath_a: LorentzianBath::new(Mode::A, 1e-3, 1e-2, 0.0).unwrap(),
            bath_c: LorentzianBath::new(Mode::C, 1.5e-3, 1.5e-2, 0.0).unwrap(),
            dt: 0.05,
        }
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.1, 0.2, 21).len(), 21);
        assert!((linspace(0.1, 0.2, 21)[20] - 0.2).abs() < 1e-15);
        assert_eq!(default_tau_grid().first(), Some(&50.0));
        assert_eq!(default_tau_grid().last(), Some(&900.0));
    }

    #[test]
    fn generation_order_is_row_major() {
        let axis = GenerationAxis::CouplingSqueezing {
            g: vec![0.1, 0.2],
            r: vec![0.0, 0.1, 0.2],
        };
        let pts = sweep_generation(&base(), &axis, Environment::Markov, 50.0);
        let coords: Vec<_> = pts.iter().map(|p| (p.coords[0].1, p.coords[1].1)).collect();
        assert_eq!(
            coords,
            vec![
                (0.1, 0.0),
                (0.1, 0.1),
                (0.1, 0.2),
                (0.2, 0.0),
                (0.2, 0.1),
                (0.2, 0.2)
            ]
        );
        assert!(pts.iter().all(|p| p.outcome.is_ok()));
    }

    #[test]
    fn markov_is_flat_in_lambda() {
        let pts = sweep_generation(
            &base(),
            &GenerationAxis::LambdaA(vec![0.005, 0.05, 0.1]),
            Environment::Markov,
            100.0,
        );
        let s: Vec<f64> = pts
            .iter()
            .map(|p| p.outcome.as_ref().unwrap().s_db)
            .collect();
        assert!(s.iter().all(|x| (x - s[0]).abs() < 1e-12));
    }

    #[test]
    fn failures_are_recorded_per_point() {
        let configs = [BathConfig {
            label: "matched".into(),
            environment: Environment::Structured,
            bath_a: base().bath_a,
            bath_c: LorentzianBath {
                mode: Mode::C,
                ..base().bath_a
            },
        }];
        let pts = sweep_persistence(
            &SystemParams::default(),
            &configs,
            &[50.0, 200.0],
            100.0,
            0.05,
        );
        assert!(pts[0].outcome.is_ok());
        assert!(pts[1].outcome.is_err());
    }
}
