//! TOML experiment configuration.
//!
//! Every key is named after the symbol it sets. Missing keys fall back to
//! the baseline set `g = G = 0.15`, `r = 0.2`, `delta_c = 3.5`,
//! `gamma_a = 1e-3`, `gamma_c = 1.5e-3`, `lambda_a = 1e-2`,
//! `lambda_c = 1.5e-2`, `nbar = 0`, `alpha = phi = 0`, `dt = 0.01`,
//! `t_max = 300` (1000 for persistence runs).
//!
//! ```toml
//! [system]
//! g = 0.2
//! G = 0.2
//! r = 0.2
//!
//! [baths]
//! gamma_a = 1e-3
//! lambda_a = 1e-2
//!
//! [schedule]
//! tau_off = 300.0
//!
//! [time]
//! t_max = 1000.0
//! dt = 0.01
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use squeeze_core::analysis::{
    default_gamma_grid, default_lambda_grid, default_tau_grid, linspace, Environment,
};
use squeeze_core::spectra::{markovian_rate, LorentzianBath, Mode};
use squeeze_core::{SystemParams, TimeGrid};

use crate::error::CliError;

/// Largest admissible number of time steps.
pub const MAX_STEPS: f64 = 5e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Effective,
    Validate,
    Markov,
    Nmhl,
    Persist,
    SweepGen,
    SweepPersist,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    system: RawSystem,
    baths: RawBaths,
    markov: RawMarkov,
    schedule: RawSchedule,
    time: RawTime,
    validate: RawValidate,
    sweep: RawSweep,
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSystem {
    g: Option<f64>,
    #[serde(rename = "G")]
    big_g: Option<f64>,
    r: Option<f64>,
    delta_c: Option<f64>,
    delta_a: Option<f64>,
    alpha: Option<f64>,
    phi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBaths {
    gamma_a: Option<f64>,
    lambda_a: Option<f64>,
    nbar_a: Option<f64>,
    gamma_c: Option<f64>,
    lambda_c: Option<f64>,
    nbar_c: Option<f64>,
    environment: Option<Environment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMarkov {
    model: Option<MarkovKind>,
    kappa_a: Option<f64>,
    kappa_b: Option<f64>,
    kappa_c: Option<f64>,
    #[serde(rename = "N_a")]
    n_a: Option<f64>,
    #[serde(rename = "N_b")]
    n_b: Option<f64>,
    #[serde(rename = "N_c")]
    n_c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSchedule {
    tau_off: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTime {
    t_max: Option<f64>,
    dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawValidate {
    points: Option<usize>,
    half_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSweep {
    axis: Option<SweepAxis>,
    environment: Option<Vec<Environment>>,
    g: Option<Vec<f64>>,
    r: Option<Vec<f64>>,
    gamma_a: Option<Vec<f64>>,
    lambda_a: Option<Vec<f64>>,
    tau: Option<f64>,
    tau_off: Option<Vec<f64>>,
    #[serde(rename = "T")]
    t_end: Option<f64>,
    baths: Option<Vec<RawBathConfig>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBathConfig {
    label: String,
    environment: Option<Environment>,
    gamma_a: Option<f64>,
    lambda_a: Option<f64>,
    gamma_c: Option<f64>,
    lambda_c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    path: Option<PathBuf>,
    stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkovKind {
    /// Two-mode model with `g_eff`.
    Effective,
    /// Three-mode transition matrix with mechanical damping.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    GR,
    GammaA,
    LambdaA,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Baths {
    pub a: LorentzianBath,
    pub c: LorentzianBath,
    pub environment: Environment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovSettings {
    pub model: MarkovKind,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_c: f64,
    #[serde(rename = "N_a")]
    pub n_a: f64,
    #[serde(rename = "N_b")]
    pub n_b: f64,
    #[serde(rename = "N_c")]
    pub n_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSettings {
    pub t_max: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeSettings {
    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.t_max, self.dt).expect("validated at load time")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidateSettings {
    pub points: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceBath {
    pub label: String,
    pub environment: Environment,
    pub gamma_a: f64,
    pub lambda_a: f64,
    pub gamma_c: f64,
    pub lambda_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub axis: SweepAxis,
    pub environment: Vec<Environment>,
    pub g: Vec<f64>,
    pub r: Vec<f64>,
    pub gamma_a: Vec<f64>,
    pub lambda_a: Vec<f64>,
    pub tau: f64,
    pub tau_off: Vec<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub baths: Vec<PersistenceBath>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSettings {
    pub path: PathBuf,
    pub stride: usize,
}

/// Fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub system: SystemParams,
    pub baths: Baths,
    pub markov: MarkovSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_off: Option<f64>,
    pub time: TimeSettings,
    pub validate: ValidateSettings,
    pub sweep: SweepSettings,
    pub output: OutputSettings,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
}

pub fn load_config(
    path: Option<&Path>,
    kind: Kind,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text, kind, overrides)
}

pub fn parse_config(
    text: &str,
    kind: Kind,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    resolve(raw, kind, overrides)
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: {reason}"))
}

fn resolve(
    raw: RawConfig,
    kind: Kind,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let base = SystemParams::default();
    let s = &raw.system;
    let system = SystemParams {
        g: s.g.unwrap_or(base.g),
        big_g: s.big_g.unwrap_or(base.big_g),
        r: s.r.unwrap_or(base.r),
        delta_c: s.delta_c.unwrap_or(base.delta_c),
        delta_a: s.delta_a,
        alpha: s.alpha.unwrap_or(0.0),
        phi: s.phi.unwrap_or(0.0),
    };
    system
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let b = &raw.baths;
    let bath = |mode, gamma, lambda, n_bar| LorentzianBath::new(mode, gamma, lambda, n_bar);
    let a = bath(
        Mode::A,
        b.gamma_a.unwrap_or(1e-3),
        b.lambda_a.unwrap_or(1e-2),
        b.nbar_a.unwrap_or(0.0),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let c = bath(
        Mode::C,
        b.gamma_c.unwrap_or(1.5e-3),
        b.lambda_c.unwrap_or(1.5e-2),
        b.nbar_c.unwrap_or(0.0),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let baths = Baths {
        a,
        c,
        environment: b.environment.unwrap_or(Environment::Structured),
    };

    let m = &raw.markov;
    let markov = MarkovSettings {
        model: m.model.unwrap_or(MarkovKind::Effective),
        kappa_a: m.kappa_a.unwrap_or(markovian_rate(a.gamma)),
        kappa_b: m.kappa_b.unwrap_or(1e-5),
        kappa_c: m.kappa_c.unwrap_or(markovian_rate(c.gamma)),
        n_a: m.n_a.unwrap_or(a.n_bar),
        n_b: m.n_b.unwrap_or(0.0),
        n_c: m.n_c.unwrap_or(c.n_bar),
    };
    for (key, v) in [
        ("kappa_a", markov.kappa_a),
        ("kappa_b", markov.kappa_b),
        ("kappa_c", markov.kappa_c),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(key, format!("must be > 0, got {v}")));
        }
    }
    for (key, v) in [
        ("N_a", markov.n_a),
        ("N_b", markov.n_b),
        ("N_c", markov.n_c),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(key, format!("must be >= 0, got {v}")));
        }
    }

    let persistent = matches!(kind, Kind::Persist | Kind::SweepPersist);
    let dt = overrides.dt.or(raw.time.dt).unwrap_or(0.01);
    let t_max =
        overrides
            .t_max
            .or(raw.time.t_max)
            .unwrap_or(if persistent { 1000.0 } else { 300.0 });
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(invalid("t_max", format!("must be > 0, got {t_max}")));
    }
    if t_max / dt > MAX_STEPS {
        return Err(invalid(
            "dt",
            format!(
                "t_max / dt = {:.3e} exceeds the limit {MAX_STEPS:.0e}",
                t_max / dt
            ),
        ));
    }
    let grid = TimeGrid::new(t_max, dt).map_err(|e| invalid("t_max", e))?;
    let time = TimeSettings {
        t_max,
        dt,
        steps: grid.steps(),
    };

    let tau_off = match kind {
        Kind::Persist => Some(raw.schedule.tau_off.unwrap_or(300.0)),
        _ => raw.schedule.tau_off,
    };
    if let Some(tau) = tau_off {
        if !(tau.is_finite() && tau >= 0.0 && tau <= t_max) {
            return Err(invalid(
                "tau_off",
                format!("{tau} lies outside [0, {t_max}]"),
            ));
        }
        grid.index_of(tau).map_err(|e| invalid("tau_off", e))?;
    }

    let validate = ValidateSettings {
        points: raw.validate.points.unwrap_or(400),
        half_width: raw.validate.half_width.unwrap_or(0.1),
    };
    if validate.points < 3 {
        return Err(invalid("points", "need at least 3"));
    }
    if !(validate.half_width.is_finite() && validate.half_width > 0.0) {
        return Err(invalid("half_width", "must be > 0"));
    }

    let sweep = resolve_sweep(raw.sweep, &baths, dt)?;
    let output = OutputSettings {
        path: overrides
            .out
            .clone()
            .or(raw.output.path)
            .unwrap_or_else(|| PathBuf::from("out.csv")),
        stride: raw.output.stride.unwrap_or(1),
    };
    if output.stride == 0 {
        return Err(invalid("stride", "must be >= 1"));
    }

    Ok(ExperimentConfig {
        kind,
        system,
        baths,
        markov,
        tau_off,
        time,
        validate,
        sweep,
        output,
    })
}

fn resolve_sweep(raw: RawSweep, baths: &Baths, dt: f64) -> Result<SweepSettings, CliError> {
    let t_end = raw.t_end.unwrap_or(1000.0);
    let tau = raw.tau.unwrap_or(300.0);
    for (key, v) in [("tau", tau), ("T", t_end)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(key, format!("must be > 0, got {v}")));
        }
        TimeGrid::new(v, dt).map_err(|e| invalid(key, e))?;
    }
    let (a, c) = (baths.a, baths.c);
    let configs = match raw.baths {
        Some(list) => list
            .into_iter()
            .map(|r| PersistenceBath {
                label: r.label,
                environment: r.environment.unwrap_or(Environment::Structured),
                gamma_a: r.gamma_a.unwrap_or(a.gamma),
                lambda_a: r.lambda_a.unwrap_or(a.lambda),
                gamma_c: r.gamma_c.unwrap_or(c.gamma),
                lambda_c: r.lambda_c.unwrap_or(c.lambda),
            })
            .collect(),
        None => vec![
            PersistenceBath {
                label: "matched".into(),
                environment: Environment::Structured,
                gamma_a: a.gamma,
                lambda_a: a.lambda,
                gamma_c: a.gamma,
                lambda_c: a.lambda,
            },
            PersistenceBath {
                label: "mismatched".into(),
                environment: Environment::Structured,
                gamma_a: a.gamma,
                lambda_a: a.lambda,
                gamma_c: c.gamma,
                lambda_c: c.lambda,
            },
            PersistenceBath {
                label: "markov".into(),
                environment: Environment::Markov,
                gamma_a: a.gamma,
                lambda_a: a.lambda,
                gamma_c: c.gamma,
                lambda_c: c.lambda,
            },
        ],
    };
    for cfg in &configs {
        LorentzianBath::new(Mode::A, cfg.gamma_a, cfg.lambda_a, 0.0)
            .and_then(|_| LorentzianBath::new(Mode::C, cfg.gamma_c, cfg.lambda_c, 0.0))
            .map_err(|e| invalid("sweep.baths", format!("{}: {e}", cfg.label)))?;
    }
    let tau_off = raw.tau_off.unwrap_or_else(default_tau_grid);
    for &t in &tau_off {
        if !(t.is_finite() && t >= 0.0 && t < t_end) {
            return Err(invalid(
                "tau_off",
                format!("{t} must lie in [0, T = {t_end})"),
            ));
        }
    }
    let sweep = SweepSettings {
        axis: raw.axis.unwrap_or(SweepAxis::GR),
        environment: raw
            .environment
            .unwrap_or_else(|| vec![Environment::Markov, Environment::Structured]),
        g: raw.g.unwrap_or_else(|| linspace(0.1, 0.2, 21)),
        r: raw.r.unwrap_or_else(|| linspace(0.0, 0.2, 21)),
        gamma_a: raw.gamma_a.unwrap_or_else(default_gamma_grid),
        lambda_a: raw.lambda_a.unwrap_or_else(default_lambda_grid),
        tau,
        tau_off,
        t_end,
        baths: configs,
    };
    for (key, values) in [
        ("g", &sweep.g),
        ("r", &sweep.r),
        ("gamma_a", &sweep.gamma_a),
        ("lambda_a", &sweep.lambda_a),
    ] {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                key,
                "sweep values must be a non-empty list of finite numbers",
            ));
        }
    }
    Ok(sweep)
}
