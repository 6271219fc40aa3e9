//! Experiment execution and deterministic file output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use squeeze_core::analysis::{
    optimal_angle, reduce_full, squeezing_records, sweep_generation, sweep_persistence, BathConfig,
    Environment, GenerationAxis, SqueezingRecord, SweepBase, SweepOutcome,
};
use squeeze_core::markov::{
    full_model, full_propagate, propagate_cm_scheduled, FullRates, MarkovModel,
};
use squeeze_core::model::{eigen_splitting, scan_grid};
use squeeze_core::nonmarkov::nmhl_run;
use squeeze_core::spectra::{LorentzianBath, Mode};
use squeeze_core::{Cm4, Cm6, DriveSchedule, EffectiveModel};

use crate::config::{ExperimentConfig, Kind, MarkovKind, SweepAxis};
use crate::error::CliError;

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub data: PathBuf,
    pub manifest: PathBuf,
    pub message: String,
}

/// Nine significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Serialize)]
struct Derived {
    g_eff: f64,
    delta: f64,
    theta: f64,
    delta_a: f64,
}

#[derive(Serialize)]
struct Solver {
    integrator: &'static str,
    dt: f64,
    steps: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    derived: Derived,
    solver: Solver,
    config: &'a ExperimentConfig,
}

pub fn manifest_path(data: &Path) -> PathBuf {
    data.with_extension("manifest.toml")
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let eff = EffectiveModel::from_params(&cfg.system)?;
    let data = cfg.output.path.clone();
    if let Some(dir) = data.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&data)?));
    let message = match cfg.kind {
        Kind::Effective => run_effective(cfg, &eff, &mut w)?,
        Kind::Validate => run_validate(cfg, &eff, &mut w)?,
        Kind::Markov => run_markov(cfg, &eff, &mut w)?,
        Kind::Nmhl | Kind::Persist => run_nmhl(cfg, &eff, &mut w)?,
        Kind::SweepGen => run_sweep_generation(cfg, &mut w)?,
        Kind::SweepPersist => run_sweep_persistence(cfg, &mut w)?,
    };
    w.flush()?;
    drop(w);
    // the validation table ends with a commented summary line
    let message = match message.strip_prefix("# ") {
        Some(stripped) => {
            let mut f = std::fs::OpenOptions::new().append(true).open(&data)?;
            writeln!(f, "{message}")?;
            stripped.to_string()
        }
        None => message,
    };

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        derived: Derived {
            g_eff: eff.g_eff,
            delta: eff.delta,
            theta: eff.theta,
            delta_a: cfg.system.resolved_delta_a()?,
        },
        solver: Solver {
            integrator: "rk4",
            dt: cfg.time.dt,
            steps: cfg.time.steps,
        },
        config: cfg,
    };
    let manifest_file = manifest_path(&data);
    std::fs::write(&manifest_file, toml::to_string(&manifest)?)?;
    Ok(RunSummary {
        data,
        manifest: manifest_file,
        message,
    })
}

type Out = csv::Writer<BufWriter<File>>;

fn run_effective(
    cfg: &ExperimentConfig,
    eff: &EffectiveModel,
    w: &mut Out,
) -> Result<String, CliError> {
    w.write_record([
        "g_eff",
        "delta",
        "theta",
        "delta_a",
        "coupling_range",
        "mpa_range",
        "large_detuning",
        "detuning_ratio",
    ])?;
    let v = &eff.validity;
    w.write_record([
        fmt_num(eff.g_eff),
        fmt_num(eff.delta),
        fmt_num(eff.theta),
        fmt_num(cfg.system.resolved_delta_a()?),
        v.coupling_range.pass.to_string(),
        v.mpa_range.pass.to_string(),
        v.large_detuning.pass.to_string(),
        fmt_num(v.detuning_ratio),
    ])?;
    Ok(format!(
        "g_eff = {:.6e}, delta = {:.6e}",
        eff.g_eff, eff.delta
    ))
}

fn run_validate(
    cfg: &ExperimentConfig,
    eff: &EffectiveModel,
    w: &mut Out,
) -> Result<String, CliError> {
    let grid = scan_grid(
        cfg.system.delta_c,
        cfg.validate.points,
        cfg.validate.half_width,
    );
    let scan = eigen_splitting(&cfg.system, &grid)?;
    w.write_record(["delta_a", "im_branch_1", "im_branch_2"])?;
    for (da, b) in scan.delta_a.iter().zip(&scan.branches) {
        w.write_record([fmt_num(*da), fmt_num(b[0]), fmt_num(b[1])])?;
    }
    let summary = format!(
        "# g_eff_num={},delta_num={},g_eff={},delta={}",
        fmt_num(scan.g_eff_num),
        fmt_num(scan.delta_num),
        fmt_num(eff.g_eff),
        fmt_num(eff.delta)
    );
    Ok(summary)
}

fn trajectory_header(w: &mut Out) -> Result<(), CliError> {
    w.write_record(["t", "dX", "dY", "dX_opt", "dY_opt", "S_dB", "S_opt_dB"])?;
    Ok(())
}

fn write_records(
    cfg: &ExperimentConfig,
    records: &[SqueezingRecord],
    w: &mut Out,
) -> Result<String, CliError> {
    trajectory_header(w)?;
    let last = records.len() - 1;
    for (n, r) in records.iter().enumerate() {
        if n % cfg.output.stride == 0 || n == last {
            w.write_record([r.t, r.dx, r.dy, r.dx_opt, r.dy_opt, r.s_db, r.s_opt_db].map(fmt_num))?;
        }
    }
    let r = &records[last];
    Ok(format!(
        "t = {}: dX = {:.6}, S = {:.4} dB, S_opt = {:.4} dB",
        r.t, r.dx, r.s_db, r.s_opt_db
    ))
}

fn schedule(cfg: &ExperimentConfig, eff: &EffectiveModel) -> DriveSchedule {
    DriveSchedule {
        g_eff: eff.g_eff,
        tau_off: cfg.tau_off,
    }
}

fn run_markov(
    cfg: &ExperimentConfig,
    eff: &EffectiveModel,
    w: &mut Out,
) -> Result<String, CliError> {
    let m = &cfg.markov;
    let grid = cfg.time.grid();
    let mix = optimal_angle(eff.g_eff, m.kappa_a, m.kappa_c)?;
    let records = match m.model {
        MarkovKind::Effective => {
            let model = MarkovModel::new(eff.g_eff, m.kappa_a, m.kappa_c, m.n_a, m.n_c)?;
            let traj = propagate_cm_scheduled(&model, &schedule(cfg, eff), &Cm4::vacuum(), &grid)?;
            squeezing_records(&traj, mix)?
        }
        MarkovKind::Full => {
            if cfg.tau_off.is_some() {
                return Err(CliError::Config(
                    "`tau_off` is not supported with the full three-mode model".into(),
                ));
            }
            let rates = FullRates {
                kappa_a: m.kappa_a,
                kappa_b: m.kappa_b,
                kappa_c: m.kappa_c,
                n_a: m.n_a,
                n_b: m.n_b,
                n_c: m.n_c,
            };
            let model = full_model(&cfg.system, cfg.system.resolved_delta_a()?, &rates)?;
            let traj = full_propagate(&model, &Cm6::vacuum(), &grid)?;
            traj.iter()
                .map(|cm| SqueezingRecord::from_block(&reduce_full(cm), mix))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    write_records(cfg, &records, w)
}

fn run_nmhl(cfg: &ExperimentConfig, eff: &EffectiveModel, w: &mut Out) -> Result<String, CliError> {
    let (a, c) = (&cfg.baths.a, &cfg.baths.c);
    let grid = cfg.time.grid();
    let sched = schedule(cfg, eff);
    let mix = optimal_angle(eff.g_eff, a.markovian_rate(), c.markovian_rate())?;
    let environment = if cfg.kind == Kind::Persist {
        cfg.baths.environment
    } else {
        Environment::Structured
    };
    let traj = match environment {
        Environment::Structured => nmhl_run(eff.theta, a, c, &sched, &grid)?,
        Environment::Markov => {
            let model = MarkovModel::new(
                eff.g_eff,
                a.markovian_rate(),
                c.markovian_rate(),
                a.n_bar,
                c.n_bar,
            )?;
            propagate_cm_scheduled(&model, &sched, &Cm4::vacuum(), &grid)?
        }
    };
    write_records(cfg, &squeezing_records(&traj, mix)?, w)
}

fn outcome_fields(outcome: &Result<SweepOutcome, squeeze_core::Error>) -> [String; 3] {
    match outcome {
        Ok(o) => [fmt_num(o.s_db), fmt_num(o.s_opt_db), "ok".into()],
        Err(e) => ["nan".into(), "nan".into(), e.to_string()],
    }
}

fn run_sweep_generation(cfg: &ExperimentConfig, w: &mut Out) -> Result<String, CliError> {
    let s = &cfg.sweep;
    let base = SweepBase {
        params: cfg.system,
        bath_a: cfg.baths.a,
        bath_c: cfg.baths.c,
        dt: cfg.time.dt,
    };
    let axis = match s.axis {
        SweepAxis::GR => GenerationAxis::CouplingSqueezing {
            g: s.g.clone(),
            r: s.r.clone(),
        },
        SweepAxis::GammaA => GenerationAxis::GammaA(s.gamma_a.clone()),
        SweepAxis::LambdaA => GenerationAxis::LambdaA(s.lambda_a.clone()),
    };
    let mut header_written = false;
    let (mut total, mut failed) = (0, 0);
    for &env in &s.environment {
        for point in sweep_generation(&base, &axis, env, s.tau) {
            if !header_written {
                let mut header: Vec<&str> = point.coords.iter().map(|(k, _)| *k).collect();
                header.extend(["environment", "valid", "S_dB", "S_opt_dB", "status"]);
                w.write_record(&header)?;
                header_written = true;
            }
            let mut row: Vec<String> = point.coords.iter().map(|(_, v)| fmt_num(*v)).collect();
            row.push(env.to_string());
            row.push(point.valid.to_string());
            row.extend(outcome_fields(&point.outcome));
            w.write_record(&row)?;
            total += 1;
            failed += usize::from(point.outcome.is_err());
        }
    }
    Ok(format!("{total} sweep points, {failed} failed"))
}

fn run_sweep_persistence(cfg: &ExperimentConfig, w: &mut Out) -> Result<String, CliError> {
    let s = &cfg.sweep;
    let configs: Vec<BathConfig> = s
        .baths
        .iter()
        .map(|b| {
            Ok(BathConfig {
                label: b.label.clone(),
                environment: b.environment,
                bath_a: LorentzianBath::new(Mode::A, b.gamma_a, b.lambda_a, cfg.baths.a.n_bar)?,
                bath_c: LorentzianBath::new(Mode::C, b.gamma_c, b.lambda_c, cfg.baths.c.n_bar)?,
            })
        })
        .collect::<Result<_, squeeze_core::Error>>()?;
    w.write_record([
        "label",
        "environment",
        "tau_off",
        "S_dB",
        "S_opt_dB",
        "status",
    ])?;
    let points = sweep_persistence(&cfg.system, &configs, &s.tau_off, s.t_end, cfg.time.dt);
    let failed = points.iter().filter(|p| p.outcome.is_err()).count();
    for (p, config) in points.iter().zip(
        configs
            .iter()
            .flat_map(|c| s.tau_off.iter().map(move |_| c)),
    ) {
        let [a, b, status] = outcome_fields(&p.outcome);
        w.write_record([
            p.label.clone(),
            config.environment.to_string(),
            fmt_num(p.tau_off),
            a,
            b,
            status,
        ])?;
    }
    Ok(format!("{} sweep points, {failed} failed", points.len()))
}
