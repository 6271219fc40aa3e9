use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use squeeze_cli::{load_config, run, Kind, Overrides};

#[derive(Parser)]
#[command(
    name = "squeeze",
    version,
    about = "Optical-microwave two-mode squeezing simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective coupling, energy shift and validity diagnostics.
    Effective(Common),
    /// Eigenvalue branches of the full transition matrix near resonance.
    Validate(Common),
    /// Lyapunov covariance dynamics in Markovian baths.
    Markov(Common),
    /// Non-Markovian dynamics with Lorentzian baths.
    Nmhl(Common),
    /// Generation followed by drive switch-off (defaults: tau_off = 300, t_max = 1000).
    Persist(Common),
    /// Squeezing at tau over a parameter grid.
    SweepGen(Common),
    /// Final squeezing versus switch-off time.
    SweepPersist(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; omitted keys take baseline values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; the manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "tmax")]
    t_max: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long, env = "SQUEEZE_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Effective(c) => (Kind::Effective, c),
        Command::Validate(c) => (Kind::Validate, c),
        Command::Markov(c) => (Kind::Markov, c),
        Command::Nmhl(c) => (Kind::Nmhl, c),
        Command::Persist(c) => (Kind::Persist, c),
        Command::SweepGen(c) => (Kind::SweepGen, c),
        Command::SweepPersist(c) => (Kind::SweepPersist, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides {
        out: common.out,
        dt: common.dt,
        t_max: common.t_max,
    };
    let result = load_config(common.config.as_deref(), kind, &overrides).and_then(|cfg| run(&cfg));
    match result {
        Ok(summary) => {
            println!("{}", summary.message);
            println!(
                "wrote {} and {}",
                summary.data.display(),
                summary.manifest.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
