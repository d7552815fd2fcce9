mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Bc, ConfigError, Format, Method, Mode, RunConfig, TerminantArg};

#[derive(Parser, Debug)]
#[command(name = "qphase", version, about = "Quantum-phase quantization of symmetric oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy levels by one method.
    Quantize(Flags),
    /// Quantum phase, its derivative and amplitude at one energy.
    Phase(Flags),
    /// Oscillation number over an energy grid, optionally for a coupling family.
    Sweep(Flags),
    /// Reference levels from Numerov shooting (and closed forms when harmonic).
    Oracle(Flags),
    /// Levels from every method side by side.
    Compare(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Quantize(_) => "quantize",
            Command::Phase(_) => "phase",
            Command::Sweep(_) => "sweep",
            Command::Oracle(_) => "oracle",
            Command::Compare(_) => "compare",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Quantize(f) | Command::Phase(f) | Command::Sweep(f) | Command::Oracle(f) | Command::Compare(f) => f,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// TOML file whose keys mirror the flag names; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `harmonic`, `quartic`, `sextic`, `octic`, `decadic:<lambda>` or `2m:c,...`.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Minimum number of cells between the origin and the turning point.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    nodes_per_wavelength: Option<f64>,
    #[arg(long)]
    xmax_factor: Option<f64>,
    #[arg(long, value_enum)]
    bc: Option<Bc>,
    /// Highest order tried by the boundary-value series.
    #[arg(long)]
    bc_order: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for parallel work.
    #[arg(long)]
    jobs: Option<usize>,
    /// Levels such as `0`, `0-5` or `0,2,4`.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Number of retained Dunham orders.
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, value_enum)]
    terminant: Option<TerminantArg>,
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long)]
    emin: Option<f64>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated couplings of `x^2/2 + lambda x^10/2`.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Sweep scheduling: warm-started chain or parallel cold starts.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Add first-order and Airy comparison columns.
    #[arg(long)]
    with_semiclassical: bool,
    /// Add fifth and sixth derivatives of the amplitude to phase output.
    #[arg(long)]
    alpha_derivatives: bool,
}

impl Flags {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            potential: self.potential.clone(),
            hbar: self.hbar,
            tol: self.tol,
            grid_points: self.grid_points,
            nodes_per_wavelength: self.nodes_per_wavelength,
            xmax_factor: self.xmax_factor,
            bc: self.bc,
            bc_order: self.bc_order,
            format: self.format,
            out: self.out.clone(),
            jobs: self.jobs,
            levels: self.levels.clone(),
            method: self.method,
            kmax: self.kmax,
            terminant: self.terminant,
            energy: self.energy,
            emin: self.emin,
            emax: self.emax,
            samples: self.samples,
            lambdas: self.lambdas.clone(),
            mode: self.mode,
            with_semiclassical: self.with_semiclassical.then_some(true),
            alpha_derivatives: self.alpha_derivatives.then_some(true),
        }
    }
}

fn run(cli: &Cli) -> Result<(), commands::CliError> {
    let flags = cli.command.flags();
    let base = match &flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(&flags.run_config()).resolve()?;
    let work = || match &cli.command {
        Command::Quantize(_) => commands::quantize(&cfg),
        Command::Phase(_) => commands::phase(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Oracle(_) => commands::oracle(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
    };
    let doc = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    output::emit(&doc, cli.command.name(), &cfg)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
