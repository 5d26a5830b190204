use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use purify_cli::presets::{find_preset, presets};
use purify_cli::{execute, CliError, Command, SweepConfig};

#[derive(Parser)]
#[command(name = "purify", version, about = "Post-selected relaxation of driven dissipative qubits")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Eigenvalues of the effective Hamiltonian over a drive range.
    Spectrum(RunArgs),
    /// Observable time series, one column per observable.
    Evolve(RunArgs),
    /// Long-format observables over the parameter grid.
    Sweep(RunArgs),
    /// Crossing times between the configured population pairs.
    Crossings(RunArgs),
    /// Regenerate the data for a figure preset.
    Reproduce {
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the available preset ids.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// modes, ode, lindblad or twomode
    #[arg(long)]
    route: Option<String>,
    /// Relative ODE tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn apply(&self, cfg: &mut SweepConfig) {
        if let Some(route) = &self.route {
            cfg.route = route.clone();
        }
        if self.tol.is_some() {
            cfg.tol = self.tol;
        }
    }
}

fn run_to(command: Command, cfg: &SweepConfig, common: &Common) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let path = common.out.clone().or_else(|| cfg.output_path.clone());
    pool.install(|| match path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(&path)?);
            execute(command, cfg, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            execute(command, cfg, &mut w)?;
            w.flush()?;
            Ok(())
        }
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match cli.command {
        Sub::ListPresets => {
            let mut out = io::stdout().lock();
            for p in presets() {
                writeln!(out, "{:<26} {:<9} {}", p.id, p.command.as_str(), p.summary)?;
            }
            return Ok(());
        }
        Sub::Reproduce { id, common } => {
            let preset = find_preset(&id).ok_or_else(|| CliError::Config(format!("no preset '{id}'")))?;
            let mut cfg = preset.config;
            common.apply(&mut cfg);
            return run_to(preset.command, &cfg, &common);
        }
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Crossings(a) => (Command::Crossings, a),
    };
    let mut cfg = SweepConfig::load(&args.config)?;
    args.common.apply(&mut cfg);
    run_to(command, &cfg, &args.common)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
