use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cone_minkowski_cli::{
    run_spectrum, run_stability, run_sweep, run_verify, Bundle, CliError, ExperimentConfig, Status, SweepAxis,
};

/// Minkowski identities, rigidity and stability diagnostics for
/// hypersurfaces in cones.
#[derive(Parser)]
#[command(name = "cone-minkowski", version)]
struct Cli {
    /// Output directory [default: $CONE_MINKOWSKI_OUT, then the config's
    /// out_dir, then ./results].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identity suites across quadrature levels.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Neumann eigenvalue refinement study.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Stability report with eigenvalue interval margins.
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Second identity and rigidity defects along a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// eps, alpha or delta.
        #[arg(long)]
        axis: SweepAxis,
    },
}

fn out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os("CONE_MINKOWSKI_OUT").map(PathBuf::from))
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn run(cli: Cli) -> Result<Bundle, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let (path, command): (&Path, _) = match &cli.command {
        Command::Verify { config } | Command::Spectrum { config } | Command::Stability { config } => {
            (config, &cli.command)
        }
        Command::Sweep { config, .. } => (config, &cli.command),
    };
    let config = ExperimentConfig::load(path)?;
    let bundle = match command {
        Command::Verify { .. } => run_verify(&config)?,
        Command::Spectrum { .. } => run_spectrum(&config)?,
        Command::Stability { .. } => run_stability(&config)?,
        Command::Sweep { axis, .. } => run_sweep(&config, *axis)?,
    };
    let dir = out_dir(cli.out, &config);
    bundle.write_to(&dir)?;
    eprintln!("wrote {} files to {}", bundle.files.len(), dir.display());
    Ok(bundle)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(bundle) => {
            for check in &bundle.checks {
                println!("{}", check.line());
            }
            let failed: Vec<_> = bundle.failures().collect();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                for check in &failed {
                    eprintln!("failed: {}", check.line());
                }
                debug_assert!(failed.iter().all(|c| c.status == Status::Fail));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
