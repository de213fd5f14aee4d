use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ffgate::cli::{self, CliError, Options, Output, EXIT_CONFIG, EXIT_FAILURE};
use ffgate::par::{with_threads, Execution};

/// Gaussian simulator for an all-optical feedforward squeezing gate.
#[derive(Debug, Parser)]
#[command(name = "ffgate", version)]
struct Args {
    /// Worker threads for grid evaluation (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Emit JSON instead of CSV or text.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the run manifest (JSON) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the gate once and compare with the analytic prediction.
    Simulate { config: PathBuf },
    /// Sweep the variable beam splitter transmittance.
    Sweep {
        config: PathBuf,
        /// Comma-separated transmittances.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Sideband spectrum under residual dispersion.
    Spectrum {
        config: PathBuf,
        /// Highest sideband frequency (THz).
        #[arg(long, default_value_t = 2.0)]
        fmax: f64,
        /// Number of bins; bin k sits at fmax (k + 1) / bins.
        #[arg(long, default_value_t = 200)]
        bins: usize,
    },
    /// Infer loss and squeezing parameter from a measured pair.
    InferLoss {
        /// Anti-squeezing level (dB).
        #[arg(long, allow_negative_numbers = true)]
        s_plus_db: f64,
        /// Squeezing level (dB, sign ignored).
        #[arg(long, allow_negative_numbers = true)]
        s_minus_db: f64,
        /// Comma-separated stage transmittances.
        #[arg(long, value_delimiter = ',')]
        budget: Option<Vec<f64>>,
        /// Symmetric measurement uncertainty on both levels (dB).
        #[arg(long)]
        uncertainty_db: Option<f64>,
    },
    /// Compare the closed-form lossy amplifier with the slice oracle.
    OpaCheck {
        #[arg(long, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long = "L", allow_negative_numbers = true, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 10_000)]
        slices: usize,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))
}

fn run(args: &Args) -> Result<Output, CliError> {
    let exec = if args.threads == 1 { Execution::Sequential } else { Execution::Parallel };
    let opts = Options { json: args.json, exec };
    match &args.command {
        Command::Simulate { config } => cli::simulate(&read(config)?, opts),
        Command::Sweep { config, t_grid } => cli::sweep(&read(config)?, t_grid.as_deref(), opts),
        Command::Spectrum { config, fmax, bins } => cli::spectrum(&read(config)?, *fmax, *bins, opts),
        Command::InferLoss { s_plus_db, s_minus_db, budget, uncertainty_db } => {
            cli::infer_loss(*s_plus_db, *s_minus_db, budget.as_deref(), *uncertainty_db, opts)
        }
        Command::OpaCheck { g, alpha, length, slices } => cli::opa_check(*g, *alpha, *length, *slices, opts),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = with_threads(args.threads, || run(&args)).and_then(|out| {
        if let Some(path) = &args.manifest {
            let manifest = out
                .manifest
                .as_ref()
                .ok_or_else(|| CliError::new(EXIT_CONFIG, "this command has no config manifest"))?;
            std::fs::write(path, manifest.to_json())
                .map_err(|e| CliError::new(EXIT_FAILURE, format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.code).unwrap_or(1))
        }
    }
}
