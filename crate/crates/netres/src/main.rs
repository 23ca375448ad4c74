//! `netres` command-line frontend.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use netres::cli::{run, Command, InputKind, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "netres",
    about = "Two-point resistance of resistive networks, non-symmetric Laplacians included",
    version
)]
struct Args {
    #[command(subcommand)]
    command: CliCommand,

    /// Cross-validate results against the direct-solve oracle.
    #[arg(long, global = true)]
    check: bool,

    /// Relative deviation beyond which --check fails (exit 4).
    #[arg(long, global = true, default_value_t = 1e-6)]
    check_tol: f64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Append the spectrum as a compact JSON line after the main output.
    #[arg(long, global = true)]
    dump_spectrum: bool,

    /// Zero-mode detection band override (siemens).
    #[arg(long, global = true)]
    tol_zero: Option<f64>,

    /// Force the input interpretation instead of inferring it from the
    /// file extension (.json, .csv, else netlist).
    #[arg(long, global = true, value_enum)]
    input_kind: Option<KindArg>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Resistance between two named nodes.
    Resistance {
        alpha: String,
        beta: String,
        input: PathBuf,
    },
    /// Upper-triangular matrix of all two-point resistances.
    AllPairs { input: PathBuf },
    /// Laplacian and spectrum health checks.
    Validate { input: PathBuf },
    /// Eigenvalues and eigenvector bases.
    Spectrum { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Netlist,
    MatrixJson,
    MatrixCsv,
}

fn main() -> ExitCode {
    let args = Args::parse();

    // NETRES_THREADS caps all-pairs parallelism; 0 or unset means automatic.
    if let Ok(value) = std::env::var("NETRES_THREADS") {
        match value.parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            Err(_) => {
                eprintln!("error: NETRES_THREADS must be a non-negative integer");
                return ExitCode::from(1);
            }
        }
    }

    let (command, input) = match args.command {
        CliCommand::Resistance { alpha, beta, input } => {
            (Command::Resistance { alpha, beta }, input)
        }
        CliCommand::AllPairs { input } => (Command::AllPairs, input),
        CliCommand::Validate { input } => (Command::Validate, input),
        CliCommand::Spectrum { input } => (Command::Spectrum, input),
    };

    let mut config = RunConfig::new(input, command);
    config.check = args.check;
    config.check_tol = args.check_tol;
    config.dump_spectrum = args.dump_spectrum;
    config.tol_zero = args.tol_zero;
    config.format = match args.format {
        FormatArg::Text => OutputFormat::Text,
        FormatArg::Json => OutputFormat::Json,
        FormatArg::Csv => OutputFormat::Csv,
    };
    config.input_kind = args.input_kind.map(|k| match k {
        KindArg::Netlist => InputKind::Netlist,
        KindArg::MatrixJson => InputKind::MatrixJson,
        KindArg::MatrixCsv => InputKind::MatrixCsv,
    });

    let bytes = match std::fs::read(&config.input) {
        Ok(bytes) => bytes,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.input.display());
            return ExitCode::from(1);
        }
    };

    let code = run(
        &config,
        &bytes,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
