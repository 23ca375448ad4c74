//! Command execution behind the `netres` binary.
//!
//! `run` is a pure function over the input bytes and configuration: results
//! go to the output stream, diagnostics to the error stream, and the outcome
//! is an exit status. Identical input and configuration produce byte-identical
//! output.
//!
//! Exit statuses: 0 success, 1 input/usage errors, 2 validation hard failure
//! or degenerate network, 3 spectral errors, 4 oracle disagreement beyond the
//! check tolerance.

use std::io::Write;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::laplacian::{build_laplacian, validate, Laplacian, ValidationReport};
use crate::matio::{read_matrix_csv, read_matrix_json};
use crate::netlist::{apply_merges, parse_netlist};
use crate::oracle::{compare, solve_direct, CompareReport, InjectionProblem};
use crate::resistance::{all_pairs, sci7, two_point_resistance};
use crate::spectral::{
    biorth_tolerance, eigendecompose_with_tol, verify_biorthogonality, verify_zero_mode, Spectrum,
};

/// How the input bytes are to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Netlist,
    MatrixJson,
    MatrixCsv,
}

impl InputKind {
    /// Infers the kind from a file extension; netlist is the default.
    pub fn from_path(path: &std::path::Path) -> InputKind {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("json") => InputKind::MatrixJson,
            Some("csv") => InputKind::MatrixCsv,
            _ => InputKind::Netlist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Resistance between two named nodes.
    Resistance { alpha: String, beta: String },
    AllPairs,
    Validate,
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Explicit kind; inferred from the extension when absent.
    pub input_kind: Option<InputKind>,
    pub command: Command,
    /// Cross-validate against the direct-solve oracle.
    pub check: bool,
    /// Relative deviation beyond which `--check` fails the run.
    pub check_tol: f64,
    pub format: OutputFormat,
    /// Append the spectrum as a compact JSON line after the main output.
    pub dump_spectrum: bool,
    /// Zero-mode detection band override.
    pub tol_zero: Option<f64>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, command: Command) -> Self {
        RunConfig {
            input: input.into(),
            input_kind: None,
            command,
            check: false,
            check_tol: 1e-6,
            format: OutputFormat::Text,
            dump_spectrum: false,
            tol_zero: None,
        }
    }

    fn kind(&self) -> InputKind {
        self.input_kind
            .unwrap_or_else(|| InputKind::from_path(&self.input))
    }
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Structure(_) | Error::SingularSystem(_) => 2,
        Error::NonDiagonalizable { .. }
        | Error::MultipleZeroModes { .. }
        | Error::NoZeroMode { .. }
        | Error::NonRealResult { .. }
        | Error::Pole { .. }
        | Error::LinAlg(_) => 3,
        Error::AtPair { source, .. } => exit_code(source),
        _ => 1,
    }
}

/// Executes one command over the given input bytes.
pub fn run(
    config: &RunConfig,
    input: &[u8],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    match execute(config, input, out, err) {
        Ok(code) => code,
        Err(error) => {
            let _ = writeln!(err, "error: {error}");
            exit_code(&error)
        }
    }
}

fn load(config: &RunConfig, input: &[u8], err: &mut dyn Write) -> Result<Laplacian> {
    let text = std::str::from_utf8(input)
        .map_err(|_| Error::InvalidMatrix("input is not valid UTF-8".to_string()))?;
    match config.kind() {
        InputKind::Netlist => {
            let netlist = parse_netlist(text)?;
            let (merged, map, notes) = apply_merges(&netlist)?;
            for note in notes {
                writeln!(err, "note: {note}")?;
            }
            let (laplacian, _) = build_laplacian(&merged, &map)?;
            Ok(laplacian)
        }
        InputKind::MatrixJson => read_matrix_json(text),
        InputKind::MatrixCsv => read_matrix_csv(text),
    }
}

fn require_clean(report: &ValidationReport) -> Result<()> {
    if report.is_hard_failure() {
        let detail = report
            .findings
            .iter()
            .map(|f| f.message.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Structure(detail));
    }
    Ok(())
}

fn execute(
    config: &RunConfig,
    input: &[u8],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let laplacian = load(config, input, err)?;
    let report = validate(&laplacian);

    if let Command::Validate = config.command {
        return run_validate(config, &laplacian, &report, out, err);
    }
    require_clean(&report)?;

    let spectrum = eigendecompose_with_tol(&laplacian, config.tol_zero)?;
    let mut status = 0;

    match &config.command {
        Command::Validate => unreachable!("handled above"),
        Command::Spectrum => emit_spectrum(config, &spectrum, out)?,
        Command::Resistance { alpha, beta } => {
            let a = laplacian.node_map().require(alpha)?;
            let b = laplacian.node_map().require(beta)?;
            let result = two_point_resistance(&spectrum, a, b)?;
            match config.format {
                OutputFormat::Text => writeln!(out, "{}", sci7(result.value))?,
                OutputFormat::Json => {
                    let doc = serde_json::json!({
                        "alpha": alpha,
                        "beta": beta,
                        "resistance_ohms": result.value,
                        "imag_residual": result.imag_residual,
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
                }
                OutputFormat::Csv => {
                    writeln!(out, "alpha,beta,resistance_ohms")?;
                    writeln!(out, "{alpha},{beta},{}", result.value)?;
                }
            }
            if config.check {
                let direct =
                    solve_direct(&InjectionProblem::unit(&laplacian, a, b))?.value;
                let denom = result.value.abs().max(direct.abs());
                let rel = if denom == 0.0 {
                    0.0
                } else {
                    (result.value - direct).abs() / denom
                };
                let ok = rel <= config.check_tol;
                writeln!(
                    err,
                    "check: spectral {} vs direct {} -> rel deviation {} ({})",
                    sci7(result.value),
                    sci7(direct),
                    sci7(rel),
                    if ok { "ok" } else { "DISAGREE" }
                )?;
                if !ok {
                    status = 4;
                }
            }
        }
        Command::AllPairs => {
            let matrix = all_pairs(&spectrum, laplacian.node_map())?;
            match config.format {
                OutputFormat::Text => write!(out, "{}", matrix.to_text())?,
                OutputFormat::Json => writeln!(out, "{}", matrix.to_json())?,
                OutputFormat::Csv => write!(out, "{}", matrix.to_csv())?,
            }
            if config.check {
                let comparison = compare(&spectrum, &laplacian)?;
                let ok = comparison.max_rel_deviation <= config.check_tol;
                write_check_report(err, &comparison, config.check_tol, ok)?;
                if !ok {
                    status = 4;
                }
            }
        }
    }

    if config.dump_spectrum {
        let compact: serde_json::Value = serde_json::from_str(&spectrum.to_json())?;
        writeln!(out, "{}", serde_json::to_string(&compact)?)?;
    }
    Ok(status)
}

fn write_check_report(
    err: &mut dyn Write,
    report: &CompareReport,
    tol: f64,
    ok: bool,
) -> Result<()> {
    let worst = report
        .worst_pair
        .as_ref()
        .map(|(a, b)| format!(" (worst pair {a},{b})"))
        .unwrap_or_default();
    writeln!(
        err,
        "check: {} pair(s), max abs {} ohm, max rel {}{} vs tol {} ({})",
        report.pairs,
        sci7(report.max_abs_deviation),
        sci7(report.max_rel_deviation),
        worst,
        sci7(tol),
        if ok { "ok" } else { "DISAGREE" }
    )?;
    Ok(())
}

fn run_validate(
    config: &RunConfig,
    laplacian: &Laplacian,
    report: &ValidationReport,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let spectral = if report.is_hard_failure() {
        Err(Error::Structure("skipped: Kirchhoff sums failed".to_string()))
    } else {
        eigendecompose_with_tol(laplacian, config.tol_zero)
    };

    match config.format {
        OutputFormat::Json => {
            let spectrum_value = match &spectral {
                Ok(s) => {
                    let biorth = verify_biorthogonality(s, biorth_tolerance(s.n()));
                    let zero = verify_zero_mode(s);
                    serde_json::json!({
                        "cond_right": s.cond_right(),
                        "tol_zero": s.tol_zero(),
                        "biorthogonality": biorth,
                        "zero_mode": zero,
                    })
                }
                Err(e) => serde_json::json!({ "error": e.to_string() }),
            };
            let doc = serde_json::json!({
                "nodes": laplacian.node_map().names(),
                "laplacian": report,
                "spectrum": spectrum_value,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        _ => {
            writeln!(out, "nodes: {}", laplacian.n())?;
            writeln!(out, "row_sum_max_abs: {}", sci7(report.row_sum_max_abs))?;
            writeln!(out, "col_sum_max_abs: {}", sci7(report.col_sum_max_abs))?;
            writeln!(out, "tol_stamp: {}", sci7(report.tol_stamp))?;
            writeln!(out, "symmetric: {}", report.is_symmetric)?;
            for finding in &report.findings {
                writeln!(out, "finding: {finding}")?;
            }
            match &spectral {
                Ok(s) => {
                    let biorth = verify_biorthogonality(s, biorth_tolerance(s.n()));
                    let zero = verify_zero_mode(s);
                    writeln!(out, "zero_mode: simple (tol {})", sci7(s.tol_zero()))?;
                    writeln!(out, "cond_right: {}", sci7(s.cond_right()))?;
                    writeln!(
                        out,
                        "biorthogonality: max_off {} max_diag_dev {}",
                        sci7(biorth.max_off_diagonal),
                        sci7(biorth.max_diagonal_deviation)
                    )?;
                    writeln!(
                        out,
                        "zero_vector_residuals: right {} left {}",
                        sci7(zero.right_residual),
                        sci7(zero.left_residual)
                    )?;
                    for finding in biorth.findings.iter().chain(zero.findings.iter()) {
                        writeln!(out, "finding: {finding}")?;
                    }
                }
                Err(e) => writeln!(out, "spectrum: error: {e}")?,
            }
        }
    }

    if report.is_hard_failure() {
        writeln!(err, "error: Kirchhoff sums exceed the hard validation limit")?;
        return Ok(2);
    }
    if let Err(e) = &spectral {
        writeln!(err, "error: {e}")?;
        return Ok(match e {
            Error::Structure(_) => 2,
            _ => 3,
        });
    }
    Ok(0)
}

fn emit_spectrum(config: &RunConfig, spectrum: &Spectrum, out: &mut dyn Write) -> Result<()> {
    match config.format {
        OutputFormat::Json => writeln!(out, "{}", spectrum.to_json())?,
        OutputFormat::Csv => {
            writeln!(out, "index,re,im")?;
            for (i, l) in spectrum.eigenvalues().iter().enumerate() {
                writeln!(out, "{i},{},{}", l.re, l.im)?;
            }
        }
        OutputFormat::Text => {
            for (i, l) in spectrum.eigenvalues().iter().enumerate() {
                writeln!(out, "lambda[{i}] = ({}, {})", sci7(l.re), sci7(l.im))?;
            }
            writeln!(out, "cond_right: {}", sci7(spectrum.cond_right()))?;
        }
    }
    Ok(())
}
