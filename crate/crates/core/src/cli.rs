//! `solve`, `verify` and `generate` subcommands.
//!
//! stdout receives exactly one JSON document per invocation; logs and
//! human-readable errors go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};
use serde::Serialize;

use crate::certify::{
    generate_planted, verify_d_solution, verify_p_certificate, GenerateRequest, InstanceKind,
    PlantTarget, DEFAULT_MARGIN,
};
use crate::io::{
    parse_certificate, parse_problem, to_json, Certificate, CertificateFile, ProblemFile, SolveReport,
    SCHEMA_VERSION,
};
use crate::oracle::SeparationOracle;
use crate::solver::{main_algorithm, Outcome, ScalingMode, SolveError, SolverConfig};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_DUAL: i32 = 1;
pub const EXIT_EPSILON: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Parser)]
#[command(name = "lsip-rescale", version, about = "Rescaled perceptron feasibility solver")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = LogLevel::Warn, global = true)]
    log_level: LogLevel,
    /// Spaces per indentation level of the JSON output; 0 prints one line.
    #[arg(long, default_value_t = 2, global = true)]
    json_indent: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file.
    Solve(SolveArgs),
    /// Check a certificate against a problem file.
    Verify(VerifyArgs),
    /// Write a planted instance and its certificate.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Replaces the default step threshold 1/√(3m).
    #[arg(long)]
    mu_override: Option<f64>,
    #[arg(long)]
    max_rescalings: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Adds `wall_ms` to the report (which makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    certificate: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    m: usize,
    /// LP: columns. SDP: matrix order. SOCP: total cone dimension.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Target::FeasibleD)]
    target: Target,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Problem file to write.
    #[arg(long)]
    output: PathBuf,
    /// Certificate file to write; defaults to `<output stem>.cert.json`.
    #[arg(long)]
    certificate_output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LogLevel {
    Off,
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl From<LogLevel> for LevelFilter {
    fn from(l: LogLevel) -> Self {
        match l {
            LogLevel::Off => LevelFilter::Off,
            LogLevel::Error => LevelFilter::Error,
            LogLevel::Warn => LevelFilter::Warn,
            LogLevel::Info => LevelFilter::Info,
            LogLevel::Debug => LevelFilter::Debug,
            LogLevel::Trace => LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Factored,
    Auto,
}

impl From<Mode> for ScalingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Dense => ScalingMode::Dense,
            Mode::Factored => ScalingMode::Factored,
            Mode::Auto => ScalingMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Lp,
    Sdp,
    Socp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    FeasibleD,
    FeasibleP,
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: i32,
    kind: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema: u32,
    error: ErrorBody<'a>,
}

fn error_kind(code: i32) -> &'static str {
    match code {
        EXIT_USAGE => "usage",
        EXIT_DATA => "data",
        _ => "internal",
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            let msg = e.kind().to_string();
            emit_error(out, 2, EXIT_USAGE, &msg);
            return EXIT_USAGE;
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(cli.log_level.into())
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();

    let indent = cli.json_indent;
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, indent),
        Command::Verify(a) => cmd_verify(a, indent),
        Command::Generate(a) => cmd_generate(a, indent),
    };
    match result {
        Ok((code, json)) => {
            let _ = writeln!(out, "{json}");
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            emit_error(out, indent, f.code, &f.message);
            f.code
        }
    }
}

fn emit_error(out: &mut dyn Write, indent: usize, code: i32, message: &str) {
    let report = ErrorReport {
        schema: SCHEMA_VERSION,
        error: ErrorBody { code, kind: error_kind(code), message },
    };
    let _ = writeln!(out, "{}", to_json(&report, indent));
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(EXIT_DATA, format!("cannot read {}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<crate::oracle::ProblemInstance, Failure> {
    parse_problem(&read_file(path)?)
        .map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn cmd_solve(a: &SolveArgs, indent: usize) -> Result<(i32, String), Failure> {
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(Failure::new(EXIT_USAGE, format!("--epsilon must lie in (0,1), got {}", a.epsilon)));
    }
    if let Some(mu) = a.mu_override {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Failure::new(EXIT_USAGE, format!("--mu-override must be positive, got {mu}")));
        }
    }
    let instance = load_problem(&a.input)?;
    info!("loaded {} instance with m = {}", instance.kind(), instance.dim());
    let config = SolverConfig {
        mu: a.mu_override,
        max_rescalings: a.max_rescalings,
        mode: a.mode.into(),
        ..SolverConfig::default()
    };
    let solve = main_algorithm(&instance, a.epsilon, &config).map_err(|e| match e {
        SolveError::Config(msg) => Failure::new(EXIT_USAGE, msg),
        other => Failure::new(EXIT_INTERNAL, other.to_string()),
    })?;
    let internal = |e: crate::certify::CertifyError| Failure::new(EXIT_INTERNAL, e.to_string());
    let (code, verification) = match &solve.outcome {
        Outcome::FeasibleD { y } => (EXIT_FEASIBLE, Some(verify_d_solution(&instance, y).map_err(internal)?)),
        Outcome::DualP { weights } => {
            (EXIT_DUAL, Some(verify_p_certificate(&instance, weights).map_err(internal)?))
        }
        Outcome::EpsilonDeclared => (EXIT_EPSILON, None),
    };
    if verification.as_ref().is_some_and(|v| !v.accepted) {
        return Err(Failure::new(EXIT_INTERNAL, "solver produced a certificate that fails verification"));
    }
    info!(
        "{:?} after {} basic procedure calls, {} rescalings",
        crate::io::Status::of(&solve.outcome),
        solve.counters.bp_calls,
        solve.counters.rescalings
    );
    Ok((code, to_json(&SolveReport::new(&solve, verification, a.timing), indent)))
}

fn cmd_verify(a: &VerifyArgs, indent: usize) -> Result<(i32, String), Failure> {
    let instance = load_problem(&a.input)?;
    let cert = parse_certificate(&read_file(&a.certificate)?)
        .map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", a.certificate.display())))?;
    let report = match &cert {
        Certificate::D { y } => {
            if y.len() != instance.dim() {
                return Err(Failure::new(
                    EXIT_DATA,
                    format!("y has length {}, problem has m = {}", y.len(), instance.dim()),
                ));
            }
            verify_d_solution(&instance, y)
        }
        Certificate::P { weights } => verify_p_certificate(&instance, weights),
    }
    .map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    let code = if report.accepted { EXIT_FEASIBLE } else { EXIT_REJECTED };
    Ok((code, to_json(&report, indent)))
}

#[derive(Serialize)]
struct GenerateReport {
    schema: u32,
    problem: String,
    certificate: String,
}

fn default_certificate_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.cert.json"))
}

fn cmd_generate(a: &GenerateArgs, indent: usize) -> Result<(i32, String), Failure> {
    let req = GenerateRequest {
        kind: match a.kind {
            Kind::Lp => InstanceKind::Lp,
            Kind::Sdp => InstanceKind::Sdp,
            Kind::Socp => InstanceKind::Socp,
        },
        m: a.m,
        n: a.n,
        seed: a.seed,
        target: match a.target {
            Target::FeasibleD => PlantTarget::FeasibleD,
            Target::FeasibleP => PlantTarget::FeasibleP,
        },
        margin: a.margin,
    };
    let (instance, planted) = generate_planted(&req).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let problem = ProblemFile::from_instance(&instance).map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))?;
    let cert_path = a.certificate_output.clone().unwrap_or_else(|| default_certificate_path(&a.output));
    let cert = CertificateFile::new(&Certificate::from(planted));
    let write = |path: &Path, text: String| {
        fs::write(path, text + "\n")
            .map_err(|e| Failure::new(EXIT_DATA, format!("cannot write {}: {e}", path.display())))
    };
    write(&a.output, to_json(&problem, indent))?;
    write(&cert_path, to_json(&cert, indent))?;
    let report = GenerateReport {
        schema: SCHEMA_VERSION,
        problem: a.output.display().to_string(),
        certificate: cert_path.display().to_string(),
    };
    Ok((EXIT_FEASIBLE, to_json(&report, indent)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("lsip-rescale").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn usage_errors() {
        let (code, out) = call(&["solve"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.contains("\"error\""));
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["solve", "--input", "x.json", "--epsilon", "2"]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_input_is_data_error() {
        let (code, out) = call(&["solve", "--input", "/nonexistent/missing.json"]);
        assert_eq!(code, EXIT_DATA);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["error"]["code"], 65);
    }

    #[test]
    fn certificate_path_default() {
        assert_eq!(default_certificate_path(Path::new("a/b.json")), PathBuf::from("a/b.cert.json"));
    }
}
