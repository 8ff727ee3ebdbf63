//! `mb-lab` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid arguments, 2 solver failure, 3 failed verification.

mod output;
mod verify;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::eigen::{
    coefficient_ratio, extremal_polynomial, quadrature_norm_ratio, sharp_constant, validate_tolerance,
    DEFAULT_TOLERANCE,
};
use crate::error::Error;
use crate::jacobi::JacobiWeightParams;
use crate::ode::{convergence_study, profile_compare};
use crate::pencil::build_pencil;

pub use output::Format;
pub use verify::{run_checks, CheckOutcome, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mb-lab", version, about = "Sharp Markov-Bernstein constants for Jacobi weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sharp constant M_n for one weight and degree.
    Constant {
        #[command(flatten)]
        weight: Weight,
        /// Polynomial degree (at least 1).
        #[arg(long, value_parser = parse_degree)]
        n: usize,
        /// Write the raw bands of A and the diagonal of D to this file.
        #[arg(long)]
        dump_pencil: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Constants over a grid of exponents and degrees.
    Sweep {
        /// Comma-separated exponents.
        #[arg(long, value_parser = parse_exponents, default_value = "0", allow_hyphen_values = true)]
        alpha: Exponents,
        /// Comma-separated exponents.
        #[arg(long, value_parser = parse_exponents, default_value = "0", allow_hyphen_values = true)]
        beta: Exponents,
        /// Degrees: `50,100`, `10..20` or `50..400:50`.
        #[arg(long, value_parser = parse_degrees)]
        n: Degrees,
        #[command(flatten)]
        common: Common,
    },
    /// Coefficients of the extremal polynomial.
    Extremal {
        #[command(flatten)]
        weight: Weight,
        /// Polynomial degree (at least 1).
        #[arg(long, value_parser = parse_degree)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the eigenvector with the limiting Bessel profile.
    Profile {
        #[command(flatten)]
        weight: Weight,
        /// Polynomial degree (at least 50).
        #[arg(long, value_parser = parse_degree)]
        n: usize,
        /// Directory for the two-column data files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// File name prefix: `<prefix>_discrete.dat`, `<prefix>_profile.dat`.
        #[arg(long, default_value = "profile")]
        prefix: String,
        #[command(flatten)]
        common: Common,
    },
    /// Ratio M_n / (n²/2j) along a sequence of degrees.
    Asymptotics {
        #[command(flatten)]
        weight: Weight,
        /// Degrees: `50,100`, `10..20` or `50..400:50`.
        #[arg(long, value_parser = parse_degrees, default_value = "50,100,200,400")]
        n: Degrees,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in consistency checks.
    Verify {
        /// Scale the second band of every pencil by (1 + eps).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb: f64,
        /// Seed for the randomly drawn check parameters and probe vectors.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Weight {
    /// Exponent of (1 - x); must exceed -1.
    #[arg(long, value_parser = parse_exponent, default_value = "0", allow_hyphen_values = true)]
    alpha: f64,
    /// Exponent of (1 + x); must exceed -1.
    #[arg(long, value_parser = parse_exponent, default_value = "0", allow_hyphen_values = true)]
    beta: f64,
}

#[derive(Debug, Args)]
struct Common {
    /// Relative eigenvalue tolerance in [1e-14, 1e-6].
    #[arg(long, env = "MB_LAB_TOL", value_parser = parse_tolerance, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Output format (default depends on the command).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, value_parser = parse_degree)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone)]
struct Exponents(Vec<f64>);

#[derive(Debug, Clone)]
struct Degrees(Vec<usize>);

fn parse_exponent(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if x > -1.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("exponent {x} must be finite and exceed -1"))
    }
}

fn parse_exponents(s: &str) -> Result<Exponents, String> {
    let mut values: Vec<f64> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_exponent)
        .collect::<Result<_, _>>()?;
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(Exponents(values))
}

fn parse_degree(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn parse_degrees(s: &str) -> Result<Degrees, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            None => out.push(parse_degree(item)?),
            Some((start, rest)) => {
                let (end, step) = match rest.split_once(':') {
                    Some((end, step)) => (end, parse_degree(step)?),
                    None => (rest, 1),
                };
                let (start, end) = (parse_degree(start)?, parse_degree(end)?);
                if end < start {
                    return Err(format!("range {item:?} is descending"));
                }
                out.extend((start..=end).step_by(step));
            }
        }
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err("degrees must be strictly ascending".into());
    }
    Ok(Degrees(out))
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let tol: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    validate_tolerance(tol).map_err(|e| e.to_string())?;
    Ok(tol)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Domain { .. } | Error::DimensionMismatch { .. } => EXIT_INVALID,
        Error::Accuracy { .. } | Error::Convergence { .. } | Error::Overflow { .. } => EXIT_SOLVER,
    }
}

/// Failure carrying its exit code and message.
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(exit_code(&e), e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(EXIT_INVALID, format!("I/O error: {e}"))
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_INVALID
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn common_of(command: &Command) -> &Common {
    match command {
        Command::Constant { common, .. }
        | Command::Sweep { common, .. }
        | Command::Extremal { common, .. }
        | Command::Profile { common, .. }
        | Command::Asymptotics { common, .. }
        | Command::Verify { common, .. } => common,
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let common = common_of(&command);
    let jobs = common.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure(EXIT_INVALID, format!("thread pool: {e}")))?;
    let mut buffer = Vec::new();
    let code = pool.install(|| execute(&command, &mut buffer))?;
    match &common_of(&command).output {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(&buffer)?;
            file.flush()?;
        }
        None => out.write_all(&buffer)?,
    }
    Ok(code)
}

fn weight(alpha: f64, beta: f64) -> Result<JacobiWeightParams, Failure> {
    Ok(JacobiWeightParams::new(alpha, beta)?)
}

fn execute(command: &Command, out: &mut Vec<u8>) -> Result<i32, Failure> {
    match command {
        Command::Constant { weight: w, n, dump_pencil, common } => {
            let params = weight(w.alpha, w.beta)?;
            if let Some(path) = dump_pencil {
                let pencil = build_pencil(&params, *n)?;
                let mut file = BufWriter::new(File::create(path)?);
                pencil.write_banded(&mut file).map_err(|e| match e.into_inner() {
                    Some(inner) => match inner.downcast::<Error>() {
                        Ok(lib) => Failure::from(*lib),
                        Err(other) => Failure(EXIT_INVALID, other.to_string()),
                    },
                    None => Failure(EXIT_INVALID, "pencil dump failed".into()),
                })?;
                file.flush()?;
            }
            let report = sharp_constant(&params, *n, common.tol)?;
            output::write_reports(out, common.format.unwrap_or(Format::Table), &[report], true)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { alpha, beta, n, common } => {
            let tasks: Vec<(f64, f64, usize)> = alpha
                .0
                .iter()
                .flat_map(|&a| beta.0.iter().flat_map(move |&b| n.0.iter().map(move |&k| (a, b, k))))
                .collect();
            let results: Vec<_> = tasks
                .par_iter()
                .map(|&(a, b, k)| {
                    JacobiWeightParams::new(a, b)
                        .and_then(|p| sharp_constant(&p, k, common.tol))
                        .map_err(|_| output::failed_report(k, a, b))
                })
                .collect();
            let failed = results.iter().any(Result::is_err);
            let reports: Vec<_> = results.into_iter().map(|r| r.unwrap_or_else(|f| f)).collect();
            output::write_reports(out, common.format.unwrap_or(Format::Csv), &reports, false)?;
            Ok(if failed { EXIT_SOLVER } else { EXIT_OK })
        }
        Command::Extremal { weight: w, n, common } => {
            let params = weight(w.alpha, w.beta)?;
            let e = extremal_polynomial(&params, *n, common.tol)?;
            let pencil = build_pencil(&params, *n)?;
            let identity = coefficient_ratio(&pencil, &e.u, &e.v).sqrt();
            let quadrature = if *n <= 200 { Some(quadrature_norm_ratio(&params, &e.u)?) } else { None };
            write_extremal(out, common.format.unwrap_or(Format::Table), &params, &e, identity, quadrature)?;
            Ok(EXIT_OK)
        }
        Command::Profile { weight: w, n, out_dir, prefix, common } => {
            let params = weight(w.alpha, w.beta)?;
            let c = profile_compare(&params, *n, common.tol)?;
            fs::create_dir_all(out_dir)?;
            write_columns(&out_dir.join(format!("{prefix}_discrete.dat")), c.samples.iter().map(|s| (s.0, s.1)))?;
            write_columns(&out_dir.join(format!("{prefix}_profile.dat")), c.samples.iter().map(|s| (s.0, s.2)))?;
            let header = ["n", "alpha", "beta", "branch", "degenerate", "l_star", "sup_defect"];
            let row = vec![
                n.to_string(),
                output::csv_number(params.alpha()),
                output::csv_number(params.beta()),
                c.branch.index().to_string(),
                c.degenerate.to_string(),
                output::csv_number(c.l_star),
                output::csv_number(c.sup_defect),
            ];
            match common.format.unwrap_or(Format::Table) {
                Format::Csv => output::write_csv(out, &header, &[row])?,
                Format::Table => output::write_table(out, &header, &[row])?,
                Format::Json => {
                    let mut map = Map::new();
                    map.insert("n".into(), Value::from(*n));
                    map.insert("alpha".into(), output::json_number(params.alpha()));
                    map.insert("beta".into(), output::json_number(params.beta()));
                    map.insert("branch".into(), Value::from(c.branch.index()));
                    map.insert("degenerate".into(), Value::from(c.degenerate));
                    map.insert("l_star".into(), output::json_number(c.l_star));
                    map.insert("sup_defect".into(), output::json_number(c.sup_defect));
                    writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(map)).map_err(io::Error::from)?)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Asymptotics { weight: w, n, common } => {
            let params = weight(w.alpha, w.beta)?;
            let reports = convergence_study(&params, &n.0, common.tol)?;
            output::write_reports(out, common.format.unwrap_or(Format::Csv), &reports, false)?;
            Ok(EXIT_OK)
        }
        Command::Verify { perturb, seed, common } => {
            let checks = run_checks(&VerifyConfig { perturb: *perturb, seed: *seed });
            write_checks(out, common.format.unwrap_or(Format::Table), &checks)?;
            Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

fn write_columns(path: &Path, rows: impl Iterator<Item = (f64, f64)>) -> io::Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    for (t, value) in rows {
        writeln!(file, "{t:.16e} {value:.16e}")?;
    }
    file.flush()
}

fn write_extremal(
    out: &mut Vec<u8>,
    format: Format,
    params: &JacobiWeightParams,
    e: &crate::eigen::ExtremalPolynomial,
    identity: f64,
    quadrature: Option<f64>,
) -> io::Result<()> {
    let rows: Vec<Vec<String>> = e
        .u
        .iter()
        .zip(&e.v)
        .enumerate()
        .map(|(k, (u, v))| vec![k.to_string(), output::csv_number(*u), output::csv_number(*v)])
        .collect();
    match format {
        Format::Csv => output::write_csv(out, &["k", "u", "v"], &rows),
        Format::Table => {
            writeln!(out, "m_n = {}", output::csv_number(e.m_n))?;
            writeln!(out, "coefficient identity = {}", output::csv_number(identity))?;
            if let Some(q) = quadrature {
                writeln!(out, "quadrature ratio = {}", output::csv_number(q))?;
            }
            output::write_table(out, &["k", "u", "v"], &rows)
        }
        Format::Json => {
            let mut map = Map::new();
            map.insert("n".into(), Value::from(e.u.len()));
            map.insert("alpha".into(), output::json_number(params.alpha()));
            map.insert("beta".into(), output::json_number(params.beta()));
            map.insert("m_n".into(), output::json_number(e.m_n));
            map.insert("identity_ratio".into(), output::json_number(identity));
            map.insert("quadrature_ratio".into(), quadrature.map_or(Value::Null, output::json_number));
            map.insert("u".into(), Value::Array(e.u.iter().map(|x| output::json_number(*x)).collect()));
            map.insert("v".into(), Value::Array(e.v.iter().map(|x| output::json_number(*x)).collect()));
            writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(map))?)
        }
    }
}

fn write_checks(out: &mut Vec<u8>, format: Format, checks: &[CheckOutcome]) -> io::Result<()> {
    match format {
        Format::Table => {
            for c in checks {
                writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            writeln!(out, "{passed}/{} checks passed", checks.len())
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                checks.iter().map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()]).collect();
            output::write_csv(out, &["check", "passed", "detail"], &rows)
        }
        Format::Json => {
            let items = checks
                .iter()
                .map(|c| {
                    let mut map = Map::new();
                    map.insert("check".into(), Value::from(c.name));
                    map.insert("passed".into(), Value::from(c.passed));
                    map.insert("detail".into(), Value::from(c.detail.clone()));
                    Value::Object(map)
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&Value::Array(items))?)
        }
    }
}
