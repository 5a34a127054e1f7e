mod parse;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use brfactor::{evaluate, table1, Error, FactorKind, Method, QuadConfig, RegionPair, SeriesConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::parse::{parse_angle, parse_number};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "brf", version, about = "Geometric factors of field commutators for spherical space-time regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one factor and print a JSON record.
    Factor(FactorArgs),
    /// Reproduce the sixteen reference values.
    Table1(TableArgs),
    /// Evaluate a parameter grid and write CSV.
    Sweep(sweep::SweepArgs),
    /// Compare every route on seeded random inputs.
    Validate(validate::ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Series,
    General,
    Numeric,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Closed => Method::ClosedForm,
            MethodArg::Series => Method::SeriesSimple,
            MethodArg::General => Method::SeriesGeneral,
            MethodArg::Numeric => Method::FourierNumeric,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Axx,
    Axy,
    Bxy,
}

impl From<KindArg> for FactorKind {
    fn from(k: KindArg) -> FactorKind {
        match k {
            KindArg::Axx => FactorKind::Axx,
            KindArg::Axy => FactorKind::Axy,
            KindArg::Bxy => FactorKind::Bxy,
        }
    }
}

/// Truncation of both series routes.
#[derive(Args, Clone, Debug)]
pub struct SeriesOpts {
    /// Maximum number of series terms.
    #[arg(long, default_value_t = 2000)]
    pub n_max: usize,
    /// Stop once the trailing terms fall below this fraction of the sum.
    #[arg(long, default_value_t = 1e-6)]
    pub tail_tol: f64,
    /// Number of trailing terms inspected by the stopping test.
    #[arg(long, default_value_t = 20)]
    pub tail_window: usize,
    /// Added to the smallest legal expansion radius.
    #[arg(long, default_value_t = 0.0)]
    pub rex_slack: f64,
}

impl SeriesOpts {
    pub fn config(&self) -> SeriesConfig {
        SeriesConfig { rex_slack: self.rex_slack, n_max: self.n_max, tail_tol: self.tail_tol, tail_window: self.tail_window }
    }
}

/// Tolerances of the numerical Fourier-integral route.
#[derive(Args, Clone, Debug)]
pub struct QuadOpts {
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-13)]
    pub abs_tol: f64,
}

impl QuadOpts {
    pub fn config(&self) -> QuadConfig {
        QuadConfig { rel_tol: self.rel_tol, abs_tol: self.abs_tol, ..QuadConfig::default() }
    }
}

#[derive(Args)]
struct FactorArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_parser = parse_number)]
    r1: f64,
    #[arg(long, value_parser = parse_number)]
    r2: f64,
    /// Separation of the centres.
    #[arg(long, value_parser = parse_number, default_value = "0")]
    r: f64,
    /// Polar angle of the separation, radians or a multiple of pi (`1/6pi`).
    #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, value_parser = parse_number)]
    dt1: f64,
    #[arg(long, value_parser = parse_number)]
    dt2: f64,
    /// Start of the second interval.
    #[arg(long = "t", value_parser = parse_number, allow_hyphen_values = true)]
    t_offset: f64,
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    #[command(flatten)]
    series: SeriesOpts,
    #[command(flatten)]
    quad: QuadOpts,
}

#[derive(Args)]
struct TableArgs {
    /// Route(s) to evaluate; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "closed")]
    method: Vec<MethodArg>,
    #[command(flatten)]
    series: SeriesOpts,
    #[command(flatten)]
    quad: QuadOpts,
    /// Also write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Library errors caused by the caller's input map to the usage exit code.
pub fn exit_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Validation(_) | Error::Domain(_) | Error::UnsupportedSignature { .. }) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn run_factor(a: FactorArgs) -> anyhow::Result<u8> {
    let params = RegionPair {
        r1: a.r1,
        r2: a.r2,
        r: a.r,
        theta: a.theta,
        phi: a.phi,
        dt1: a.dt1,
        dt2: a.dt2,
        t_offset: a.t_offset,
    };
    let kind = FactorKind::from(a.kind);
    let res = evaluate(kind, &params, a.method.into(), &a.series.config(), &a.quad.config())?;
    let record = json!({
        "inputs": params,
        "kind": kind,
        "method": res.method,
        "value": res.value,
        "terms_used": res.terms_used,
        "tail_estimate": res.tail_estimate,
        "converged": res.converged,
        "cancellation_limited": res.cancellation_limited,
    });
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(if res.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn run_table(a: TableArgs) -> anyhow::Result<u8> {
    let mut methods = a.method.clone();
    methods.dedup();
    let mut reports = Vec::new();
    for m in methods {
        let report = table1::run(m.into(), &a.series.config(), &a.quad.config())?;
        print!("{}", report.render());
        reports.push(report);
    }
    if let Some(path) = &a.csv {
        write_table_csv(path, &reports).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if reports.iter().all(|r| r.all_pass()) { 0 } else { EXIT_FAIL })
}

fn write_table_csv(path: &PathBuf, reports: &[table1::RunReport]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method", "row", "kind", "r1", "r2", "r", "theta", "phi", "dt1", "dt2", "t_offset", "paper", "computed", "value",
        "rel_dev", "terms_used", "converged", "pass",
    ])?;
    for rep in reports {
        for r in &rep.rows {
            let p = &r.params;
            let mut rec = vec![rep.method.to_string(), r.index.to_string(), r.kind.to_string()];
            rec.extend([p.r1, p.r2, p.r, p.theta, p.phi, p.dt1, p.dt2, p.t_offset].map(sci));
            rec.extend([
                r.printed.clone(),
                r.rounded.clone(),
                sci(r.value),
                sci(r.rel_dev),
                r.terms_used.to_string(),
                r.converged.to_string(),
                r.pass.to_string(),
            ]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Seventeen significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn configure_threads() -> Result<(), String> {
    let Ok(text) = std::env::var("BRF_THREADS") else { return Ok(()) };
    let n: usize = text.trim().parse().map_err(|_| format!("BRF_THREADS must be a positive integer, got '{text}'"))?;
    if n == 0 {
        return Err("BRF_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let outcome = match cli.command {
        Command::Factor(a) => run_factor(a),
        Command::Table1(a) => run_table(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Validate(a) => validate::run(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_for(&e))
        }
    }
}
