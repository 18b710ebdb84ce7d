//! Command-line front end: one binary with a subcommand per experiment.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::arith::{build_tables, w_of, ArithTables};
use crate::combinat::{find_3ap_shifted_prime, IntSet};
use crate::config::{OutFormat, RunConfig, Tolerances, TOL_INEQ, TOL_ORACLE};
use crate::dynamics::{ergodic_gvn_check_with, Alpha, CircleRotation, SetFile, System, SystemFile, TrigPoly};
use crate::error::{domain_err, LabError, Result};
use crate::experiments::{self, GtParams, CUTOFF};
use crate::par::Exec;
use crate::report::{CsvRowWriter, ExperimentReport, NoSink, Provenance, Row, RowSink};
use crate::selftest::{self, Mode};
use crate::znz::{gowers_norm, gvn_check_with, Strategy, ZnSeq};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NOT_FOUND: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "uniformity-lab", version, about = "Gowers norms, prime averages and recurrence experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, global = true, default_value_t = TOL_INEQ)]
    tol_ineq: f64,
    #[arg(long, global = true, default_value_t = TOL_ORACLE)]
    tol_oracle: f64,
    /// Worker threads (overridden by UNIFORMITY_LAB_WORKERS)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format; inferred from the --out extension when omitted
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output path, `-` for stdout
    #[arg(long, global = true, default_value = "-")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump n, Λ(n), φ(n) for 1 <= n <= nmax
    Sieve {
        #[arg(long)]
        nmax: u64,
        #[arg(long, value_enum)]
        emit: Option<Format>,
    },
    /// Gowers norm of a sequence on Z/NZ read from a file
    Gowers {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value = "recursive")]
        strategy: Strategy,
    },
    /// Generalized von Neumann inequality on Z/NZ, or on a finite system with --system
    GvnCheck {
        #[arg(long)]
        theta: PathBuf,
        /// φ_0..φ_{k-1} on Z/NZ, or f_1..f_{k-1} on the system's points
        #[arg(long = "phi", num_args = 1..)]
        phis: Vec<PathBuf>,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Triple recurrence averaged over shifted primes
    Recurrence {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1)]
        shift: i64,
        #[arg(long)]
        n: u64,
    },
    /// W-tricked weighted vs unweighted recurrence
    Wrec {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        w: u64,
        #[arg(long)]
        n: u64,
    },
    /// Gowers norms of the W-tricked von Mangoldt function
    GtTable {
        #[arg(long, value_delimiter = ',', required = true)]
        w: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        r: u64,
    },
    /// Distances between prime double averages along a ladder
    Converge {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        f1: String,
        #[arg(long, allow_hyphen_values = true)]
        f2: String,
        /// lo:hi:count, log-spaced
        #[arg(long)]
        ladder: String,
    },
    /// Prime vs Cesàro double averages on an irrational rotation
    CompareTe {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        f1: String,
        #[arg(long, allow_hyphen_values = true)]
        f2: String,
        #[arg(long)]
        n: u64,
    },
    /// Least 3-term progression in a set with difference p-1 or p+1
    ApFind {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1)]
        sign: i32,
        #[arg(long)]
        universe: Option<u64>,
    },
    /// Seeded property suite
    Selftest {
        #[arg(long)]
        quick: bool,
    },
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            report_error(&err);
            exit_code(&err)
        }
    }
}

pub fn exit_code(err: &LabError) -> i32 {
    match err {
        LabError::Parse(_) | LabError::Io(_) | LabError::Json(_) | LabError::Csv(_) => EXIT_USAGE,
        LabError::Invariant(_) => EXIT_INVARIANT,
        LabError::Domain(_)
        | LabError::Precondition(_)
        | LabError::Unsupported(_)
        | LabError::Overflow(_)
        | LabError::Resource(_) => EXIT_PRECONDITION,
    }
}

fn report_error(err: &LabError) {
    eprintln!("{}", json!({ "error": err.kind(), "detail": err.to_string() }));
}

fn run(cli: Cli) -> Result<i32> {
    let g = &cli.global;
    let mut cfg = RunConfig {
        seed: g.seed,
        tol: Tolerances { ineq: g.tol_ineq, oracle: g.tol_oracle },
        out_format: resolve_format(g.format, &g.out),
        ..RunConfig::default()
    };
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    cfg.apply_env()?;
    cfg.validate()?;
    with_pool(cfg.workers, || execute(&cli.command, &cfg, &g.out, g.format))
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Resource(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_workers: usize, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    f()
}

fn resolve_format(explicit: Option<Format>, out: &Path) -> OutFormat {
    match explicit {
        Some(Format::Csv) => OutFormat::Csv,
        Some(Format::Json) => OutFormat::Json,
        None if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => OutFormat::Json,
        None => OutFormat::Csv,
    }
}

fn open_out(path: &Path) -> Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| LabError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| LabError::Parse(format!("{}: {e}", path.display())))
}

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance { seed: cfg.seed, tolerances: cfg.tol }
}

fn emit_report(report: ExperimentReport, cfg: &RunConfig, out: &Path) -> Result<()> {
    let report = report.with_provenance(provenance(cfg));
    let mut w = open_out(out)?;
    match cfg.out_format {
        OutFormat::Csv => report.write_csv(&mut w)?,
        OutFormat::Json => w.write_all(report.to_json()?.as_bytes())?,
    }
    w.flush()?;
    Ok(())
}

/// Runs a report-producing step, streaming rows when the output is CSV.
fn streamed<F>(cfg: &RunConfig, out: &Path, produce: F) -> Result<()>
where
    F: FnOnce(&mut dyn RowSink) -> Result<ExperimentReport>,
{
    match cfg.out_format {
        OutFormat::Csv => {
            let mut sink = CsvRowWriter::new(open_out(out)?);
            produce(&mut sink)?;
            sink.finish()
        }
        OutFormat::Json => {
            let report = produce(&mut NoSink)?;
            emit_report(report, cfg, out)
        }
    }
}

fn write_json_line(out: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = open_out(out)?;
    writeln!(w, "{value}")?;
    w.flush()?;
    Ok(())
}

fn load_system(path: &Path, set: &Path) -> Result<(System, crate::dynamics::MeasurableSet)> {
    let system = read_json::<SystemFile>(path)?.build()?;
    let set = read_json::<SetFile>(set)?.build(&system)?;
    Ok((system, set))
}

fn rotation(alpha: &str) -> Result<CircleRotation> {
    Ok(CircleRotation::new(Alpha::parse(alpha)?))
}

fn parse_count(s: &str) -> Result<u64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| LabError::Parse(format!("not a number: {s:?}")))?;
    if !(x >= 1.0 && x.fract() == 0.0 && x < 2f64.powi(53)) {
        return Err(LabError::Parse(format!("not a positive integer: {s:?}")));
    }
    Ok(x as u64)
}

fn parse_ladder(text: &str) -> Result<Vec<u64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(LabError::Parse(format!("ladder must be lo:hi:count, got {text:?}")));
    };
    experiments::log_spaced(parse_count(lo)?, parse_count(hi)?, parse_count(count)? as usize)
}

fn execute(cmd: &Command, cfg: &RunConfig, out: &Path, explicit: Option<Format>) -> Result<i32> {
    match cmd {
        Command::Sieve { nmax, emit } => {
            let format = resolve_format(emit.or(explicit), out);
            sieve(*nmax, format, out)?;
        }
        Command::Gowers { input, d, strategy } => {
            let f = ZnSeq::parse_lines(&read(input)?)?;
            let norm = gowers_norm(&f, *d, *strategy)?;
            write_json_line(
                out,
                &json!({ "n": f.modulus(), "d": norm.d, "strategy": norm.strategy, "value": norm.value }),
            )?;
        }
        Command::GvnCheck { theta, phis, k, system } => {
            let theta = ZnSeq::parse_lines(&read(theta)?)?;
            let funcs = phis
                .iter()
                .map(|p| ZnSeq::parse_lines(&read(p)?))
                .collect::<Result<Vec<_>>>()?;
            let check = match system {
                None => gvn_check_with(&theta, &funcs, *k, cfg.tol.ineq, Exec::default())?,
                Some(path) => {
                    let System::Finite(sys) = read_json::<SystemFile>(path)?.build()? else {
                        return Err(LabError::Unsupported("ergodic check needs a finite system".into()));
                    };
                    let fs: Vec<Vec<Complex64>> = funcs.iter().map(|f| f.values().to_vec()).collect();
                    let modulus = theta.modulus();
                    ergodic_gvn_check_with(&sys, &theta, &fs, *k, modulus, cfg.tol.ineq, Exec::default())?
                }
            };
            write_json_line(out, &json!({ "lhs": check.lhs, "rhs": check.rhs, "holds": check.holds }))?;
            if !check.holds {
                return Err(LabError::Invariant(format!(
                    "inequality fails: lhs {} > rhs {} + {}",
                    check.lhs, check.rhs, cfg.tol.ineq
                )));
            }
        }
        Command::Recurrence { system, set, shift, n } => {
            let (system, set) = load_system(system, set)?;
            let tables = build_tables((*n).max(2))?;
            let report = experiments::prime_shift_recurrence(&system, &set, *shift, *n, &tables)?;
            emit_report(report, cfg, out)?;
        }
        Command::Wrec { system, set, w, n } => {
            let (system, set) = load_system(system, set)?;
            if *w > experiments::MAX_W {
                return Err(domain_err!("w = {w} exceeds the experiment cap {}", experiments::MAX_W));
            }
            let big_w = w_of(*w)?;
            let bound = big_w
                .checked_mul(*n / CUTOFF)
                .and_then(|x| x.checked_add(1))
                .ok_or_else(|| LabError::Overflow("W·⌊N/3⌋ overflows".into()))?;
            let tables = build_tables(bound.max(*n).max(2))?;
            streamed(cfg, out, |sink| {
                experiments::w_tricked_recurrence_streaming(&system, &set, *w, *n, &tables, sink)
            })?;
        }
        Command::GtTable { w, n, d, r } => {
            let params = GtParams { w_list: w.clone(), n_list: n.clone(), r: *r, d: *d };
            let tables = build_tables(experiments::gt_required_bound(&params))?;
            streamed(cfg, out, |sink| experiments::gt_uniformity_table_streaming(&params, &tables, sink))?;
        }
        Command::Converge { alpha, f1, f2, ladder } => {
            let rot = rotation(alpha)?;
            let (f1, f2) = (TrigPoly::parse(f1)?, TrigPoly::parse(f2)?);
            let ladder = parse_ladder(ladder)?;
            let tables = build_tables(*ladder.last().expect("ladder nonempty"))?;
            emit_report(experiments::cauchy_profile(&rot, &f1, &f2, &ladder, &tables)?, cfg, out)?;
        }
        Command::CompareTe { alpha, f1, f2, n } => {
            let rot = rotation(alpha)?;
            let (f1, f2) = (TrigPoly::parse(f1)?, TrigPoly::parse(f2)?);
            let tables = build_tables((*n).max(2))?;
            emit_report(experiments::totally_ergodic_compare(&rot, &f1, &f2, *n, &tables)?, cfg, out)?;
        }
        Command::ApFind { set, sign, universe } => {
            let set = IntSet::parse_lines(&read(set)?, *universe)?;
            let span = match (set.members().first(), set.members().last()) {
                (Some(lo), Some(hi)) => hi - lo,
                _ => 0,
            };
            let tables = build_tables((span / 2 + 1).max(2))?;
            match find_3ap_shifted_prime(&set, *sign, &tables)? {
                Some(hit) => write_json_line(out, &json!(hit))?,
                None => {
                    eprintln!(
                        "{}",
                        json!({ "error": "not_found", "detail": format!("no 3-term progression with difference p{}1", if *sign < 0 { '-' } else { '+' }) })
                    );
                    return Ok(EXIT_NOT_FOUND);
                }
            }
        }
        Command::Selftest { quick } => {
            let mode = if *quick { Mode::Quick } else { Mode::Full };
            let report = selftest::run(mode, cfg.seed, cfg.tol)?;
            let failed = selftest::failures(&report);
            emit_report(report, cfg, out)?;
            if failed > 0 {
                return Err(LabError::Invariant(format!("{failed} selftest instance(s) failed")));
            }
        }
    }
    Ok(EXIT_OK)
}

fn sieve(nmax: u64, format: OutFormat, out: &Path) -> Result<()> {
    if nmax < 1 {
        return Err(domain_err!("nmax must be >= 1"));
    }
    let tables = build_tables(nmax.max(2))?;
    let mut w = open_out(out)?;
    match format {
        OutFormat::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(["n", "lambda", "phi"])?;
            for n in 1..=nmax {
                write_sieve_row(&mut csv, n, &tables)?;
            }
            csv.flush()?;
        }
        OutFormat::Json => {
            let mut report = ExperimentReport::new("sieve").param("nmax", nmax);
            for n in 1..=nmax {
                report.rows.push(
                    Row::new()
                        .with("n", n)
                        .with("lambda", tables.lambda(n)?)
                        .with("phi", tables.phi(n)?),
                );
            }
            w.write_all(report.to_json()?.as_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_sieve_row<W: Write>(csv: &mut csv::Writer<W>, n: u64, tables: &ArithTables) -> Result<()> {
    let lambda = format!("{:?}", tables.lambda(n)?);
    csv.write_record([n.to_string(), lambda, tables.phi(n)?.to_string()])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_inference() {
        assert_eq!(resolve_format(None, Path::new("r.json")), OutFormat::Json);
        assert_eq!(resolve_format(None, Path::new("r.csv")), OutFormat::Csv);
        assert_eq!(resolve_format(None, Path::new("-")), OutFormat::Csv);
        assert_eq!(resolve_format(Some(Format::Csv), Path::new("r.json")), OutFormat::Csv);
    }

    #[test]
    fn ladder_parsing() {
        assert_eq!(parse_ladder("1e4:1e6:5").unwrap().len(), 5);
        assert!(parse_ladder("1e4:1e6").is_err());
        assert!(parse_ladder("x:1e6:5").is_err());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(dispatch(["uniformity-lab", "frobnicate"]), EXIT_USAGE);
        assert_eq!(dispatch(["uniformity-lab", "gowers", "--d", "2"]), EXIT_USAGE);
        assert_eq!(dispatch(["uniformity-lab", "--help"]), EXIT_OK);
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&LabError::Precondition("x".into())), EXIT_PRECONDITION);
        assert_eq!(exit_code(&LabError::Parse("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&LabError::Invariant("x".into())), EXIT_INVARIANT);
    }
}
