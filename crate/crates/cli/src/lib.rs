//! Command-line front end: expression parsing, the code-set file format and
//! the `zccs` subcommands.

pub mod doc;
pub mod expr;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use zccs_core::gbf::Gbf;
use zccs_core::pbf::{ConstructionParams, HFunction, ParamSpec};
use zccs_core::pmepr::{check_pmepr_bound, golay_scan, DEFAULT_OVERSAMPLE};
use zccs_core::seqgen::{generate_zccs, plan_parameters, CodeSet};
use zccs_core::verify::{
    check_ccc, check_optimality, check_zccs, measure_zcz, CheckOptions, CorrelationReport, Engine,
    MAX_EXACT_MASS,
};

pub use doc::{read_codeset, write_codeset, CodeSetDocument};
pub use expr::parse_gbf_expr;

/// Overrides the default worker count when `--jobs` is absent.
pub const JOBS_ENV: &str = "ZCCS_JOBS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
enum CliError {
    /// Bad flags, parameters or input files.
    #[error("{0}")]
    Usage(String),
    /// A check ran and did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAIL,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "zccs", version, about = "Construct and verify Z-complementary code sets")]
struct Cli {
    /// Worker threads for verification (default: ZCCS_JOBS or all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a code set and write it as JSON.
    Generate(GenerateArgs),
    /// Factor a target sequence length into construction parameters.
    Plan(PlanArgs),
    /// Check the ZCCS conditions of a stored set.
    Verify(VerifyArgs),
    /// Build the complete complementary code of a GBF and check it.
    Ccc(CccArgs),
    /// Check the PMEPR of every column against a bound.
    Pmepr(PmeprArgs),
    /// Report the largest zone width the set achieves.
    ZczMeasure(MeasureArgs),
    /// Write the complex entries of a set as CSV.
    ExportCsv(ExportArgs),
    /// Look for a Golay partner of every column among the set's columns.
    GolayScan(InputArgs),
}

#[derive(Debug, Args)]
struct FunctionArgs {
    /// Alphabet size of the GBF (even).
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Number of Boolean variables of g.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Quadratic GBF, e.g. "y1*y2+y0".
    #[arg(long)]
    g: String,
    /// Comma-separated deletion set (searched automatically when omitted).
    #[arg(long)]
    delete: Option<String>,
    /// End vertex of the remaining path (first end vertex when omitted).
    #[arg(long)]
    gamma: Option<usize>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output document; written to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    f: FunctionArgs,
    /// Comma-separated primes p_1..p_l.
    #[arg(long, default_value = "")]
    primes: String,
    /// Comma-separated widths s_i (default ceil(log2 p_i)).
    #[arg(long)]
    widths: Option<String>,
    /// Values of h in LSB-first order of (v_0, .., v_n).
    #[arg(long, conflicts_with = "h_path")]
    h_table: Option<String>,
    /// Path-form h: "perm=0,1;u=0,0;c=0".
    #[arg(long)]
    h_path: Option<String>,
    /// Require p_i < 2^{s_i} instead of p_i <= 2^{s_i}.
    #[arg(long)]
    strict: bool,
    /// Leave the last entry of the reversed-family term uncomplemented.
    #[arg(long)]
    literal_bar: bool,
    #[command(flatten)]
    o: OutputArgs,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    length: u64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Float,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Exact => Engine::Exact,
            EngineArg::Float => Engine::Float,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Code-set JSON document.
    input: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    i: InputArgs,
    /// Zone width to check (default: the claimed Z).
    #[arg(long)]
    zcz: Option<usize>,
    #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
    engine: EngineArg,
    /// Stop at the first violation.
    #[arg(long)]
    fast: bool,
}

#[derive(Debug, Args)]
struct CccArgs {
    #[command(flatten)]
    f: FunctionArgs,
    #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
    engine: EngineArg,
    #[command(flatten)]
    o: OutputArgs,
}

#[derive(Debug, Args)]
struct PmeprArgs {
    #[command(flatten)]
    i: InputArgs,
    #[arg(long, default_value_t = 2.0)]
    bound: f64,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
    oversample: usize,
    /// CSV table of code,column,pmepr.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[command(flatten)]
    i: InputArgs,
    #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
    engine: EngineArg,
}

#[derive(Debug, Args)]
struct ExportArgs {
    input: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses, dispatches and maps the outcome to an exit code. `argv` includes
/// the program name.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let jobs = match resolve_jobs(cli.jobs) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}: {e}", if e.code() == EXIT_FAIL { "FAIL" } else { "error" });
            e.code()
        }
    }
}

fn resolve_jobs(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let jobs = match flag {
        Some(j) => Some(j),
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| usage(format!("{JOBS_ENV}={v:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if jobs == Some(0) {
        return Err(usage("the job count must be positive"));
    }
    Ok(jobs)
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Ccc(a) => cmd_ccc(a),
        Command::Pmepr(a) => cmd_pmepr(a),
        Command::ZczMeasure(a) => cmd_measure(a),
        Command::ExportCsv(a) => cmd_export(a),
        Command::GolayScan(a) => cmd_golay(a),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("invalid {what} entry {s:?}"))))
        .collect()
}

/// `perm=0,1;u=0,0;c=0`; `u` and `c` default to zero.
fn parse_h_path(text: &str, q: u32, inputs: usize) -> Result<HFunction, CliError> {
    let (mut perm, mut lin, mut cst) = (None, None, 0u32);
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("h-path item {part:?} is not key=value")))?;
        match key.trim() {
            "perm" => perm = Some(parse_list::<usize>(value, "perm")?),
            "u" => lin = Some(parse_list::<u32>(value, "u")?),
            "c" => {
                cst = value
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("invalid h-path constant {value:?}")))?
            }
            other => return Err(usage(format!("unknown h-path key {other:?}"))),
        }
    }
    let perm = perm.ok_or_else(|| usage("h-path needs perm=..."))?;
    if perm.len() != inputs {
        return Err(usage(format!(
            "h-path perm has {} entries, expected n+1 = {inputs}",
            perm.len()
        )));
    }
    let lin = lin.unwrap_or_else(|| vec![0; inputs]);
    HFunction::from_path(q, &perm, &lin, cst).map_err(usage)
}

/// Parsed GBF plus a resolved deletion set and end vertex.
fn resolve_function(f: &FunctionArgs) -> Result<(Gbf, Vec<usize>, usize), CliError> {
    let g = parse_gbf_expr(&f.g, f.q, f.m).map_err(usage)?;
    let delete = match &f.delete {
        Some(d) => parse_list(d, "delete")?,
        None if f.n == 0 => Vec::new(),
        None => g.find_deletion_set(f.n).ok_or_else(|| {
            usage(format!("no deletion set of size {} leaves a path in {g}", f.n))
        })?,
    };
    let gamma = match f.gamma {
        Some(gm) => gm,
        None => {
            let report = g.check_path_reduction(&delete, None).map_err(usage)?;
            if !report.ok {
                return Err(usage(format!(
                    "deleting {delete:?} from {g} leaves no path: {:?}",
                    report.failure_reason
                )));
            }
            *report.end_vertices.iter().next().expect("a path has end vertices")
        }
    };
    Ok((g, delete, gamma))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn write_report(path: Option<&Path>, value: &impl Serialize) -> CliResult {
    match path {
        Some(p) => {
            let mut text = serde_json::to_string_pretty(value).expect("report serializes");
            text.push('\n');
            write_text(p, &text)
        }
        None => Ok(()),
    }
}

fn load(path: &Path) -> Result<CodeSet, CliError> {
    read_codeset(path).map_err(usage)
}

fn emit_set(set: &CodeSet, out: Option<&Path>) -> CliResult {
    let text = CodeSetDocument::from_set(set).to_json();
    match out {
        Some(p) => write_text(p, &text),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write to stdout: {e}"))),
    }
}

/// Human summary goes to stderr when stdout carries the document.
fn say(to_stdout: bool, line: &str) {
    if to_stdout {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn describe(set: &CodeSet) -> String {
    let p = set.params();
    format!(
        "{} codes of shape {}x{}, sigma = {}, claimed Z = {}",
        p.num_codes, p.rows, p.len, p.sigma, p.zcz_claimed
    )
}

fn cmd_generate(a: GenerateArgs) -> CliResult {
    let (g, delete, gamma) = resolve_function(&a.f)?;
    let q = a.f.q;
    let inputs = a.f.n + 1;
    let h = match (&a.h_table, &a.h_path) {
        (Some(t), _) => HFunction::from_table(q, inputs, parse_list(t, "h-table")?).map_err(usage)?,
        (None, Some(p)) => parse_h_path(p, q, inputs)?,
        (None, None) => HFunction::zero(q, inputs).map_err(usage)?,
    };
    let widths = a.widths.as_deref().map(|w| parse_list(w, "widths")).transpose()?;
    let params = ConstructionParams::new(ParamSpec {
        g,
        n: a.f.n,
        delete,
        gamma,
        primes: parse_list(&a.primes, "primes")?,
        widths,
        h,
        strict_widths: a.strict,
        literal_bar: a.literal_bar,
    })
    .map_err(usage)?;
    let set = generate_zccs(&params).map_err(usage)?;
    let tell = a.o.out.is_some();
    let cond = params.h_condition();
    if !cond.ok {
        eprintln!(
            "warning: h takes values outside every {{c, c + q/2}} pair; the set may not be a ZCCS"
        );
    }
    emit_set(&set, a.o.out.as_deref())?;
    say(tell, &format!("generated {}", describe(&set)));
    let p = set.params();
    let optimality = check_optimality(p.num_codes, p.rows, p.len, p.zcz_claimed).ok();
    write_report(
        a.o.report.as_deref(),
        &json!({
            "command": "generate",
            "params": p,
            "provenance": set.provenance(),
            "h_condition": cond,
            "optimality": optimality,
        }),
    )
}

fn cmd_plan(a: PlanArgs) -> CliResult {
    let plan = plan_parameters(a.length, a.m).map_err(usage)?;
    let primes: Vec<String> = plan.primes.iter().map(u32::to_string).collect();
    let widths: Vec<String> = plan.widths.iter().map(u32::to_string).collect();
    println!(
        "length {} = {} * 2^{}: primes [{}], widths [{}]",
        a.length,
        plan.multiplier,
        plan.m,
        primes.join(","),
        widths.join(",")
    );
    write_report(a.report.as_deref(), &json!({ "command": "plan", "plan": plan }))
}

fn exact_guard(set: &CodeSet, engine: Engine) -> CliResult {
    let p = set.params();
    if engine == Engine::Exact && p.rows * p.len > MAX_EXACT_MASS {
        return Err(usage(format!(
            "K*N = {} is too large for the exact engine; use --engine float",
            p.rows * p.len
        )));
    }
    Ok(())
}

fn summarize(report: &CorrelationReport, what: &str) -> String {
    let status = if report.passed { "PASS" } else { "FAIL" };
    let mut line = format!(
        "{status}: {what} with Z = {} ({} violations)",
        report.zcz,
        report.violations.len()
    );
    if let Some(v) = report.violations.first() {
        line.push_str(&format!(
            "; first: codes ({}, {}) shift {} {:?} |value| = {}",
            v.code_a, v.code_b, v.shift, v.kind, v.magnitude
        ));
    }
    line
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let set = load(&a.i.input)?;
    let p = set.params();
    let z = a.zcz.unwrap_or(p.zcz_claimed);
    if z == 0 || z > p.len {
        return Err(usage(format!("zone width {z} must lie in 1..={}", p.len)));
    }
    let engine = Engine::from(a.engine);
    exact_guard(&set, engine)?;
    let opts = CheckOptions {
        engine,
        ordered_pairs: true,
        stop_at_first: a.fast,
    };
    let report = check_zccs(&set, z, opts);
    let optimality = check_optimality(p.num_codes, p.rows, p.len, z).map_err(usage)?;
    println!("{}", describe(&set));
    println!("{}", summarize(&report, "ZCCS check"));
    println!("set-size bound: {optimality:?}");
    write_report(
        a.i.report.as_deref(),
        &json!({ "command": "verify", "params": p, "report": report, "optimality": optimality }),
    )?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("ZCCS conditions fail at Z = {z}")))
    }
}

fn cmd_ccc(a: CccArgs) -> CliResult {
    let (g, delete, gamma) = resolve_function(&a.f)?;
    let set = zccs_core::seqgen::generate_ccc(&g, a.f.n, &delete, gamma).map_err(usage)?;
    let engine = Engine::from(a.engine);
    exact_guard(&set, engine)?;
    let report = check_ccc(
        &set,
        CheckOptions {
            engine,
            ..CheckOptions::default()
        },
    );
    emit_set(&set, a.o.out.as_deref())?;
    let tell = a.o.out.is_some();
    say(tell, &format!("generated {}", describe(&set)));
    say(tell, &summarize(&report, "CCC check"));
    write_report(
        a.o.report.as_deref(),
        &json!({ "command": "ccc", "params": set.params(), "report": report }),
    )?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed("complete complementary conditions fail".into()))
    }
}

fn cmd_pmepr(a: PmeprArgs) -> CliResult {
    let set = load(&a.i.input)?;
    let report = check_pmepr_bound(&set, a.bound, a.oversample).map_err(usage)?;
    let status = if report.passed { "PASS" } else { "FAIL" };
    let worst = report
        .worst
        .map(|w| format!(" at code {} column {}", w.code, w.column))
        .unwrap_or_default();
    println!(
        "{status}: max PMEPR {:.9}{worst} over {} columns (bound {}, oversample {})",
        report.max_value,
        report.columns.len(),
        report.bound,
        report.oversample
    );
    if let Some(path) = &a.table {
        let mut text = String::from("code,column,pmepr\n");
        for c in &report.columns {
            text.push_str(&format!("{},{},{}\n", c.code, c.column, doc::format_component(c.value)));
        }
        write_text(path, &text)?;
    }
    write_report(a.i.report.as_deref(), &json!({ "command": "pmepr", "report": report }))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "PMEPR {:.9} exceeds the bound {}",
            report.max_value, report.bound
        )))
    }
}

fn cmd_measure(a: MeasureArgs) -> CliResult {
    let set = load(&a.i.input)?;
    let engine = Engine::from(a.engine);
    exact_guard(&set, engine)?;
    let z = measure_zcz(&set, engine);
    let p = set.params();
    println!("measured Z = {z} (claimed {})", p.zcz_claimed);
    write_report(
        a.i.report.as_deref(),
        &json!({ "command": "zcz-measure", "measured": z, "claimed": p.zcz_claimed }),
    )
}

fn cmd_export(a: ExportArgs) -> CliResult {
    let set = load(&a.input)?;
    match &a.out {
        Some(path) => {
            let mut buf = Vec::new();
            doc::export_csv(&set, &mut buf).map_err(usage)?;
            fs::write(path, buf).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
        }
        None => doc::export_csv(&set, io::stdout().lock()).map_err(usage),
    }
}

fn cmd_golay(a: InputArgs) -> CliResult {
    let set = load(&a.input)?;
    let scan = golay_scan(&set);
    println!(
        "{} of {} columns have a Golay partner in the set",
        scan.with_partner, scan.columns
    );
    write_report(a.report.as_deref(), &json!({ "command": "golay-scan", "scan": scan }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_h_path() {
        assert_eq!(parse_list::<u32>("3, 2,2", "p").unwrap(), vec![3, 2, 2]);
        assert!(parse_list::<u32>("", "p").unwrap().is_empty());
        assert!(parse_list::<u32>("3,x", "p").is_err());
        let h = parse_h_path("perm=0,1;u=0,0;c=0", 2, 2).unwrap();
        assert_eq!(h.table(), &[0, 0, 0, 1]);
        let h = parse_h_path("perm=1,0", 4, 2).unwrap();
        assert_eq!(h.table(), &[0, 0, 0, 2]);
        assert!(parse_h_path("u=0,0", 2, 2).is_err());
        assert!(parse_h_path("perm=0", 2, 2).is_err());
        assert!(parse_h_path("perm=0,1;w=1", 2, 2).is_err());
    }

    #[test]
    fn function_defaults() {
        let f = FunctionArgs {
            q: 2,
            m: 3,
            n: 1,
            g: "y1*y2+y0".into(),
            delete: None,
            gamma: None,
        };
        let (_, delete, gamma) = resolve_function(&f).unwrap();
        assert_eq!(delete.len(), 1);
        let g = parse_gbf_expr("y1*y2+y0", 2, 3).unwrap();
        assert!(g.check_path_reduction(&delete, Some(gamma)).unwrap().ok);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_command(["zccs", "plan", "--length", "12"]), EXIT_OK);
        assert_eq!(run_command(["zccs", "plan", "--length", "7"]), EXIT_USAGE);
        assert_eq!(run_command(["zccs", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run_command(["zccs", "--help"]), EXIT_OK);
        assert_eq!(run_command(["zccs", "--jobs", "0", "plan", "--length", "4"]), EXIT_USAGE);
    }
}
