//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or parameter error,
//! 3 tolerance not reached, 4 a verification verdict failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::dde::solve_f;
use crate::error::Error;
use crate::format::{fmt_rational, real_json, Cell, Format, Output, Table};
use crate::iterints::{build_table, SieveKernel};
use crate::multfun::{a_normalization, m_sum_exact, m_sum_smooth, singular_series, MultFuncSpec};
use crate::verify;
use crate::zhang::{self, ScanCell, SieveParams, TupleSpec};

pub const ENV_THREADS: &str = "SMOOTHSIEVE_THREADS";
pub const ENV_OUT_DIR: &str = "SMOOTHSIEVE_OUT_DIR";

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser, Serialize)]
#[command(name = "smoothsieve", version, about = "Weighted multiplicative sums, sieve integrals and the smoothed GPY coefficient")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Write data to this file instead of stdout (relative paths resolve
    /// under $SMOOTHSIEVE_OUT_DIR when set).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: $SMOOTHSIEVE_THREADS, else all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Weighted sum M_g(x, m, q) or its z-smooth restriction.
    Sum(SumArgs),
    /// Singular series S(q), or the normalization prod (1 - g)(1 - 1/p)^{-k}.
    Sseries(SseriesArgs),
    /// Tabulate f(u; k, m).
    F(FArgs),
    /// Iterated integrals I_s(t, v).
    #[command(name = "I")]
    #[serde(rename = "I")]
    I(IArgs),
    /// Admissible-tuple data.
    Tuple(TupleArgs),
    /// Smoothed GPY coefficient for one parameter set.
    Zhang(ZhangArgs),
    /// Coefficient over a (k, m) grid.
    Scan(ScanArgs),
    /// Convergence and identity checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SumArgs {
    /// Built-in function, e.g. one_over_n, k_over_p(2), signed_mu_times(one_over_phi).
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value_t = 0)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    /// Restrict to prime factors < z.
    #[arg(long)]
    pub z: Option<f64>,
    /// Also compute the exact rational value (m = 0 only).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SseriesArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Evaluate prod_p (1 - g(p))(1 - 1/p)^{-k} instead.
    #[arg(long)]
    pub normalization: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct FArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k: i64,
    #[arg(long)]
    pub m: i64,
    #[arg(long)]
    pub u_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct IArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub m: u32,
    /// Global u inside f(u x t; -s, m).
    #[arg(long)]
    pub u: f64,
    /// Table extent in v (default max(u, 1)).
    #[arg(long)]
    pub v_max: Option<f64>,
    /// Evaluate at one point instead of listing the table nodes.
    #[arg(long, requires = "v")]
    pub t: Option<f64>,
    #[arg(long, requires = "t")]
    pub v: Option<f64>,
    #[arg(long, default_value_t = 33)]
    pub n_t: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, args = ["first_k", "offsets"])]
pub struct TupleArgs {
    /// The first k primes greater than k, normalized to start at 0.
    #[arg(long)]
    pub first_k: Option<usize>,
    /// Explicit offsets, comma separated.
    #[arg(long, allow_negative_numbers = true)]
    pub offsets: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ZhangArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 2)]
    pub k_min: u32,
    #[arg(long)]
    pub k_max: u32,
    #[arg(long, default_value_t = 3)]
    pub m_min: u32,
    #[arg(long)]
    pub m_max: u32,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Theorem1,
    Theorem2,
    Buchstab,
    Weight,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long, default_value = "one_over_n")]
    pub spec: String,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    /// Smoothing exponent for theorem2 (z = x^{1/u}).
    #[arg(long, default_value_t = 2.0)]
    pub u: f64,
    /// Comma-separated x ladder (default 1e4,1e5,1e6,1e7).
    #[arg(long)]
    pub x: Option<String>,
    /// Append x = 1e8 to the default ladder.
    #[arg(long)]
    pub extended: bool,
    /// Buchstab suite size.
    #[arg(long, default_value_t = 50)]
    pub cases: usize,
    /// Largest x in the Buchstab suite.
    #[arg(long, default_value_t = 1e5)]
    pub x_max: f64,
    /// Coefficients of G(t) = g0 + g1 t + ... for the weight check.
    #[arg(long, default_value = "1")]
    pub g: String,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(Error::TolUnreachable { .. } | Error::NonConvergent(_)) => EXIT_TOLERANCE,
            CliError::Compute(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Result of a subcommand: data plus the status it implies.
struct Run {
    output: Output,
    code: i32,
}

impl Run {
    fn ok(output: Output) -> Self {
        Self { output, code: 0 }
    }
}

/// Appends `--key value` for every config entry whose flag is not already
/// present, so explicit flags win.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
    let mut merged = args;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config {path}:{}: expected key=value", n + 1)))?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let present = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present {
            continue;
        }
        match value.trim() {
            "true" => merged.push(flag.into()),
            "false" => {}
            v => {
                merged.push(flag.into());
                merged.push(v.into());
            }
        }
    }
    Ok(merged)
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let (sink, code): (&mut dyn Write, i32) = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (stdout, 0),
                _ => (stderr, EXIT_USAGE),
            };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

fn thread_count(cli: &Cli) -> Result<usize, CliError> {
    if let Some(n) = cli.threads {
        return Ok(n);
    }
    match std::env::var(ENV_THREADS) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{ENV_THREADS}={v} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn output_path(out: &Path) -> PathBuf {
    match std::env::var_os(ENV_OUT_DIR) {
        Some(dir) if out.is_relative() => Path::new(&dir).join(out),
        _ => out.to_path_buf(),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let threads = thread_count(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let mut run = pool.install(|| dispatch(cli))?;
    run.output.meta = meta_for(cli).into_iter().chain(run.output.meta).collect();
    match &cli.out {
        Some(path) => {
            let path = output_path(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
            run.output.write(cli.format, &mut file)?;
            file.flush()?;
        }
        None => run.output.write(cli.format, stdout)?,
    }
    Ok(run.code)
}

/// The resolved configuration, sorted by key; thread count and config path
/// are excluded so output does not depend on them.
fn meta_for(cli: &Cli) -> Vec<(String, Value)> {
    let value = serde_json::to_value(cli).expect("config serializes");
    let Value::Object(map) = value else { unreachable!("struct serializes to an object") };
    let mut pairs: Vec<(String, Value)> = map
        .into_iter()
        .map(|(k, v)| match v {
            Value::Number(n) if n.is_f64() => (k, real_json(n.as_f64().expect("f64"))),
            other => (k, other),
        })
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    pairs
}

fn dispatch(cli: &Cli) -> Result<Run, CliError> {
    match &cli.command {
        Command::Sum(a) => cmd_sum(a),
        Command::Sseries(a) => cmd_sseries(a),
        Command::F(a) => cmd_f(a),
        Command::I(a) => cmd_i(a),
        Command::Tuple(a) => cmd_tuple(a),
        Command::Zhang(a) => cmd_zhang(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Verify(a) => cmd_verify(a, cli.seed),
    }
}

fn spec(text: &str) -> Result<MultFuncSpec, CliError> {
    MultFuncSpec::builtin(text).map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_sum(a: &SumArgs) -> Result<Run, CliError> {
    let g = spec(&a.spec)?;
    if a.exact && a.m != 0 {
        return Err(CliError::Usage("--exact requires --m 0".into()));
    }
    let z = a.z.unwrap_or(f64::INFINITY);
    let mut table = Table::new(&["spec", "x", "m", "q", "z", "value", "terms", "exact"]);
    let (value, terms, exact) = if a.exact {
        let r = m_sum_exact(&g, a.x, a.q, z)?;
        (r.value, r.terms, r.exact_value.as_ref().map(fmt_rational))
    } else {
        let r = m_sum_smooth::<f64>(&g, a.x, a.m, a.q, z)?;
        (r.value, r.terms, None)
    };
    table.push(vec![
        g.name().into(),
        a.x.into(),
        a.m.into(),
        a.q.into(),
        a.z.map_or(Cell::Empty, Cell::Real),
        value.into(),
        terms.into(),
        exact.map_or(Cell::Empty, Cell::Text),
    ]);
    Ok(Run::ok(Output::new(table)))
}

fn cmd_sseries(a: &SseriesArgs) -> Result<Run, CliError> {
    let g = spec(&a.spec)?;
    let p = if a.normalization { a_normalization(&g, a.tol)? } else { singular_series(&g, a.q, a.tol)? };
    let mut table = Table::new(&["spec", "q", "variant", "value", "truncation", "error_bound"]);
    let variant = if a.normalization { "normalization" } else { "singular_series" };
    table.push(vec![
        g.name().into(),
        a.q.into(),
        variant.into(),
        p.value.into(),
        p.truncation.into(),
        p.error_bound.into(),
    ]);
    Ok(Run::ok(Output::new(table)))
}

fn cmd_f(a: &FArgs) -> Result<Run, CliError> {
    if !(a.step > 0.0) {
        return Err(CliError::Usage("--step must be positive".into()));
    }
    let sol = solve_f::<f64>(a.k, a.m, a.u_max, a.tol)?;
    let mut table = Table::new(&["u", "f", "f_prime"]);
    let n = (a.u_max / a.step + 1e-9).floor() as usize;
    let mut us: Vec<f64> = (0..=n).map(|i| i as f64 * a.step).collect();
    if us.last().is_some_and(|&u| u < a.u_max - 1e-12) {
        us.push(a.u_max);
    }
    for u in us {
        let u = u.min(a.u_max);
        let d = if u > 0.0 { Cell::Real(sol.derivative(u)?) } else { Cell::Empty };
        table.push(vec![u.into(), sol.eval(u)?.into(), d]);
    }
    let mut output = Output::new(table);
    output.meta.push(("achieved_residual".into(), real_json(sol.achieved_residual())));
    Ok(Run::ok(output))
}

fn cmd_i(a: &IArgs) -> Result<Run, CliError> {
    let kernel = SieveKernel::<f64>::new(a.s, a.m, a.u, (a.tol * 1e-2).max(1e-13))?;
    let v_max = a.v_max.unwrap_or(a.u).max(1.0);
    let tab = build_table(&kernel, v_max, a.n_t, a.tol)?;
    let mut table = Table::new(&["s", "m", "u", "t", "v", "value", "ln_value"]);
    let l = kernel.log_scale();
    let points: Vec<(f64, f64, f64)> = match (a.t, a.v) {
        (Some(t), Some(v)) => vec![(t, v, tab.eval_scaled(t, v)?)],
        _ => tab.nodes(),
    };
    for (t, v, scaled) in points {
        let ln = if scaled > 0.0 { scaled.ln() + l } else { f64::NEG_INFINITY };
        table.push(vec![a.s.into(), a.m.into(), a.u.into(), t.into(), v.into(), (scaled * l.exp()).into(), ln.into()]);
    }
    let mut output = Output::new(table);
    output.meta.push(("n_t_used".into(), Value::from(tab.n_t())));
    output.meta.push(("error_estimate".into(), real_json(tab.error_estimate())));
    Ok(Run::ok(output))
}

fn cmd_tuple(a: &TupleArgs) -> Result<Run, CliError> {
    let tuple = match (&a.first_k, &a.offsets) {
        (Some(k), _) => zhang::first_k_tuple(*k)?,
        (None, Some(text)) => {
            let offsets = text
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("bad offsets `{text}`: {e}")))?;
            TupleSpec::new(offsets)?
        }
        (None, None) => unreachable!("clap group requires one"),
    };
    let admissible = zhang::is_admissible(&tuple);
    let series = zhang::tuple_singular_series(&tuple, a.tol)?;
    let mut table = Table::new(&["offsets", "k", "diameter", "admissible", "singular_series", "error_bound"]);
    table.push(vec![
        tuple.offsets_csv().into(),
        (tuple.k() as u64).into(),
        tuple.diameter().into(),
        admissible.into(),
        series.value.into(),
        series.error_bound.into(),
    ]);
    Ok(Run::ok(Output::new(table)))
}

fn cmd_zhang(a: &ZhangArgs) -> Result<Run, CliError> {
    let params = SieveParams::new(a.k, a.m, a.theta, a.delta)?;
    let r = zhang::zhang_coefficient(&params, a.tol)?;
    let mut table = Table::new(&[
        "k", "m", "theta", "delta", "u", "I_k", "I_km1", "first_term", "coefficient", "margin", "cancellation",
        "table_error", "experimental", "assumption",
    ]);
    table.push(vec![
        a.k.into(),
        a.m.into(),
        a.theta.into(),
        a.delta.into(),
        r.u.into(),
        r.i_k.into(),
        r.i_km1.into(),
        r.first_term.into(),
        r.coefficient.into(),
        r.margin.into(),
        r.cancellation.into(),
        r.table_error.into(),
        r.experimental.into(),
        r.assumption.into(),
    ]);
    let mut params_json = Map::new();
    params_json.insert("k".into(), Value::from(a.k));
    params_json.insert("m".into(), Value::from(a.m));
    params_json.insert("theta".into(), real_json(a.theta));
    params_json.insert("delta".into(), real_json(a.delta));
    params_json.insert("u".into(), real_json(r.u));
    let mut doc = Map::new();
    doc.insert("params".into(), Value::Object(params_json));
    doc.insert("I_k".into(), real_json(r.i_k));
    doc.insert("I_{k-1}".into(), real_json(r.i_km1));
    doc.insert("ln_I_k".into(), real_json(r.ln_i_k));
    doc.insert("ln_I_{k-1}".into(), real_json(r.ln_i_km1));
    doc.insert("first_term".into(), real_json(r.first_term));
    doc.insert("coefficient".into(), real_json(r.coefficient));
    doc.insert("margin".into(), real_json(r.margin));
    doc.insert("cancellation".into(), real_json(r.cancellation));
    doc.insert("table_error".into(), real_json(r.table_error));
    doc.insert("experimental".into(), Value::from(r.experimental));
    doc.insert("assumption".into(), Value::from(r.assumption));
    let mut output = Output::new(table);
    output.json = Some(Value::Object(doc));
    Ok(Run::ok(output))
}

fn cmd_scan(a: &ScanArgs) -> Result<Run, CliError> {
    let cells = zhang::scan(a.k_min..=a.k_max, a.m_min..=a.m_max, a.theta, a.delta, a.tol)?;
    let mut table = Table::new(&[
        "k", "m", "status", "u", "I_k", "I_km1", "coefficient", "sign", "margin", "cancellation", "table_error", "reason",
    ]);
    let mut failed = false;
    for cell in &cells {
        let (k, m) = cell.km();
        let row = match cell {
            ScanCell::Ok { report: r, .. } => vec![
                k.into(),
                m.into(),
                "ok".into(),
                r.u.into(),
                r.i_k.into(),
                r.i_km1.into(),
                r.coefficient.into(),
                (r.sign() as i64).into(),
                r.margin.into(),
                r.cancellation.into(),
                r.table_error.into(),
                Cell::Empty,
            ],
            ScanCell::Rejected { reason, .. } | ScanCell::Failed { reason, .. } => {
                let status = if matches!(cell, ScanCell::Failed { .. }) {
                    failed = true;
                    "failed"
                } else {
                    "rejected"
                };
                let mut row = vec![k.into(), m.into(), status.into()];
                row.extend(std::iter::repeat(Cell::Empty).take(8));
                row.push(reason.as_str().into());
                row
            }
        };
        table.push(row);
    }
    let mut output = Output::new(table);
    output.meta.push(("assumption".into(), Value::from(zhang::ASSUMPTION)));
    Ok(Run { output, code: if failed { EXIT_TOLERANCE } else { 0 } })
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("bad {what} list `{text}`: {e}")))
}

fn report_output(r: &verify::ConvergenceReport) -> Output {
    let mut table = Table::new(&["x", "exact", "predicted", "ratio", "residual"]);
    for row in &r.rows {
        table.push(vec![row.x.into(), row.exact.into(), row.predicted.into(), row.ratio.into(), row.residual.into()]);
    }
    let mut output = Output::new(table);
    output.meta.push(("result.verdict".into(), Value::from(r.verdict)));
    output.meta.push(("result.non_monotone_steps".into(), Value::from(r.non_monotone_steps)));
    output.meta.push(("result.slope".into(), r.slope.map_or(Value::Null, real_json)));
    output
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> Result<Run, CliError> {
    let xs = match &a.x {
        Some(text) => parse_list(text, "x")?,
        None => verify::x_ladder(a.extended),
    };
    let (output, ok) = match a.check {
        Check::Theorem1 => {
            let r = verify::check_theorem1(&spec(&a.spec)?, a.m, a.q, &xs)?;
            (report_output(&r), r.verdict)
        }
        Check::Theorem2 => {
            let r = verify::check_theorem2(&spec(&a.spec)?, a.m, a.q, a.u, &xs)?;
            (report_output(&r), r.verdict)
        }
        Check::Weight => {
            let g = parse_list(&a.g, "G coefficient")?;
            let r = verify::check_weight_lemma(&spec(&a.spec)?, &g, &xs)?;
            (report_output(&r), r.verdict)
        }
        Check::Buchstab => {
            let cases = verify::buchstab_suite(seed, a.cases, a.x_max)?;
            let mut table = Table::new(&["spec", "x", "q", "z", "m", "residual", "relative"]);
            let mut ok = true;
            for c in &cases {
                ok &= c.relative < 1e-10;
                table.push(vec![
                    c.spec.as_str().into(),
                    c.x.into(),
                    c.q.into(),
                    c.z.into(),
                    c.m.into(),
                    c.residual.into(),
                    c.relative.into(),
                ]);
            }
            let mut output = Output::new(table);
            output.meta.push(("result.verdict".into(), Value::from(ok)));
            (output, ok)
        }
    };
    Ok(Run { output, code: if ok { 0 } else { EXIT_VERIFY } })
}
