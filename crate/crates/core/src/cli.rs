//! Command-line front end: argument parsing, per-level fan-out, caching and
//! output framing. Every output starts with the serialized run configuration.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cache::{Cache, CACHE_ENV};
use crate::error::{arg_err, Error, Result};
use crate::ff::nt::{is_prime, level_ladder, primes_up_to};
use crate::lvalue::{harmonic_check, harmonic_weights_with, WeightNorm, DEFAULT_X};
use crate::mult::{
    bound_at_level, bound_eval, degree_partition, form_degrees, mult_csv, mult_rows, multiplicities, BoundKind,
    BoundParams, BoundReport, PRIME_CAP,
};
use crate::output::{fmt_f64, fmt_rational};
use crate::plancherel::{inner_table, UPoly, DEFAULT_NODES};
use crate::smooth::{ht_approx, is_supersmooth, parse_big, phi_count, psi_exact, smooth_csv, smooth_row, AlphaMode};
use crate::spectra::{eig::DEFAULT_TOL, eig_sym, Level};
use crate::ssgraph::graph::check_graph_params;
use crate::ssgraph::modpoly::{derive_modular_poly, modular_poly, render_data_file, SUPPORTED_LEVELS};
use crate::verify::{covered, eq_one_check, median, rows_csv, thm1_check, thm1_grid, thm2_check, ReportRow};
use crate::walk::{cutoff_csv, cutoff_profile};

#[derive(Parser, Debug)]
#[command(name = "heckelab", version, about = "Hecke eigensystems from supersingular isogeny graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build one isogeny graph and list its spectrum.
    Graph(GraphArgs),
    /// Simultaneous Hecke eigenvalues at each level.
    Spectra(SpectraArgs),
    /// Averages of lambda_f(m) lambda_f(n) against the divisor main term.
    Thm1(Thm1Args),
    /// Averages of lambda_f(n) against the square-class main term.
    Eq1(Eq1Args),
    /// Joint equidistribution against the product of local measures.
    Thm2(Thm2Args),
    /// Non-backtracking walk variance and cutoff profile.
    Walk(WalkArgs),
    /// Smooth-number counts and their saddle-point estimates.
    Smooth(SmoothArgs),
    /// Eigenvalue-tuple multiplicities, Hecke-field degrees and bounds.
    Mult(MultArgs),
    /// Smoothed symmetric-square L-values and harmonic weights.
    Lvalue(LvalueArgs),
    /// Recompute the bundled modular polynomial table.
    RegenModpoly(RegenArgs),
    /// Closed-form versus quadrature inner products of U_m, U_n.
    Plancherel(PlancherelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Seed for randomized root finding.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format; json when --out ends in .json, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cache directory for graphs and spectra.
    #[arg(long, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Record the generation time in the output header.
    #[arg(long)]
    #[serde(skip)]
    pub timestamps: bool,
    /// Worker threads for per-level work.
    #[arg(long)]
    #[serde(skip)]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LevelArgs {
    /// A single level, prime and 1 mod 12.
    #[arg(long, conflicts_with = "ladder")]
    pub p: Option<u64>,
    /// Every prime 1 mod 12 in [13, BOUND].
    #[arg(long, value_name = "BOUND", num_args = 0..=1, default_missing_value = "2000")]
    pub ladder: Option<u64>,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p", "ladder"])]
    pub levels: Vec<u64>,
}

impl LevelArgs {
    fn resolve(&self) -> Result<Vec<u64>> {
        let levels = match (self.p, self.ladder) {
            (Some(p), _) => vec![p],
            (None, Some(b)) => level_ladder(b),
            (None, None) if !self.levels.is_empty() => self.levels.clone(),
            _ => return arg_err("give --p, --ladder or --levels"),
        };
        if levels.is_empty() {
            return arg_err("no levels in range");
        }
        for &p in &levels {
            check_graph_params(p, 2)?;
        }
        Ok(levels)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GraphArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 2)]
    pub ell: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct SpectraArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
    pub primes: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct Thm1Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long, requires = "n")]
    pub m: Option<u64>,
    #[arg(long, requires = "m")]
    pub n: Option<u64>,
    /// Side of the (m, n) grid when no single pair is given.
    #[arg(long, default_value_t = 30)]
    pub grid: u64,
    /// One row per level: median ratio over the grid and the (1,1) residual.
    #[arg(long)]
    pub summary: bool,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11,13")]
    pub primes: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct Eq1Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    /// Indices to check (default: every covered n up to --nmax).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 30)]
    pub nmax: u64,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11,13")]
    pub primes: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct Thm2Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub primes: Vec<u64>,
    /// Terms `e1,e2,...:coeff` separated by `;` (default: U_1 in every variable).
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct WalkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long, default_value_t = 2)]
    pub ell: u64,
    #[arg(long, default_value_t = 1)]
    pub tmin: u32,
    #[arg(long, default_value_t = 10)]
    pub tmax: u32,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Asymptotic,
    Saddle,
}

#[derive(Args, Debug, Serialize)]
pub struct SmoothArgs {
    /// Upper limits, e.g. `20`, `10^12`, `1e12`; comma-separated.
    #[arg(long = "X", value_delimiter = ',')]
    #[serde(rename = "X")]
    pub x: Vec<String>,
    /// Smoothness bounds; comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub y: Vec<u64>,
    /// Exact counts only.
    #[arg(long)]
    pub psi: bool,
    /// Count integers composed of these primes instead.
    #[arg(long, value_delimiter = ',')]
    pub phi: Vec<u64>,
    /// Only the Hildebrand-Tenenbaum estimate with this choice of alpha.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Super-smoothness of the level --n.
    #[arg(long, requires = "n")]
    pub supersmooth: bool,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long = "T", default_value_t = 2)]
    #[serde(rename = "T")]
    pub t: u32,
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct MultArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long, default_value_t = 7)]
    pub y: u64,
    /// Attach Hecke-field degrees to the tuple rows.
    #[arg(long)]
    pub degrees: bool,
    /// One row per level with the Hecke-field degree partition.
    #[arg(long, conflicts_with = "bound")]
    pub partition: bool,
    /// Prime whose Hecke operator is factored first.
    #[arg(long, default_value_t = 2)]
    pub ell0: u64,
    /// Closed-form bound to evaluate: thm3, thm4 or thm5.
    #[arg(long, value_parser = parse_bound_kind)]
    pub bound: Option<BoundKind>,
    #[arg(long, default_value = "1/4")]
    pub beta: String,
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    #[arg(long = "T", default_value_t = 2)]
    #[serde(rename = "T")]
    pub t: u32,
    /// Evaluate the bound at this log N without computing a level.
    #[arg(long, requires = "bound")]
    pub log_n: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    Dimension,
    Index,
}

#[derive(Args, Debug, Serialize)]
pub struct LvalueArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long, default_value_t = DEFAULT_X)]
    pub x: u64,
    #[arg(long, value_enum, default_value = "dimension")]
    pub norm: NormArg,
    /// With --n: harmonic averages of lambda_f(m) lambda_f(n) instead of weights.
    #[arg(long, value_delimiter = ',', requires = "n")]
    pub m: Vec<u64>,
    #[arg(long, value_delimiter = ',', requires = "m")]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11,13")]
    pub primes: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct RegenArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11,13")]
    pub ell: Vec<u64>,
    /// Fail unless the recomputed table equals the bundled one.
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct PlancherelArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11")]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = 12)]
    pub max: u32,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn parse_bound_kind(s: &str) -> std::result::Result<BoundKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses argv, runs the command and returns the process exit code:
/// 0 on success, 1 on argument errors, 2 on computation errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Coverage(_) => 1,
        _ => 2,
    }
}

/// Result of one command before framing.
struct Output {
    csv: String,
    /// Replaces the row array in JSON output.
    json: Option<Map<String, Value>>,
    levels: Option<Vec<u64>>,
}

impl Output {
    fn csv(csv: String) -> Self {
        Output { csv, json: None, levels: None }
    }

    fn with_levels(mut self, levels: Vec<u64>) -> Self {
        self.levels = Some(levels);
        self
    }
}

struct Ctx {
    cache: Cache,
    seed: u64,
    jobs: usize,
}

impl Ctx {
    fn new(common: &Common) -> Self {
        let jobs =
            common.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1);
        Ctx { cache: Cache::new(common.cache_dir.clone()), seed: common.seed, jobs }
    }

    fn level(&self, p: u64, primes: &[u64]) -> Result<Level> {
        self.cache.level(p, primes, self.seed)
    }

    /// Runs `f` on every level in parallel, in level order. Levels without
    /// cusp forms are skipped when `need_forms` and more than one level is
    /// requested.
    fn per_level<R: Send>(
        &self,
        levels: &[u64],
        primes: &[u64],
        need_forms: bool,
        f: impl Fn(&Level) -> Result<R> + Sync,
    ) -> Result<Vec<R>> {
        let skip_empty = need_forms && levels.len() > 1;
        let results = par_map(levels, self.jobs, |&p| {
            let lv = self.level(p, &primes_for(p, primes))?;
            if skip_empty && lv.system.s() == 0 {
                warn!("level {p} has no cusp forms; skipped");
                return Ok(None);
            }
            f(&lv).map(Some)
        })?;
        Ok(results.into_iter().flatten().collect())
    }
}

/// Order-preserving parallel map; stops at the first error in item order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<R>>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.min(items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot is filled")).collect()
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Graph(a) => &a.common,
        Command::Spectra(a) => &a.common,
        Command::Thm1(a) => &a.common,
        Command::Eq1(a) => &a.common,
        Command::Thm2(a) => &a.common,
        Command::Walk(a) => &a.common,
        Command::Smooth(a) => &a.common,
        Command::Mult(a) => &a.common,
        Command::Lvalue(a) => &a.common,
        Command::RegenModpoly(a) => &a.common,
        Command::Plancherel(a) => &a.common,
    }
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<()> {
    let common = common_of(cmd);
    let format = common.format.unwrap_or_else(|| {
        match common.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    });
    let ctx = Ctx::new(common);
    let output = match cmd {
        Command::Graph(a) => cmd_graph(&ctx, a)?,
        Command::Spectra(a) => cmd_spectra(&ctx, a)?,
        Command::Thm1(a) => cmd_thm1(&ctx, a)?,
        Command::Eq1(a) => cmd_eq1(&ctx, a)?,
        Command::Thm2(a) => cmd_thm2(&ctx, a)?,
        Command::Walk(a) => cmd_walk(&ctx, a)?,
        Command::Smooth(a) => cmd_smooth(a)?,
        Command::Mult(a) => cmd_mult(&ctx, a)?,
        Command::Lvalue(a) => cmd_lvalue(&ctx, a)?,
        Command::RegenModpoly(a) => cmd_regen(a)?,
        Command::Plancherel(a) => cmd_plancherel(a)?,
    };
    let config = run_config(cmd, format, output.levels.as_deref())?;
    let text = frame(&output, &config, format, common.timestamps)?;
    match &common.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// The serialized run configuration written at the top of every output.
pub fn run_config(cmd: &Command, format: Format, levels: Option<&[u64]>) -> Result<Value> {
    let mut v = serde_json::to_value(cmd)?;
    let map = v.as_object_mut().expect("commands serialize to objects");
    map.insert("tool".into(), json!("heckelab"));
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("format".into(), serde_json::to_value(format)?);
    if let Some(levels) = levels {
        map.insert("levels".into(), json!(levels));
    }
    Ok(v)
}

fn unix_time() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn frame(output: &Output, config: &Value, format: Format, timestamps: bool) -> Result<String> {
    match format {
        Format::Csv => {
            let mut s = format!("# {}\n", serde_json::to_string(config)?);
            if timestamps {
                s.push_str(&format!("# generated_unix={}\n", unix_time()));
            }
            s.push_str(&output.csv);
            Ok(s)
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("config".into(), config.clone());
            if timestamps {
                doc.insert("generated_unix".into(), json!(unix_time()));
            }
            match &output.json {
                Some(extra) => doc.extend(extra.clone()),
                None => {
                    doc.insert("rows".into(), csv_to_json(&output.csv)?);
                }
            }
            Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
        }
    }
}

fn json_scalar(s: &str) -> Value {
    if s.is_empty() || s == "NA" {
        return Value::Null;
    }
    if let Ok(i) = s.parse::<i64>() {
        return json!(i);
    }
    if s.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
        return json!(s);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && !s.contains('/') => json!(x),
        _ => json!(s),
    }
}

/// CSV body as an array of objects; numeric fields become JSON numbers.
pub fn csv_to_json(text: &str) -> Result<Value> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let obj: Map<String, Value> = header.iter().cloned().zip(rec.iter().map(json_scalar)).collect();
        rows.push(Value::Object(obj));
    }
    Ok(Value::Array(rows))
}

/// Joins CSV bodies that share a header.
fn concat_csv(parts: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, part) in parts.into_iter().enumerate() {
        if i == 0 {
            out.push_str(&part);
        } else if let Some((_, rest)) = part.split_once('\n') {
            out.push_str(rest);
        }
    }
    out
}

fn write_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn check_primes(primes: &[u64]) -> Result<()> {
    if primes.is_empty() {
        return arg_err("at least one prime is required");
    }
    for (i, q) in primes.iter().enumerate() {
        if !SUPPORTED_LEVELS.contains(q) || primes[..i].contains(q) {
            return arg_err(format!("primes must be distinct members of {SUPPORTED_LEVELS:?}, got {primes:?}"));
        }
    }
    Ok(())
}

/// Requested primes minus the level itself.
fn primes_for(p: u64, primes: &[u64]) -> Vec<u64> {
    primes.iter().copied().filter(|&q| q != p).collect()
}

fn cmd_graph(ctx: &Ctx, a: &GraphArgs) -> Result<Output> {
    check_graph_params(a.p, a.ell)?;
    let g = ctx.cache.graph(a.p, a.ell, ctx.seed)?;
    let adj: Vec<Vec<f64>> = g.adjacency.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let mut spectrum = eig_sym(&adj, DEFAULT_TOL)?.values;
    spectrum.reverse();
    let csv = write_table(
        &["p", "ell", "index", "eigenvalue"],
        spectrum.iter().enumerate().map(|(i, v)| vec![g.p.to_string(), g.ell.to_string(), i.to_string(), fmt_f64(*v)]),
    )?;
    let mut json = Map::new();
    json.insert("graph".into(), serde_json::to_value(&g)?);
    json.insert("spectrum".into(), json!(spectrum));
    Ok(Output { csv, json: Some(json), levels: None })
}

fn cmd_spectra(ctx: &Ctx, a: &SpectraArgs) -> Result<Output> {
    let levels = a.levels.resolve()?;
    level_primes(&levels, &a.primes)?;
    let parts = ctx.per_level(&levels, &a.primes, false, |lv| {
        let table = lv.system.to_csv()?;
        let mut out = String::new();
        for (i, line) in table.lines().enumerate() {
            let prefix = if i == 0 { "p".to_string() } else { lv.p.to_string() };
            out.push_str(&format!("{prefix},{line}\n"));
        }
        Ok(out)
    });
    Ok(Output::csv(concat_csv(parts?)).with_levels(levels))
}

fn level_primes(levels: &[u64], primes: &[u64]) -> Result<()> {
    check_primes(primes)?;
    if levels.len() == 1 && primes.len() == 1 && primes[0] == levels[0] {
        return arg_err("the level coincides with the Hecke prime");
    }
    Ok(())
}

fn cmd_thm1(ctx: &Ctx, a: &Thm1Args) -> Result<Output> {
    let levels = a.levels.resolve()?;
    level_primes(&levels, &a.primes)?;
    if a.summary && a.m.is_some() {
        return arg_err("--summary applies to the grid, not to a single pair");
    }
    let parts = ctx.per_level(&levels, &a.primes, true, |lv| {
        let es = &lv.system;
        if let (Some(m), Some(n)) = (a.m, a.n) {
            return rows_csv(&[thm1_check(es, m, n)?]);
        }
        let (rows, skipped) = thm1_grid(es, a.grid)?;
        if !a.summary {
            return rows_csv(&rows);
        }
        let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let med = median(&mut ratios).map(fmt_f64).unwrap_or_else(|| "NA".into());
        let r11 =
            rows.iter().find(|r| r.m == "1" && r.n == "1").map(|r| fmt_f64(r.residual)).unwrap_or_else(|| "NA".into());
        write_table(
            &["p", "s", "pairs", "skipped", "median_ratio", "residual_1_1"],
            [vec![lv.p.to_string(), es.s().to_string(), rows.len().to_string(), skipped.to_string(), med, r11]],
        )
    })?;
    Ok(Output::csv(concat_csv(parts)).with_levels(levels))
}

fn cmd_eq1(ctx: &Ctx, a: &Eq1Args) -> Result<Output> {
    let levels = a.levels.resolve()?;
    level_primes(&levels, &a.primes)?;
    let parts = ctx.per_level(&levels, &a.primes, true, |lv| {
        let es = &lv.system;
        let ns: Vec<u64> = if a.n.is_empty() {
            (1..=a.nmax).filter(|&n| n % lv.p != 0 && covered(es, n)).collect()
        } else {
            a.n.clone()
        };
        let rows: Vec<ReportRow> = ns.iter().map(|&n| eq_one_check(es, n)).collect::<Result<_>>()?;
        rows_csv(&rows)
    })?;
    Ok(Output::csv(concat_csv(parts)).with_levels(levels))
}

/// `e1,e2:coeff;...` into a polynomial in the U basis.
pub fn parse_poly(text: &str, arity: usize) -> Result<UPoly> {
    let mut terms = Vec::new();
    for term in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || Error::Argument(format!("cannot parse polynomial term {term:?}; expected e1,e2,...:coeff"));
        let (exps, coeff) = term.split_once(':').ok_or_else(bad)?;
        let exps: Vec<u32> = exps.split(',').map(|e| e.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        if exps.len() != arity {
            return arg_err(format!("term {term:?} has {} exponents for {arity} primes", exps.len()));
        }
        let coeff: f64 = coeff.trim().parse().map_err(|_| bad())?;
        terms.push((exps, coeff));
    }
    if terms.is_empty() {
        return arg_err("empty polynomial");
    }
    let caps = (0..arity).map(|i| terms.iter().map(|(e, _)| e[i]).max().unwrap_or(0)).collect();
    let mut poly = UPoly::new(caps);
    for (e, c) in terms {
        poly.set(e, c)?;
    }
    Ok(poly)
}

fn cmd_thm2(ctx: &Ctx, a: &Thm2Args) -> Result<Output> {
    let levels = a.levels.resolve()?;
    level_primes(&levels, &a.primes)?;
    let poly = match &a.poly {
        Some(text) => parse_poly(text, a.primes.len())?,
        None => UPoly::monomial(vec![1; a.primes.len()], 1.0),
    };
    let parts = ctx.per_level(&levels, &a.primes, true, |lv| {
        let row = thm2_check(&lv.system, &a.primes, &poly, a.eta)?;
        if let Some(flag) = &row.flag {
            warn!("level {}: {flag}", lv.p);
        }
        rows_csv(&[row])
    })?;
    Ok(Output::csv(concat_csv(parts)).with_levels(levels))
}

fn cmd_walk(ctx: &Ctx, a: &WalkArgs) -> Result<Output> {
    let levels = a.levels.resolve()?;
    level_primes(&levels, &[a.ell])?;
    if a.tmin > a.tmax {
        return arg_err("--tmin exceeds --tmax");
    }
    let parts = ctx.per_level(&levels, &[a.ell], false, |lv| {
        let rows = cutoff_profile(lv.graph(a.ell)?, &lv.system, a.tmin..=a.tmax, a.eta)?;
        cutoff_csv(&rows)
    })?;
    Ok(Output::csv(concat_csv(parts)).with_levels(levels))
}

fn cmd_smooth(a: &SmoothArgs) -> Result<Output> {
    if a.supersmooth {
        let n = parse_big(a.n.as_deref().unwrap_or_default())?;
        if a.y.is_empty() {
            return arg_err("--supersmooth needs --y");
        }
        let rows =
            a.y.iter()
                .map(|&y| {
                    let s = is_supersmooth(&n, y, a.t, a.cutoff)?;
                    Ok(vec![
                        n.to_string(),
                        y.to_string(),
                        a.t.to_string(),
                        s.pi_yt_n.to_string(),
                        s.pi_y.to_string(),
                        fmt_f64(s.cutoff),
                        s.flag.to_string(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
        return Ok(Output::csv(write_table(&["N", "y", "T", "pi_yT_N", "pi_y", "cutoff", "supersmooth"], rows)?));
    }
    if a.x.is_empty() {
        return arg_err("--X is required");
    }
    let xs: Vec<_> = a.x.iter().map(|s| parse_big(s)).collect::<Result<_>>()?;
    if !a.phi.is_empty() {
        let qs: Vec<String> = a.phi.iter().map(u64::to_string).collect();
        let rows = xs
            .iter()
            .map(|x| Ok(vec![x.to_string(), qs.join(";"), phi_count(&a.phi, x)?.to_string()]))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Output::csv(write_table(&["X", "primes", "phi"], rows)?));
    }
    if a.y.is_empty() {
        return arg_err("--y is required");
    }
    let pairs: Vec<_> = xs.iter().flat_map(|x| a.y.iter().map(move |&y| (x, y))).collect();
    if a.psi {
        let rows = pairs
            .iter()
            .map(|&(x, y)| Ok(vec![x.to_string(), y.to_string(), psi_exact(y, x)?.to_string()]))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Output::csv(write_table(&["X", "y", "psi_exact"], rows)?));
    }
    if let Some(mode) = a.mode {
        let mode = match mode {
            ModeArg::Asymptotic => AlphaMode::Asymptotic,
            ModeArg::Saddle => AlphaMode::Saddle,
        };
        let rows = pairs
            .iter()
            .map(|&(x, y)| {
                let h = ht_approx(crate::smooth::ln_big(x), y, mode)?;
                if let Some(w) = &h.regime_warning {
                    warn!("X = {x}, y = {y}: {w}");
                }
                Ok(vec![
                    x.to_string(),
                    y.to_string(),
                    fmt_f64(h.alpha),
                    fmt_f64(h.zeta_alpha_y),
                    fmt_f64(h.psi_estimate),
                    fmt_f64(h.log_psi),
                    fmt_f64(h.log_simplified),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Output::csv(write_table(
            &["X", "y", "alpha", "zeta_alpha_y", "psi_ht", "log_psi_ht", "log_simplified"],
            rows,
        )?));
    }
    let rows = pairs.iter().map(|&(x, y)| smooth_row(x, y)).collect::<Result<Vec<_>>>()?;
    Ok(Output::csv(smooth_csv(&rows)?))
}

fn parse_beta(s: &str) -> Result<Rational64> {
    s.trim().parse::<Rational64>().map_err(|_| Error::Argument(format!("cannot parse beta {s:?}; expected a/b")))
}

fn bound_row(level: Option<u64>, r: &BoundReport) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "NA".into());
    vec![
        level.map(|p| p.to_string()).unwrap_or_else(|| "NA".into()),
        serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        fmt_f64(r.log_n),
        fmt_f64(r.y),
        r.beta.clone(),
        r.d.map(|d| d.to_string()).unwrap_or_else(|| "NA".into()),
        r.t.map(|t| t.to_string()).unwrap_or_else(|| "NA".into()),
        r.coefficient.clone(),
        fmt_f64(r.bound_factor),
        opt(r.bound_value),
        r.empirical.map(|e| e.to_string()).unwrap_or_else(|| "NA".into()),
        r.vacuous.to_string(),
    ]
}

const BOUND_HEADER: [&str; 12] = [
    "level",
    "kind",
    "log_n",
    "y",
    "beta",
    "d",
    "T",
    "coefficient",
    "bound_factor",
    "bound_value",
    "empirical",
    "vacuous",
];

fn cmd_mult(ctx: &Ctx, a: &MultArgs) -> Result<Output> {
    if let (Some(kind), Some(log_n)) = (a.bound, a.log_n) {
        let params = BoundParams { kind, log_n, beta: parse_beta(&a.beta)?, d: a.d, t: a.t, s: None, empirical: None };
        let report = bound_eval(&params)?;
        return Ok(Output::csv(write_table(&BOUND_HEADER, [bound_row(None, &report)])?));
    }
    let levels = a.levels.resolve()?;
    if a.y > PRIME_CAP {
        return Err(Error::Coverage(format!("y = {} exceeds the largest supported prime {PRIME_CAP}", a.y)));
    }
    let primes: Vec<u64> = primes_up_to(a.y.max(7)).into_iter().filter(|q| SUPPORTED_LEVELS.contains(q)).collect();
    if !primes.contains(&a.ell0) {
        return arg_err(format!("--ell0 must be one of {primes:?}"));
    }
    let parts = ctx.per_level(&levels, &primes, true, |lv| {
        if let Some(kind) = a.bound {
            let report = bound_at_level(lv, kind, parse_beta(&a.beta)?, a.d, a.t, ctx.seed)?;
            return write_table(&BOUND_HEADER, [bound_row(Some(lv.p), &report)]);
        }
        if a.partition {
            let dp = degree_partition(lv, a.ell0, ctx.seed)?;
            if !dp.conclusive {
                warn!("level {}: degree partition inconclusive", lv.p);
            }
            let op: Vec<String> = dp.operator.iter().map(|(q, c)| format!("{q}*{c}")).collect();
            let degs: Vec<String> = dp.degrees.iter().map(usize::to_string).collect();
            return write_table(
                &["level", "s", "operator", "conclusive", "degrees"],
                [vec![
                    lv.p.to_string(),
                    lv.system.s().to_string(),
                    op.join("+"),
                    dp.conclusive.to_string(),
                    degs.join(";"),
                ]],
            );
        }
        let m = multiplicities(&lv.system, a.y)?;
        let fd =
            if a.degrees { Some(form_degrees(&lv.system, &degree_partition(lv, a.ell0, ctx.seed)?)?) } else { None };
        mult_csv(&mult_rows(&m, fd.as_ref()))
    })?;
    Ok(Output::csv(concat_csv(parts)).with_levels(levels))
}

fn cmd_lvalue(ctx: &Ctx, a: &LvalueArgs) -> Result<Output> {
    let levels = a.levels.resolve()?;
    level_primes(&levels, &a.primes)?;
    let norm = match a.norm {
        NormArg::Dimension => WeightNorm::Dimension,
        NormArg::Index => WeightNorm::Index,
    };
    let parts = ctx.per_level(&levels, &a.primes, true, |lv| {
        let w = harmonic_weights_with(&lv.system, a.x, norm)?;
        if w.skipped_terms > 0 {
            log::info!("level {}: {} coefficient terms outside the computed primes", lv.p, w.skipped_terms);
        }
        if !w.nonpositive.is_empty() {
            warn!("level {}: {} forms with non-positive truncated L-value", lv.p, w.nonpositive.len());
        }
        if a.m.is_empty() {
            return w.to_csv();
        }
        let rows: Vec<ReportRow> =
            a.m.iter()
                .flat_map(|&m| a.n.iter().map(move |&n| (m, n)))
                .map(|(m, n)| harmonic_check(&lv.system, &w, m, n))
                .collect::<Result<_>>()?;
        rows_csv(&rows)
    })?;
    Ok(Output::csv(concat_csv(parts)).with_levels(levels))
}

fn cmd_regen(a: &RegenArgs) -> Result<Output> {
    check_primes(&a.ell)?;
    let mut ells = a.ell.clone();
    ells.sort_unstable();
    let polys = ells.iter().map(|&l| derive_modular_poly(l)).collect::<Result<Vec<_>>>()?;
    if a.check {
        for poly in &polys {
            if *poly != modular_poly(poly.ell())? {
                return Err(Error::Data(format!("recomputed Phi_{} differs from the bundled table", poly.ell())));
            }
        }
    }
    let text = render_data_file(&polys);
    let mut json = Map::new();
    json.insert("data".into(), json!(text));
    Ok(Output { csv: text, json: Some(json), levels: None })
}

fn cmd_plancherel(a: &PlancherelArgs) -> Result<Output> {
    if a.primes.iter().any(|&q| !is_prime(q)) {
        return arg_err(format!("--primes must be primes, got {:?}", a.primes));
    }
    let rows = inner_table(&a.primes, a.max, a.nodes)?;
    let csv = write_table(
        &["m", "n", "p", "closed", "quad", "abs_err"],
        rows.iter().map(|r| {
            vec![
                r.m.to_string(),
                r.n.to_string(),
                r.p.to_string(),
                fmt_rational(&r.closed),
                fmt_f64(r.quad),
                fmt_f64(r.abs_err),
            ]
        }),
    )?;
    Ok(Output::csv(csv))
}
