//! Command-line front end.
//!
//! Exit codes: 0 when everything ran and every check passed, 1 when a check
//! failed or a computation errored, 2 for usage errors.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cache::{CacheStatus, Direct, GTableCache, GTableSource};
use crate::criticality::{self, CheckReport, Side};
use crate::error::{Error, Result};
use crate::finiten::{self, LogWeightTable, DEFAULT_MAX_N};
use crate::output::{fmt_f64, fmt_opt};
use crate::thermo::{critical_beta, thermo_point, ModelParams};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "annealed-ising", version, about = "Annealed Ising model on random d-regular graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or reuse cached ln g tables.
    Gtable(ConfigArgs),
    /// Limit quantities over a (beta, B) grid.
    Thermo(ConfigArgs),
    /// Exact finite-n pressure, magnetization and susceptibility over (n, beta, B).
    Finite(ConfigArgs),
    /// Exact law of the scaled total spin for one (n, beta, B).
    Spinlaw(ConfigArgs),
    /// Run a verification suite and emit a JSON report.
    Verify(ConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Taylor,
    Exponents,
    Jump,
    Scaling,
    Finiten,
    Matching,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
        f.write_str(&name)
    }
}

/// `β` or `B` value: a number, or `bc`, `bc+x`, `bc-x` relative to the critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueExpr {
    pub relative: bool,
    pub offset: f64,
}

impl ValueExpr {
    pub fn resolve(&self, beta_c: f64) -> f64 {
        if self.relative {
            beta_c + self.offset
        } else {
            self.offset
        }
    }
}

impl FromStr for ValueExpr {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let bad = || format!("cannot parse '{s}' as a number or bc[+-]x");
        if let Some(rest) = s.strip_prefix("bc") {
            let offset = match rest.chars().next() {
                None => 0.0,
                Some('+') => rest[1..].parse().map_err(|_| bad())?,
                Some('-') => -rest[1..].parse::<f64>().map_err(|_| bad())?,
                _ => return Err(bad()),
            };
            return Ok(Self { relative: true, offset });
        }
        s.parse().map(|offset| Self { relative: false, offset }).map_err(|_| bad())
    }
}

/// `a:b:steps`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeExpr {
    pub lo: ValueExpr,
    pub hi: ValueExpr,
    pub steps: usize,
}

impl FromStr for RangeExpr {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range '{s}' must look like a:b:steps"));
        }
        let steps: usize = parts[2].parse().map_err(|_| format!("bad step count in '{s}'"))?;
        if steps == 0 {
            return Err(format!("range '{s}' is empty"));
        }
        Ok(Self { lo: parts[0].parse()?, hi: parts[1].parse()?, steps })
    }
}

impl RangeExpr {
    /// Grid points; geometric spacing applies to offsets from `β_c` when both ends are relative.
    pub fn expand(&self, beta_c: f64, spacing: Spacing) -> Result<Vec<f64>> {
        let k = self.steps;
        let lin = |a: f64, b: f64| -> Vec<f64> {
            if k == 1 {
                return vec![a];
            }
            (0..k).map(|i| if i + 1 == k { b } else { a + (b - a) * i as f64 / (k - 1) as f64 }).collect()
        };
        let geo = |a: f64, b: f64| -> Result<Vec<f64>> {
            if !(a * b > 0.0) {
                return Err(Error::Domain(format!("geometric range needs endpoints of one sign, got {a} and {b}")));
            }
            let mut v: Vec<f64> = lin(a.abs().ln(), b.abs().ln()).into_iter().map(|x| a.signum() * x.exp()).collect();
            v[0] = a;
            if k > 1 {
                v[k - 1] = b;
            }
            Ok(v)
        };
        match spacing {
            Spacing::Linear => Ok(lin(self.lo.resolve(beta_c), self.hi.resolve(beta_c))),
            Spacing::Geometric if self.lo.relative && self.hi.relative => {
                Ok(geo(self.lo.offset, self.hi.offset)?.into_iter().map(|x| beta_c + x).collect())
            }
            Spacing::Geometric => geo(self.lo.resolve(beta_c), self.hi.resolve(beta_c)),
        }
    }
}

/// Flags shared by every subcommand; each command uses the subset it needs.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Vertex degree.
    #[arg(long)]
    pub d: Option<u32>,
    /// Inverse temperature: a number, `bc`, or `bc+x` / `bc-x`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "beta_range")]
    pub beta: Option<ValueExpr>,
    /// `a:b:steps`; endpoints accept the same forms as --beta.
    #[arg(long = "beta-range", allow_hyphen_values = true)]
    pub beta_range: Option<RangeExpr>,
    /// External field.
    #[arg(long = "B", allow_hyphen_values = true, conflicts_with = "field_range")]
    pub field: Option<f64>,
    /// `a:b:steps`.
    #[arg(long = "B-range", allow_hyphen_values = true)]
    pub field_range: Option<RangeExpr>,
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated sizes.
    #[arg(long = "n-list", value_delimiter = ',', num_args = 1..)]
    pub n_list: Option<Vec<usize>>,
    /// Largest accepted n.
    #[arg(long = "max-n", default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Table cache directory; $ANNEALED_ISING_CACHE takes precedence.
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    pub spacing: Spacing,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for the Monte Carlo matching check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Verification suite.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d: Option<u32>,
    pub betas: Vec<f64>,
    pub fields: Vec<f64>,
    pub ns: Vec<usize>,
    pub cache: Option<GTableCache>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub seed: u64,
    pub suite: Option<Suite>,
}

impl RunConfig {
    pub fn from_args(args: &ConfigArgs) -> Result<Self> {
        if let Some(0) = args.threads {
            return Err(Error::Domain("--threads must be positive".into()));
        }
        let beta_c = match args.d {
            Some(d) => {
                let bc = critical_beta(d)?;
                Some(bc)
            }
            None => None,
        };
        let needs_bc = |e: &ValueExpr| e.relative;
        let uses_bc = args.beta.as_ref().is_some_and(needs_bc)
            || args.beta_range.as_ref().is_some_and(|r| needs_bc(&r.lo) || needs_bc(&r.hi));
        let bc = match (uses_bc, beta_c) {
            (true, None) => return Err(Error::Domain("'bc' needs --d".into())),
            (true, Some(bc)) if !bc.is_finite() => return Err(Error::Domain("'bc' needs d >= 3".into())),
            (_, bc) => bc.unwrap_or(f64::NAN),
        };
        let betas = match (&args.beta, &args.beta_range) {
            (Some(b), _) => vec![b.resolve(bc)],
            (None, Some(r)) => r.expand(bc, args.spacing)?,
            (None, None) => Vec::new(),
        };
        if let Some(b) = betas.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(Error::Domain(format!("beta must be finite and nonnegative, got {b}")));
        }
        let fields = match (args.field, &args.field_range) {
            (Some(b), _) => vec![b],
            (None, Some(r)) => {
                if r.lo.relative || r.hi.relative {
                    return Err(Error::Domain("'bc' is not meaningful for B".into()));
                }
                r.expand(0.0, args.spacing)?
            }
            (None, None) => Vec::new(),
        };
        let ns = match (args.n, &args.n_list) {
            (Some(n), _) => vec![n],
            (None, Some(list)) => list.clone(),
            (None, None) => Vec::new(),
        };
        for &n in &ns {
            if n == 0 || n > args.max_n {
                return Err(Error::Size(format!("n = {n} outside 1..={}", args.max_n)));
            }
            if let Some(d) = args.d {
                if !(d as usize * n).is_multiple_of(2) {
                    return Err(Error::Parity(format!("d*n = {} is odd", d as usize * n)));
                }
            }
        }
        Ok(Self {
            d: args.d,
            betas,
            fields,
            ns,
            cache: GTableCache::from_env_or(args.cache_dir.clone()),
            out: args.out.clone(),
            format: args.format,
            threads: args.threads,
            seed: args.seed,
            suite: args.suite,
        })
    }

    fn require_d(&self) -> Result<u32> {
        self.d.ok_or_else(|| Error::Domain("--d is required".into()))
    }

    fn require<'a, T>(&self, v: &'a [T], what: &str) -> Result<&'a [T]> {
        if v.is_empty() {
            Err(Error::Domain(format!("{what} is required")))
        } else {
            Ok(v)
        }
    }

    fn source(&self) -> &(dyn GTableSource + Sync) {
        match &self.cache {
            Some(c) => c,
            None => &Direct,
        }
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }
}

/// Errors that mean the invocation itself was wrong.
fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Domain(_) | Error::Parity(_) | Error::Size(_))
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (cmd_args, exec): (&ConfigArgs, fn(&RunConfig) -> Result<bool>) = match &cli.command {
        Command::Gtable(a) => (a, cmd_gtable),
        Command::Thermo(a) => (a, cmd_thermo),
        Command::Finite(a) => (a, cmd_finite),
        Command::Spinlaw(a) => (a, cmd_spinlaw),
        Command::Verify(a) => (a, cmd_verify),
    };
    let config = match RunConfig::from_args(cmd_args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let result = match config.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| exec(&config)),
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
        None => exec(&config),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Materializes `ln g` tables in the cache.
pub fn cmd_gtable(config: &RunConfig) -> Result<bool> {
    let d = config.require_d()?;
    let ns = config.require(&config.ns, "--n or --n-list")?;
    let betas = config.require(&config.betas, "--beta or --beta-range")?;
    let cache = config
        .cache
        .as_ref()
        .ok_or_else(|| Error::Domain("--cache-dir or $ANNEALED_ISING_CACHE is required".into()))?;
    let mut w = config.writer()?;
    for &n in ns {
        for &beta in betas {
            let (_, status) = cache.load_or_compute(d, n, beta)?;
            let status = match status {
                CacheStatus::Hit => "hit",
                CacheStatus::Miss => "miss",
                CacheStatus::Stale => "stale",
            };
            writeln!(w, "{status} {}", cache.path_for(d, n, beta).display())?;
        }
    }
    w.flush()?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermoRow {
    pub beta: f64,
    #[serde(rename = "B")]
    pub field: f64,
    pub psi: Option<f64>,
    #[serde(rename = "M")]
    pub magnetization: Option<f64>,
    pub chi: Option<f64>,
    #[serde(rename = "C")]
    pub specific_heat: Option<f64>,
    pub t_hat: Option<f64>,
    pub error: Option<String>,
}

pub fn thermo_row(d: u32, beta: f64, field: f64) -> ThermoRow {
    let mut row = ThermoRow {
        beta,
        field,
        psi: None,
        magnetization: None,
        chi: None,
        specific_heat: None,
        t_hat: None,
        error: None,
    };
    match ModelParams::new(d, beta, field).and_then(|p| thermo_point(&p)) {
        Ok(tp) => {
            row.psi = Some(tp.psi);
            row.magnetization = Some(tp.magnetization);
            row.chi = Some(tp.susceptibility);
            row.specific_heat = tp.specific_heat;
            row.t_hat = Some(tp.point.t_star);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

pub const THERMO_CSV_HEADER: &str = "beta,B,psi,M,chi,C,t_hat,error";

/// Limit quantities over the grid; a failing row records its error and the scan continues.
pub fn cmd_thermo(config: &RunConfig) -> Result<bool> {
    use rayon::prelude::*;
    let d = config.require_d()?;
    let betas = config.require(&config.betas, "--beta or --beta-range")?;
    let fields = config.require(&config.fields, "--B or --B-range")?;
    let grid: Vec<(f64, f64)> = betas.iter().flat_map(|&b| fields.iter().map(move |&f| (b, f))).collect();
    let rows: Vec<ThermoRow> = grid.par_iter().map(|&(b, f)| thermo_row(d, b, f)).collect();
    let mut w = config.writer()?;
    match config.format {
        Format::Csv => {
            writeln!(w, "{THERMO_CSV_HEADER}")?;
            for r in &rows {
                let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    fmt_f64(r.beta),
                    fmt_f64(r.field),
                    fmt_opt(r.psi),
                    fmt_opt(r.magnetization),
                    fmt_opt(r.chi),
                    fmt_opt(r.specific_heat),
                    fmt_opt(r.t_hat),
                    err
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(rows.iter().all(|r| r.error.is_none()))
}

fn table_for(config: &RunConfig, d: u32, n: usize, beta: f64) -> Result<LogWeightTable> {
    let g = config.source().log_g(d, n, beta)?;
    LogWeightTable::new(d, n, beta, &g)
}

/// Exact finite-n scan rows `(n, beta, B, psi_n, M_n, chi_n)`.
pub fn cmd_finite(config: &RunConfig) -> Result<bool> {
    let d = config.require_d()?;
    let ns = config.require(&config.ns, "--n or --n-list")?;
    let betas = config.require(&config.betas, "--beta or --beta-range")?;
    let fields = config.require(&config.fields, "--B or --B-range")?;
    let mut rows = Vec::new();
    for &n in ns {
        for &beta in betas {
            let table = table_for(config, d, n, beta)?;
            rows.extend(fields.iter().map(|&f| finiten::scan_row(&table, f)));
        }
    }
    let mut w = config.writer()?;
    match config.format {
        Format::Csv => finiten::write_scan_csv(&mut w, &rows)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(true)
}

#[derive(Debug, Serialize)]
struct SpinLawJson {
    n: usize,
    d: u32,
    beta: f64,
    #[serde(rename = "B")]
    field: f64,
    s: Vec<f64>,
    prob: Vec<f64>,
}

/// Law of `(2j − n)/n^{3/4}` for one `(n, β, B)`.
pub fn cmd_spinlaw(config: &RunConfig) -> Result<bool> {
    let d = config.require_d()?;
    let one = |v: &[f64], what: &str| -> Result<f64> {
        match v {
            [x] => Ok(*x),
            _ => Err(Error::Domain(format!("spinlaw takes a single {what}"))),
        }
    };
    let n = match config.ns.as_slice() {
        [n] => *n,
        _ => return Err(Error::Domain("spinlaw takes a single --n".into())),
    };
    let beta = one(&config.betas, "--beta")?;
    let field = if config.fields.is_empty() { 0.0 } else { one(&config.fields, "--B")? };
    let table = table_for(config, d, n, beta)?;
    let law = finiten::spin_law(&table, field);
    let mut w = config.writer()?;
    match config.format {
        Format::Csv => finiten::write_spinlaw_csv(&mut w, &law)?,
        Format::Json => {
            let (s, prob) = law.scaled_atoms().into_iter().unzip();
            serde_json::to_writer_pretty(&mut w, &SpinLawJson { n, d, beta, field, s, prob })?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(true)
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub reports: Vec<CheckReport>,
}

/// Runs one suite; the JSON report goes to `--out` or stdout.
pub fn cmd_verify(config: &RunConfig) -> Result<bool> {
    let suite = config.suite.ok_or_else(|| Error::Domain("--suite is required".into()))?;
    let report = run_suite(suite, config)?;
    let mut w = config.writer()?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(report.pass)
}

pub fn run_suite(suite: Suite, config: &RunConfig) -> Result<SuiteReport> {
    let ds = |default: &[u32]| config.d.map(|d| vec![d]).unwrap_or_else(|| default.to_vec());
    let ns = |default: &[usize]| if config.ns.is_empty() { default.to_vec() } else { config.ns.clone() };
    let mut reports = Vec::new();
    match suite {
        Suite::Taylor => {
            for d in ds(&[3, 4, 5]) {
                reports.push(criticality::taylor_check(d)?);
            }
        }
        Suite::Exponents => {
            for d in ds(&[3]) {
                reports.push(criticality::fit_exponent_beta(d)?.report("exponent_beta", d));
                reports.push(criticality::fit_exponent_delta(d)?.report("exponent_delta", d));
                reports.push(criticality::fit_exponent_gamma(d, Side::Below)?.report("exponent_gamma", d));
                reports.push(criticality::fit_exponent_gamma(d, Side::Above)?.report("exponent_gamma_prime", d));
            }
        }
        Suite::Jump => {
            for d in ds(&[3, 4]) {
                reports.push(criticality::specific_heat_jump(d)?);
            }
        }
        Suite::Scaling => {
            for d in ds(&[3]) {
                let list = ns(&criticality::DEFAULT_N_LIST);
                reports.push(criticality::scaling_limit_check(d, &list, config.source())?.report());
                reports.push(verify::truncation(d, &verify::TRUNCATION_N_LIST, config.source())?);
            }
        }
        Suite::Finiten => {
            for d in ds(&[3]) {
                reports.extend(verify::finite_n(d, config.source())?);
            }
        }
        Suite::Matching => {
            reports.push(verify::matching_oracle(verify::ORACLE_MAX_M)?);
            reports.push(verify::matching_monte_carlo(config.seed)?);
            for d in ds(&[3]) {
                reports.push(verify::remainder_bound(d, config.source())?);
            }
        }
        Suite::All => {
            for s in [Suite::Matching, Suite::Taylor, Suite::Exponents, Suite::Jump, Suite::Finiten, Suite::Scaling] {
                reports.extend(run_suite(s, config)?.reports);
            }
        }
    }
    Ok(SuiteReport { suite: suite.to_string(), pass: reports.iter().all(|r| r.pass), reports })
}
