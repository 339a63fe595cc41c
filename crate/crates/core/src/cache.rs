//! On-disk cache for `ln g_β(dj, dn)` tables.
//!
//! One text file per `(d, n, β)`:
//!
//! ```text
//! gtable v1 d=3 n=500 beta=5.4930614433405489e-1
//! 0 0.0000000000000000e0
//! 1 -1.0986122886681098e0
//! ...
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matching::{log_g_table, LogG};
use crate::output::fmt_f64;

pub const CACHE_VERSION: &str = "v1";

/// Overrides any cache directory given on the command line.
pub const CACHE_ENV: &str = "ANNEALED_ISING_CACHE";

/// Anything that can hand out `ln g` tables.
pub trait GTableSource {
    fn log_g(&self, d: u32, n: usize, beta: f64) -> Result<LogG>;
}

/// Computes every table from scratch.
#[derive(Debug, Clone, Copy, Default)]
pub struct Direct;

impl GTableSource for Direct {
    fn log_g(&self, d: u32, n: usize, beta: f64) -> Result<LogG> {
        log_g_table(d, n, beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// A file existed but had another version or did not match the request.
    Stale,
}

#[derive(Debug, Clone)]
pub struct GTableCache {
    dir: PathBuf,
}

impl GTableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$ANNEALED_ISING_CACHE` if set, else `fallback`.
    pub fn from_env_or(fallback: Option<PathBuf>) -> Option<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Some(Self::new(PathBuf::from(v))),
            _ => fallback.map(Self::new),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File for `(d, n, β)`; `β` is keyed to 12 significant digits.
    pub fn path_for(&self, d: u32, n: usize, beta: f64) -> PathBuf {
        self.dir.join(format!("gtable_d{d}_n{n}_b{beta:.11e}.txt"))
    }

    pub fn load_or_compute(&self, d: u32, n: usize, beta: f64) -> Result<(LogG, CacheStatus)> {
        let path = self.path_for(d, n, beta);
        let status = match fs::read_to_string(&path) {
            Ok(text) => match parse(&text) {
                Some(g) if g.matches(d, n, beta) => return Ok((g, CacheStatus::Hit)),
                _ => CacheStatus::Stale,
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => CacheStatus::Miss,
            Err(e) => return Err(cache_err(&path, e)),
        };
        let g = log_g_table(d, n, beta)?;
        self.store(&g)?;
        Ok((g, status))
    }

    pub fn store(&self, g: &LogG) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| cache_err(&self.dir, e))?;
        let path = self.path_for(g.d, g.n, g.beta);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut out = Vec::with_capacity(32 * (g.n + 2));
        writeln!(out, "gtable {CACHE_VERSION} d={} n={} beta={}", g.d, g.n, fmt_f64(g.beta))?;
        for (j, v) in g.values.iter().enumerate() {
            writeln!(out, "{j} {}", fmt_f64(*v))?;
        }
        fs::write(&tmp, out).map_err(|e| cache_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| cache_err(&path, e))
    }
}

impl GTableSource for GTableCache {
    fn log_g(&self, d: u32, n: usize, beta: f64) -> Result<LogG> {
        self.load_or_compute(d, n, beta).map(|(g, _)| g)
    }
}

fn cache_err(path: &Path, e: std::io::Error) -> Error {
    Error::Cache { path: path.to_path_buf(), reason: e.to_string() }
}

fn parse(text: &str) -> Option<LogG> {
    let mut lines = text.lines();
    let mut head = lines.next()?.split_whitespace();
    if head.next()? != "gtable" || head.next()? != CACHE_VERSION {
        return None;
    }
    let d = head.next()?.strip_prefix("d=")?.parse().ok()?;
    let n: usize = head.next()?.strip_prefix("n=")?.parse().ok()?;
    let beta = head.next()?.strip_prefix("beta=")?.parse().ok()?;
    let mut values = Vec::with_capacity(n + 1);
    for (expect, line) in lines.enumerate() {
        let (j, v) = line.split_once(' ')?;
        if j.parse::<usize>().ok()? != expect {
            return None;
        }
        values.push(v.parse().ok()?);
    }
    Some(LogG { d, n, beta, values })
}
