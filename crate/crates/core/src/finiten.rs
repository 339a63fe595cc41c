//! Exact finite-`n` annealed quantities.
//!
//! The annealed measure depends on a configuration only through the number
//! `j` of plus spins, with weight `C(n, j) e^{2Bj} g_β(dj, dn)`. Everything
//! here is a reduction over the `n + 1` log weights `ln x_j = ln C(n, j) +
//! ln g_β(dj, dn)`, which do not depend on `B`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::{check_dnb, log_g_table, LogG};
use crate::output::fmt_f64;
use crate::special::{log_sum_exp, LnFactorials};
use crate::thermo::{critical_beta, Landscape};

/// Default cap on `n` for table builds.
pub const DEFAULT_MAX_N: usize = 5000;

/// `ln x_j(n)` for `j = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightTable {
    d: u32,
    n: usize,
    beta: f64,
    log_x: Vec<f64>,
    log_g: Vec<f64>,
}

impl LogWeightTable {
    /// Combines a matching table with log binomials. Fails if `gtable` was built for other parameters.
    pub fn new(d: u32, n: usize, beta: f64, gtable: &LogG) -> Result<Self> {
        check_dnb(d, n, beta)?;
        if !gtable.matches(d, n, beta) {
            return Err(Error::Consistency(format!(
                "g table is for (d = {}, n = {}, beta = {}), requested (d = {d}, n = {n}, beta = {beta})",
                gtable.d, gtable.n, gtable.beta
            )));
        }
        let lnf = LnFactorials::new(n);
        let log_x = (0..=n)
            .map(|j| {
                // mirror so that the table is exactly symmetric
                let k = j.min(n - j);
                lnf.ln_binomial(n, k) + gtable.values[k]
            })
            .collect();
        Ok(Self { d, n, beta, log_x, log_g: gtable.values.clone() })
    }

    /// Builds the matching table and the weight table in one go.
    pub fn compute(d: u32, n: usize, beta: f64) -> Result<Self> {
        let g = log_g_table(d, n, beta)?;
        Self::new(d, n, beta, &g)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_x(&self) -> &[f64] {
        &self.log_x
    }

    pub fn log_g(&self) -> &[f64] {
        &self.log_g
    }

    /// `⌊n/2⌋`
    pub fn j_star(&self) -> usize {
        self.n / 2
    }

    /// Total spin `S = 2j − n` for `j` plus spins.
    #[inline]
    pub fn spin(&self, j: usize) -> f64 {
        2.0 * j as f64 - self.n as f64
    }

    fn log_partition(&self, field: f64) -> f64 {
        log_sum_exp(self.log_x.iter().enumerate().map(|(j, &lx)| lx + 2.0 * field * j as f64))
    }
}

/// `ψ_n(β, B) = (βd/2 − B) + n⁻¹ ln Σ_j x_j e^{2Bj}`.
pub fn finite_pressure(table: &LogWeightTable, field: f64) -> f64 {
    let n = table.n as f64;
    table.beta * table.d as f64 / 2.0 - field + table.log_partition(field) / n
}

/// Law of the number of plus spins under the annealed measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinLaw {
    pub n: usize,
    pub d: u32,
    pub beta: f64,
    pub field: f64,
    pub log_mass: Vec<f64>,
    pub log_z: f64,
}

impl SpinLaw {
    pub fn mass(&self, j: usize) -> f64 {
        self.log_mass[j].exp()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.log_mass.iter().map(|lm| lm.exp()).collect()
    }

    fn spin(&self, j: usize) -> f64 {
        2.0 * j as f64 - self.n as f64
    }

    /// `E[f(S_n)]` by direct summation.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.log_mass.iter().enumerate().map(|(j, lm)| lm.exp() * f(self.spin(j))).sum()
    }

    pub fn mean_spin(&self) -> f64 {
        self.expect(|s| s)
    }

    /// `E[S_n^k]`
    pub fn moment(&self, k: i32) -> f64 {
        self.expect(|s| s.powi(k))
    }

    /// `E[(S_n / n^scale)^k]`
    pub fn scaled_moment(&self, k: i32, scale: f64) -> f64 {
        let norm = (self.n as f64).powf(scale);
        self.expect(|s| (s / norm).powi(k))
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean_spin();
        self.expect(|s| (s - mean) * (s - mean))
    }

    /// Magnetization `M_n = E[S_n / n]`.
    pub fn magnetization(&self) -> f64 {
        self.mean_spin() / self.n as f64
    }

    /// Scaled spin `(2j − n) / n^{3/4}` paired with its probability, ascending in `j`.
    pub fn scaled_atoms(&self) -> Vec<(f64, f64)> {
        let norm = (self.n as f64).powf(0.75);
        self.log_mass.iter().enumerate().map(|(j, lm)| (self.spin(j) / norm, lm.exp())).collect()
    }
}

/// Annealed law of `|σ_+|` at field `B`.
pub fn spin_law(table: &LogWeightTable, field: f64) -> SpinLaw {
    let log_z = table.log_partition(field);
    let log_mass = table.log_x.iter().enumerate().map(|(j, &lx)| lx + 2.0 * field * j as f64 - log_z).collect();
    SpinLaw { n: table.n, d: table.d, beta: table.beta, field, log_mass, log_z }
}

/// `χ_n = Var(S_n / √n)`.
pub fn finite_susceptibility(table: &LogWeightTable, field: f64) -> f64 {
    spin_law(table, field).variance() / table.n as f64
}

/// Largest `|r|` accepted by [`mgf_scaled`].
pub const MGF_MAX_R: f64 = 10.0;

/// `E[exp(r S_n / n^{3/4})]` at `B = 0`.
pub fn mgf_scaled(table: &LogWeightTable, r: f64) -> Result<f64> {
    if !(r.abs() <= MGF_MAX_R) {
        return Err(Error::Precondition(format!("|r| must be at most {MGF_MAX_R}, got {r}")));
    }
    let norm = (table.n as f64).powf(0.75);
    let tilted = log_sum_exp(table.log_x.iter().enumerate().map(|(j, &lx)| lx + r * table.spin(j) / norm));
    Ok((tilted - table.log_partition(0.0)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub n: usize,
    pub window_exponent: f64,
    /// Half-width `n^{window_exponent}` around `j_* = ⌊n/2⌋`.
    pub window: f64,
    /// `Σ_{|j − j_*| > window} x_j / Σ_j x_j`
    pub tail_mass: f64,
    /// `n^{-4}`
    pub tail_threshold: f64,
    pub rs: Vec<f64>,
    pub mgf_full: Vec<f64>,
    pub mgf_window: Vec<f64>,
    pub max_mgf_gap: f64,
    pub mgf_tolerance: f64,
    pub tail_ok: bool,
    pub mgf_ok: bool,
}

impl TruncationReport {
    pub fn pass(&self) -> bool {
        self.tail_ok && self.mgf_ok
    }
}

/// Tolerance between the full and windowed scaled mgf.
pub const TRUNCATION_MGF_TOL: f64 = 1e-8;

/// Compares the windowed sums `|j − j_*| ≤ n^{window_exponent}` with the full sums at `(β_c, 0)`.
pub fn truncation_check(table: &LogWeightTable, window_exponent: f64, rs: &[f64]) -> Result<TruncationReport> {
    let beta_c = critical_beta(table.d)?;
    if (table.beta - beta_c).abs() > 1e-12 * beta_c {
        return Err(Error::Precondition(format!(
            "truncation check runs at beta_c = {beta_c}, table has beta = {}",
            table.beta
        )));
    }
    let n = table.n as f64;
    let window = n.powf(window_exponent);
    let js = table.j_star() as f64;
    let inside = |j: usize| (j as f64 - js).abs() <= window;

    let total = table.log_partition(0.0);
    let tail = log_sum_exp(table.log_x.iter().enumerate().filter(|(j, _)| !inside(*j)).map(|(_, &lx)| lx));
    let tail_mass = (tail - total).exp();

    let norm = n.powf(0.75);
    let window_total = log_sum_exp(table.log_x.iter().enumerate().filter(|(j, _)| inside(*j)).map(|(_, &lx)| lx));
    let mut mgf_full = Vec::with_capacity(rs.len());
    let mut mgf_window = Vec::with_capacity(rs.len());
    for &r in rs {
        mgf_full.push(mgf_scaled(table, r)?);
        let tilted = log_sum_exp(
            table.log_x.iter().enumerate().filter(|(j, _)| inside(*j)).map(|(j, &lx)| lx + r * table.spin(j) / norm),
        );
        mgf_window.push((tilted - window_total).exp());
    }
    let max_mgf_gap = mgf_full.iter().zip(&mgf_window).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tail_threshold = n.powi(-4);
    Ok(TruncationReport {
        n: table.n,
        window_exponent,
        window,
        tail_mass,
        tail_threshold,
        rs: rs.to_vec(),
        mgf_full,
        mgf_window,
        max_mgf_gap,
        mgf_tolerance: TRUNCATION_MGF_TOL,
        tail_ok: tail_mass <= tail_threshold,
        mgf_ok: max_mgf_gap <= TRUNCATION_MGF_TOL,
    })
}

/// `r_j = ln g_β(dj, dn) − n d F_β(j/n)` for `j = 0..=n`.
pub fn rate_remainders(table: &LogWeightTable) -> Result<Vec<f64>> {
    let landscape = Landscape::new(table.d.max(2), table.beta)?;
    let n = table.n as f64;
    let d = table.d as f64;
    Ok((0..=table.n).into_par_iter().map(|j| table.log_g[j] - n * d * landscape.rate_unchecked(j as f64 / n)).collect())
}

/// `max_{i<j} |r_j − r_i| · n / (j − i)`: the empirical Lipschitz constant of the rate remainder.
pub fn remainder_lipschitz(table: &LogWeightTable) -> Result<f64> {
    let r = rate_remainders(table)?;
    let n = table.n as f64;
    Ok((0..r.len())
        .into_par_iter()
        .map(|i| (i + 1..r.len()).map(|j| (r[j] - r[i]).abs() * n / (j - i) as f64).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max))
}

/// Largest deviation of `ln(x_j / x_{j_*})` from its Laplace-form expansion over the window.
///
/// The expansion is `n[H(j/n) − H(j_*/n)] + (r_j − r_{j_*}) + ½ ln(j_*(n − j_*) / (j(n − j)))`
/// plus the `1/(12j)` Stirling terms of the two binomials.
pub fn ratio_formula_deviation(table: &LogWeightTable, window_exponent: f64) -> Result<f64> {
    let landscape = Landscape::new(table.d.max(2), table.beta)?;
    let r = rate_remainders(table)?;
    let n = table.n;
    let nf = n as f64;
    let js = table.j_star();
    let window = nf.powf(window_exponent);
    let stirling = |j: usize| 1.0 / (12.0 * j as f64) + 1.0 / (12.0 * (n - j) as f64);
    let h_star = landscape.h_unchecked(js as f64 / nf);
    let lo = (js as f64 - window).ceil().max(1.0) as usize;
    let hi = ((js as f64 + window).floor() as usize).min(n - 1);
    Ok((lo..=hi)
        .into_par_iter()
        .map(|j| {
            let exact = table.log_x[j] - table.log_x[js];
            let jf = j as f64;
            let jsf = js as f64;
            let approx = nf * (landscape.h_unchecked(jf / nf) - h_star)
                + (r[j] - r[js])
                + 0.5 * ((jsf * (nf - jsf)) / (jf * (nf - jf))).ln()
                - stirling(j)
                + stirling(js);
            (exact - approx).abs()
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub beta: f64,
    pub field: f64,
    pub psi_n: f64,
    pub magnetization_n: f64,
    pub susceptibility_n: f64,
}

pub fn scan_row(table: &LogWeightTable, field: f64) -> ScanRow {
    let law = spin_law(table, field);
    ScanRow {
        n: table.n,
        beta: table.beta,
        field,
        psi_n: finite_pressure(table, field),
        magnetization_n: law.magnetization(),
        susceptibility_n: law.variance() / table.n as f64,
    }
}

pub const SCAN_CSV_HEADER: &str = "n,beta,B,psi_n,M_n,chi_n";

pub fn write_scan_csv<W: Write>(mut w: W, rows: &[ScanRow]) -> Result<()> {
    writeln!(w, "{SCAN_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.beta),
            fmt_f64(r.field),
            fmt_f64(r.psi_n),
            fmt_f64(r.magnetization_n),
            fmt_f64(r.susceptibility_n)
        )?;
    }
    Ok(())
}

pub const SPINLAW_CSV_HEADER: &str = "j,s,prob";

pub fn write_spinlaw_csv<W: Write>(mut w: W, law: &SpinLaw) -> Result<()> {
    writeln!(w, "{SPINLAW_CSV_HEADER}")?;
    for (j, (s, p)) in law.scaled_atoms().into_iter().enumerate() {
        writeln!(w, "{j},{},{}", fmt_f64(s), fmt_f64(p))?;
    }
    Ok(())
}
