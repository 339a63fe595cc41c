//! Critical behaviour: Taylor coefficients of `H_β` at `t = 1/2`, exponent and
//! amplitude fits near `β_c`, the specific-heat jump, and the quartic scaling
//! limit of the total spin at `(β_c, 0)`.
//!
//! Every check returns a [`CheckReport`] whose `checks` map records each
//! individual comparison, so exponents and amplitudes pass or fail separately.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::cache::GTableSource;
use crate::error::{Error, Result};
use crate::finiten::{mgf_scaled, spin_law, LogWeightTable};
use crate::output::fmt_f64;
use crate::quadrature::{integrate, integrate_real_line};
use crate::thermo::{critical_beta, magnetization, specific_heat, susceptibility, Landscape, ModelParams};

pub const SLOPE_TOL: f64 = 0.02;
pub const AMPLITUDE_REL_TOL: f64 = 0.05;
pub const TAYLOR_ZERO_TOL: f64 = 1e-7;
pub const TAYLOR_REL_TOL: f64 = 1e-4;
pub const TAYLOR_STEP: f64 = 1e-3;
pub const JUMP_TOL: f64 = 1e-3;
pub const JUMP_OFFSETS: [f64; 3] = [1e-3, 1e-4, 1e-5];
pub const MOMENT4_REL_TOL: f64 = 0.03;
pub const MGF_REL_TOL: f64 = 0.02;
pub const MGF_RS: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_N_LIST: [usize; 4] = [500, 1000, 2000, 4000];

/// Serialized form shared by all checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub d: u32,
    pub grid: Vec<f64>,
    pub estimates: BTreeMap<String, f64>,
    pub targets: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: &str, d: u32) -> Self {
        Self {
            check: check.into(),
            d,
            grid: Vec::new(),
            estimates: BTreeMap::new(),
            targets: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            checks: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn record(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.into(), ok);
        self.pass &= ok;
    }

    /// Compares `estimate` with `target` under an absolute tolerance.
    pub fn compare_abs(&mut self, name: &str, estimate: f64, target: f64, tol: f64) {
        self.estimates.insert(name.into(), estimate);
        self.targets.insert(name.into(), target);
        self.tolerances.insert(name.into(), tol);
        self.record(name, (estimate - target).abs() <= tol);
    }

    pub fn compare_rel(&mut self, name: &str, estimate: f64, target: f64, tol: f64) {
        self.estimates.insert(name.into(), estimate);
        self.targets.insert(name.into(), target);
        self.tolerances.insert(name.into(), tol);
        self.record(name, ((estimate - target) / target).abs() <= tol);
    }
}

fn require_critical_degree(d: u32) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!("critical behaviour needs d >= 3, got {d}")));
    }
    critical_beta(d)
}

/// First derivative, 5-point stencil, `O(h⁴)`.
fn stencil1<F: Fn(f64) -> f64>(f: &F, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// Second derivative, 5-point stencil, `O(h⁴)`.
fn stencil2<F: Fn(f64) -> f64>(f: &F, h: f64) -> f64 {
    (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
}

/// Third derivative, 5-point stencil, `O(h²)`.
fn stencil3<F: Fn(f64) -> f64>(f: &F, h: f64) -> f64 {
    (-f(-2.0 * h) + 2.0 * f(-h) - 2.0 * f(h) + f(2.0 * h)) / (2.0 * h * h * h)
}

/// One Richardson step on steps `h` and `h/2` for a method of order `p`.
fn richardson<S: Fn(f64) -> f64>(stencil: S, h: f64, p: i32) -> f64 {
    let k = 2f64.powi(p);
    (k * stencil(0.5 * h) - stencil(h)) / (k - 1.0)
}

/// Derivatives of `H_β` and `F_β` at `t = 1/2`, `β = β_c`, against their closed forms.
///
/// Stencils act on the analytic lower derivatives: `H` for `H'`, `∂_t H` for
/// `H''` and `H'''`, `∂_tt H` for `H⁽⁴⁾`, `ln f` for `F''` and `F⁽⁴⁾`.
pub fn taylor_check(d: u32) -> Result<CheckReport> {
    let beta_c = require_critical_degree(d)?;
    taylor_check_at(d, beta_c)
}

/// As [`taylor_check`] with an explicit `β`, which must equal `β_c`.
pub fn taylor_check_at(d: u32, beta: f64) -> Result<CheckReport> {
    let beta_c = require_critical_degree(d)?;
    if beta != beta_c {
        return Err(Error::Precondition(format!("Taylor check runs at beta_c = {beta_c}, got {beta}")));
    }
    let land = Landscape::new(d, beta)?;
    let h = TAYLOR_STEP;
    let big_h = |s: f64| land.h_unchecked(0.5 + s);
    let dh = |s: f64| land.dh_s(s);
    let d2h = |s: f64| land.d2h_s(s).unwrap_or(f64::NAN);
    let df = |s: f64| land.drate_s(s);

    let h1 = richardson(|x| stencil1(&big_h, x), h, 4);
    let h2 = richardson(|x| stencil1(&dh, x), h, 4);
    let h3 = richardson(|x| stencil2(&dh, x), h, 4);
    let h4 = richardson(|x| stencil2(&d2h, x), h, 4);
    let f2 = richardson(|x| stencil1(&df, x), h, 4);
    let f4 = richardson(|x| stencil3(&df, x), h, 2);

    let df_ = d as f64;
    let c = (df_ - 2.0) / df_;
    let mut r = CheckReport::new("taylor", d);
    r.grid = vec![h, 0.5 * h];
    r.compare_abs("H1", h1, 0.0, TAYLOR_ZERO_TOL);
    r.compare_abs("H2", h2, 0.0, TAYLOR_ZERO_TOL);
    r.compare_abs("H3", h3, 0.0, TAYLOR_ZERO_TOL);
    r.compare_rel("H4", h4, -32.0 * (df_ - 1.0) * (df_ - 2.0) / (df_ * df_), TAYLOR_REL_TOL);
    r.compare_rel("F2", f2, 2.0 * (1.0 - c), TAYLOR_REL_TOL);
    r.compare_rel("F4", f4, 24.0 * (1.0 - c).powi(2) - 8.0 * (1.0 - c).powi(3), TAYLOR_REL_TOL);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent_estimate: f64,
    pub amplitude_estimate: f64,
    pub r_squared: f64,
    /// `(offset, value)`, offsets ascending.
    pub grid: Vec<(f64, f64)>,
    pub target_exponent: f64,
    pub target_amplitude: Option<f64>,
}

impl ExponentFit {
    /// Least squares on `ln value = ln A + p ln offset`; the amplitude is read at the smallest offset.
    pub fn from_grid(grid: Vec<(f64, f64)>, target_exponent: f64, target_amplitude: Option<f64>) -> Self {
        let pts: Vec<(f64, f64)> = grid.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        let ss_res: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
        let (x0, y0) = grid[0];
        Self {
            exponent_estimate: slope,
            amplitude_estimate: y0 / x0.powf(target_exponent),
            r_squared,
            grid,
            target_exponent,
            target_amplitude,
        }
    }

    pub fn exponent_ok(&self, tol: f64) -> bool {
        (self.exponent_estimate - self.target_exponent).abs() <= tol
    }

    pub fn amplitude_ok(&self, rel_tol: f64) -> bool {
        self.target_amplitude.map(|a| ((self.amplitude_estimate - a) / a).abs() <= rel_tol).unwrap_or(true)
    }

    pub fn report(&self, check: &str, d: u32) -> CheckReport {
        let mut r = CheckReport::new(check, d);
        r.grid = self.grid.iter().map(|g| g.0).collect();
        r.compare_abs("exponent", self.exponent_estimate, self.target_exponent, SLOPE_TOL);
        if let Some(a) = self.target_amplitude {
            r.compare_rel("amplitude", self.amplitude_estimate, a, AMPLITUDE_REL_TOL);
        }
        r.estimates.insert("r_squared".into(), self.r_squared);
        r
    }
}

/// `count` points geometrically spaced on `[lo, hi]`, ascending.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo * (step * i as f64).exp() }).collect()
}

fn fit_on<F>(offsets: Vec<f64>, eval: F, exponent: f64, amplitude: Option<f64>) -> Result<ExponentFit>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = offsets.par_iter().map(|&x| eval(x).map(|y| (x, y))).collect::<Result<Vec<_>>>()?;
    Ok(ExponentFit::from_grid(grid, exponent, amplitude))
}

/// `M(β_c + Δ, 0⁺) ∝ Δ^{1/2}`.
pub fn fit_exponent_beta(d: u32) -> Result<ExponentFit> {
    let beta_c = require_critical_degree(d)?;
    let df = d as f64;
    fit_on(
        geometric_grid(1e-7, 1e-3, 8),
        |delta| magnetization(&ModelParams::new(d, beta_c + delta, 0.0)?),
        0.5,
        Some(df * (3.0 / (df - 1.0)).sqrt()),
    )
}

/// `M(β_c, B) ∝ B^{1/3}`.
pub fn fit_exponent_delta(d: u32) -> Result<ExponentFit> {
    let beta_c = require_critical_degree(d)?;
    let df = d as f64;
    fit_on(
        geometric_grid(1e-9, 1e-4, 8),
        |b| magnetization(&ModelParams::new(d, beta_c, b)?),
        1.0 / 3.0,
        Some(2.0 * (3.0 * df * df / (8.0 * (df - 1.0) * (df - 2.0))).cbrt()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Below,
    Above,
}

/// `χ(β_c ∓ Δ, 0⁺) ∝ Δ^{−1}`.
pub fn fit_exponent_gamma(d: u32, side: Side) -> Result<ExponentFit> {
    let beta_c = require_critical_degree(d)?;
    let df = d as f64;
    let (sign, amplitude) = match side {
        Side::Below => (-1.0, 1.0 / (df - 2.0)),
        Side::Above => (1.0, (df - 1.0) / ((df - 2.0) * (2.0 * df + 1.0))),
    };
    fit_on(
        geometric_grid(1e-7, 1e-3, 8),
        |delta| susceptibility(&ModelParams::new(d, beta_c + sign * delta, 0.0)?),
        -1.0,
        Some(amplitude),
    )
}

/// `∫_0^1 2d³(d−2) u(1−u²) / (d² + (4−4d)u²)^{3/2} du`
pub fn specific_heat_below_limit(d: u32) -> f64 {
    let df = d as f64;
    let k = 2.0 * df.powi(3) * (df - 2.0);
    integrate(
        |u| {
            let r = df * df + (4.0 - 4.0 * df) * u * u;
            k * u * (1.0 - u * u) / (r * r.sqrt())
        },
        0.0,
        1.0,
        1e-14,
    )
}

/// Stated size of the jump `C(β_c⁺) − C(β_c⁻)`: `3d²(d−2)/(2d+1)`.
pub fn stated_jump(d: u32) -> f64 {
    let df = d as f64;
    3.0 * df * df * (df - 2.0) / (2.0 * df + 1.0)
}

/// Intercept of the least-squares line through `(x, y)`.
fn linear_intercept(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    my - sxy / sxx * mx
}

/// One-sided limits of `C(β, 0⁺)` at `β_c`, extrapolated linearly in `Δ`.
pub fn specific_heat_jump(d: u32) -> Result<CheckReport> {
    let beta_c = require_critical_degree(d)?;
    let side = |sign: f64| -> Result<Vec<(f64, f64)>> {
        JUMP_OFFSETS
            .iter()
            .map(|&delta| Ok((delta, specific_heat(&ModelParams::new(d, beta_c + sign * delta, 0.0)?)?)))
            .collect()
    };
    let below_pts = side(-1.0)?;
    let above_pts = side(1.0)?;
    let below = linear_intercept(&below_pts);
    let above = linear_intercept(&above_pts);
    let below_target = specific_heat_below_limit(d);
    let jump_target = stated_jump(d);

    let mut r = CheckReport::new("jump", d);
    r.grid = JUMP_OFFSETS.to_vec();
    for (delta, c) in &below_pts {
        r.estimates.insert(format!("C_below_{delta:e}"), *c);
    }
    for (delta, c) in &above_pts {
        r.estimates.insert(format!("C_above_{delta:e}"), *c);
    }
    r.compare_abs("below_limit", below, below_target, JUMP_TOL);
    r.compare_abs("above_limit", above, below_target + jump_target, JUMP_TOL);
    r.compare_abs("jump", above - below, jump_target, JUMP_TOL);
    r.record("finite", below.is_finite() && above.is_finite());
    Ok(r)
}

/// Limit law of `S_n / n^{3/4}` at `(β_c, 0)`: density `∝ exp(−a x⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingLimit {
    pub d: u32,
    /// `H⁽⁴⁾(1/2) / 24 = −4(d−1)(d−2)/(3d²)`
    pub alpha_star: f64,
    /// `a = (d−1)(d−2)/(12d²)`
    pub quartic_coeff: f64,
    /// `∫ exp(−a x⁴) dx = Γ(1/4) / (2 a^{1/4})`
    pub normalizer: f64,
    pub moment2: f64,
    pub moment4: f64,
}

impl ScalingLimit {
    pub fn new(d: u32) -> Result<Self> {
        require_critical_degree(d)?;
        let df = d as f64;
        let a = (df - 1.0) * (df - 2.0) / (12.0 * df * df);
        Ok(Self {
            d,
            alpha_star: -4.0 * (df - 1.0) * (df - 2.0) / (3.0 * df * df),
            quartic_coeff: a,
            normalizer: gamma(0.25) / (2.0 * a.powf(0.25)),
            moment2: gamma(0.75) / (gamma(0.25) * a.sqrt()),
            moment4: 1.0 / (4.0 * a),
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        (-self.quartic_coeff * x.powi(4)).exp() / self.normalizer
    }

    /// `P(X ≤ x) = 1/2 + sign(x) P(1/4, a x⁴) / 2`.
    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.quartic_coeff * x.powi(4);
        if z == 0.0 {
            return 0.5;
        }
        let p = if z.is_finite() { gamma_lr(0.25, z) } else { 1.0 };
        0.5 + 0.5 * x.signum() * p
    }

    /// `E[e^{rX}] = A(α_*, r) / B(α_*)`, both by quadrature.
    pub fn mgf(&self, r: f64) -> f64 {
        let a = self.quartic_coeff;
        let num = integrate_real_line(|y| (-a * y.powi(4) + r * y).exp(), 1e-13);
        let den = integrate_real_line(|y| (-a * y.powi(4)).exp(), 1e-13);
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub moment2: f64,
    pub moment4: f64,
    /// `(r, E[exp(r S_n / n^{3/4})])`
    pub mgf: Vec<(f64, f64)>,
    pub ks_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub limit: ScalingLimit,
    pub limit_mgf: Vec<(f64, f64)>,
    pub rows: Vec<ScalingRow>,
}

/// `sup_x |F_n(x) − F(x)|` for the atomic law `atoms` (ascending) against `cdf`.
pub fn kolmogorov_distance<F: Fn(f64) -> f64>(atoms: &[(f64, f64)], cdf: F) -> f64 {
    let mut below = 0.0;
    let mut dist: f64 = 0.0;
    for &(x, p) in atoms {
        let fx = cdf(x);
        let above = below + p;
        dist = dist.max((below - fx).abs()).max((above - fx).abs());
        below = above;
    }
    dist
}

/// Exact finite-`n` spin law at `(β_c, 0)` against the quartic limit.
pub fn scaling_limit_check(d: u32, n_list: &[usize], source: &(dyn GTableSource + Sync)) -> Result<ScalingReport> {
    let beta_c = require_critical_degree(d)?;
    let limit = ScalingLimit::new(d)?;
    let limit_mgf = MGF_RS.iter().map(|&r| (r, limit.mgf(r))).collect();
    let rows = n_list
        .iter()
        .map(|&n| {
            let g = source.log_g(d, n, beta_c)?;
            let table = LogWeightTable::new(d, n, beta_c, &g)?;
            let law = spin_law(&table, 0.0);
            let mgf = MGF_RS.iter().map(|&r| Ok((r, mgf_scaled(&table, r)?))).collect::<Result<Vec<_>>>()?;
            Ok(ScalingRow {
                n,
                moment2: law.scaled_moment(2, 0.75),
                moment4: law.scaled_moment(4, 0.75),
                mgf,
                ks_distance: kolmogorov_distance(&law.scaled_atoms(), |x| limit.cdf(x)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport { limit, limit_mgf, rows })
}

impl ScalingReport {
    pub fn report(&self) -> CheckReport {
        let mut r = CheckReport::new("scaling", self.limit.d);
        r.grid = self.rows.iter().map(|row| row.n as f64).collect();
        for row in &self.rows {
            r.estimates.insert(format!("moment2_n{}", row.n), row.moment2);
            r.estimates.insert(format!("moment4_n{}", row.n), row.moment4);
            r.estimates.insert(format!("ks_n{}", row.n), row.ks_distance);
            for (rr, m) in &row.mgf {
                r.estimates.insert(format!("mgf_r{rr}_n{}", row.n), *m);
            }
        }
        r.targets.insert("moment2".into(), self.limit.moment2);
        let Some(last) = self.rows.last() else {
            r.record("nonempty", false);
            return r;
        };
        r.compare_rel("moment4", last.moment4, self.limit.moment4, MOMENT4_REL_TOL);
        let gaps: Vec<f64> = self.rows.iter().map(|row| (row.moment4 - self.limit.moment4).abs()).collect();
        r.record("moment4_monotone", gaps.windows(2).all(|w| w[1] < w[0]));
        for ((rr, m), (_, target)) in last.mgf.iter().zip(&self.limit_mgf) {
            r.compare_rel(&format!("mgf_r{rr}"), *m, *target, MGF_REL_TOL);
        }
        r.record("ks_decreasing", self.rows.windows(2).all(|w| w[1].ks_distance < w[0].ks_distance));
        r
    }
}

pub const SCALING_CSV_HEADER: &str = "n,moment2,moment4,ks_distance";

pub fn write_scaling_csv<W: Write>(mut w: W, report: &ScalingReport) -> Result<()> {
    writeln!(w, "{SCALING_CSV_HEADER}")?;
    for row in &report.rows {
        writeln!(w, "{},{},{},{}", row.n, fmt_f64(row.moment2), fmt_f64(row.moment4), fmt_f64(row.ks_distance))?;
    }
    Ok(())
}
