//! Thermodynamic limit of the annealed model.
//!
//! The limit pressure is a one-dimensional variational problem over the
//! fraction `t` of plus spins:
//!
//! ```text
//! ψ(β, B) = βd/2 − B + max_t [ H_β(t) + 2Bt ],   H_β(t) = I(t) + d F_β(t)
//! ```
//!
//! where `I` is the binary entropy and `F_β(t) = ∫_0^{min(t,1−t)} ln f_β(s) ds`
//! is the exponential rate of the matching transform. Everything else here
//! (magnetization, susceptibility, specific heat) is read off the maximizer.
//!
//! Internally the maximizer is parametrized by `s = t − 1/2 ∈ [0, 1/2)`; all
//! near-critical quantities are small in `s`, and the `ln1p` forms below keep
//! their relative accuracy there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, DEFAULT_TOL};
use crate::roots::{bisect_newton, RootOptions};

/// Closest approach of a root to `t = 1`.
pub const ENDPOINT_GUARD: f64 = 1e-12;

/// Grid spacing for the sign-change count that certifies a unique root.
pub const UNIQUENESS_GRID: f64 = 1e-3;

/// Largest residual `|∂_t L|` accepted at a returned root.
pub const ROOT_RESIDUAL: f64 = 1e-12;

/// `β_c = atanh(1/(d−1))`; infinite for `d = 2`.
pub fn critical_beta(d: u32) -> Result<f64> {
    match d {
        0 | 1 => Err(Error::Domain(format!("degree must be at least 2, got {d}"))),
        2 => Ok(f64::INFINITY),
        _ => Ok(0.5 * (d as f64 / (d as f64 - 2.0)).ln()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub d: u32,
    pub beta: f64,
    /// External field `B`, nonnegative. Negative fields map here by spin flip.
    pub field: f64,
}

impl ModelParams {
    pub fn new(d: u32, beta: f64, field: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("degree must be at least 2, got {d}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be finite and nonnegative, got {beta}")));
        }
        if !(field >= 0.0 && field.is_finite()) {
            return Err(Error::Domain(format!(
                "field must be finite and nonnegative, got {field}; use spin-flip symmetry for B < 0"
            )));
        }
        Ok(Self { d, beta, field })
    }

    pub fn landscape(&self) -> Landscape {
        Landscape { d: self.d, beta: self.beta, c: (-2.0 * self.beta).exp() }
    }

    /// True at exactly `(β_c, 0)`.
    pub fn is_critical(&self) -> bool {
        self.field == 0.0 && critical_beta(self.d).map(|bc| bc == self.beta).unwrap_or(false)
    }
}

/// Which stationarity condition produced a [`CriticalPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// `∂_t H_β(t) + 2B = 0` with `B > 0`.
    Field,
    /// `∂_t H_β(t) = 0` with `β > β_c`, `B = 0⁺`.
    Spontaneous,
    /// `t = 1/2`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub t_star: f64,
    /// `t_star − 1/2`, kept separately because it is tiny near criticality.
    pub s_star: f64,
    pub kind: RootKind,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoPoint {
    pub psi: f64,
    pub magnetization: f64,
    pub susceptibility: f64,
    /// `None` at `(β_c, 0)`, where the one-sided limits differ.
    pub specific_heat: Option<f64>,
    pub point: CriticalPoint,
}

/// `H_β` and its derivatives for a fixed `(d, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landscape {
    d: u32,
    beta: f64,
    /// `e^{−2β}`
    c: f64,
}

impl Landscape {
    pub fn new(d: u32, beta: f64) -> Result<Self> {
        Ok(ModelParams::new(d, beta, 0.0)?.landscape())
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `sqrt(1 + (c² − 1) u²) − 1`, without cancellation.
    #[inline]
    fn radical_minus_one(&self, u: f64) -> f64 {
        let x = (self.c * self.c - 1.0) * u * u;
        x / ((1.0 + x).sqrt() + 1.0)
    }

    /// `ln f_β(s)` in terms of `v = 1 − 2s ∈ [0, 1]`.
    ///
    /// `f = (cv + R) / (1 + v)` and `cv + R − (1 + v) = (c − 1)v + (R − 1)`.
    #[inline]
    fn log_kernel_v(&self, v: f64) -> f64 {
        (((self.c - 1.0) * v + self.radical_minus_one(v)) / (1.0 + v)).ln_1p()
    }

    /// `f_β(s)` for `s ∈ [0, 1/2]`.
    pub fn kernel(&self, s: f64) -> Result<f64> {
        if !(0.0..=0.5).contains(&s) {
            return Err(Error::Domain(format!("kernel argument {s} outside [0, 1/2]")));
        }
        let v = 1.0 - 2.0 * s;
        Ok((self.c * v + (1.0 + (self.c * self.c - 1.0) * v * v).sqrt()) / (2.0 * (1.0 - s)))
    }

    /// `F_β(t) = ∫_0^{min(t, 1−t)} ln f_β(s) ds`.
    pub fn rate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
        }
        Ok(self.rate_unchecked(t))
    }

    pub(crate) fn rate_unchecked(&self, t: f64) -> f64 {
        let upper = t.min(1.0 - t);
        if self.beta == 0.0 {
            return 0.0;
        }
        integrate(|s| self.log_kernel_v(1.0 - 2.0 * s), 0.0, upper, DEFAULT_TOL)
    }

    /// `I(t) = (t − 1) ln(1 − t) − t ln t`.
    pub fn entropy(t: f64) -> f64 {
        let a = if t < 1.0 { (t - 1.0) * (1.0 - t).ln() } else { 0.0 };
        let b = if t > 0.0 { t * t.ln() } else { 0.0 };
        a - b
    }

    fn check_open(t: f64) -> Result<()> {
        if t == 0.0 || t == 1.0 {
            return Err(Error::SingularEndpoint(t));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("t = {t} outside (0, 1)")));
        }
        Ok(())
    }

    /// `H_β(t) = I(t) + d F_β(t)`.
    pub fn h(&self, t: f64) -> Result<f64> {
        Self::check_open(t)?;
        Ok(self.h_unchecked(t))
    }

    pub(crate) fn h_unchecked(&self, t: f64) -> f64 {
        Self::entropy(t) + self.d as f64 * self.rate_unchecked(t)
    }

    /// `∂_t H_β(t)`.
    pub fn dh(&self, t: f64) -> Result<f64> {
        Self::check_open(t)?;
        Ok(self.dh_s(t - 0.5))
    }

    /// `∂_t H_β` at `t = 1/2 + s`; odd in `s`.
    pub(crate) fn dh_s(&self, s: f64) -> f64 {
        let a = s.abs();
        let value = (-2.0 * a).ln_1p() - (2.0 * a).ln_1p() - self.d as f64 * self.log_kernel_v(2.0 * a);
        if s < 0.0 {
            -value
        } else {
            value
        }
    }

    /// `F'_β(t) = ln f_β(t)` at `t = 1/2 + s`; odd in `s` since `f(s) f(1 − s) = 1`.
    pub(crate) fn drate_s(&self, s: f64) -> f64 {
        let value = -self.log_kernel_v(2.0 * s.abs());
        if s < 0.0 {
            -value
        } else {
            value
        }
    }

    /// `∂_tt H_β(t) = −P(t)/Q(t)`, evaluated on the `t ≥ 1/2` branch and mirrored.
    pub fn d2h(&self, t: f64) -> Result<f64> {
        Self::check_open(t)?;
        self.d2h_s(t - 0.5)
    }

    /// `∂_tt H_β` at `t = 1/2 + s`; even in `s`.
    pub(crate) fn d2h_s(&self, s: f64) -> Result<f64> {
        let s = s.abs();
        let d = self.d as f64;
        let c = self.c;
        // θ₂ = f_β(1 − t)
        let theta = self.log_kernel_v(2.0 * s).exp();
        let p = d * (0.5 - s) * (c * theta - 1.0) + 2.0 * c * s * theta + 1.0 - 2.0 * s;
        let q = (0.25 - s * s) * (2.0 * c * s * theta + 1.0 - 2.0 * s);
        if q == 0.0 {
            return Err(Error::Domain(format!("second derivative singular at t = {}", 0.5 + s)));
        }
        Ok(-p / q)
    }

    /// `∂_tβ L(t)`; odd about `t = 1/2`.
    pub fn dtb(&self, t: f64) -> f64 {
        let u = 2.0 * t - 1.0;
        let r = 1.0 + self.radical_minus_one(u);
        2.0 * self.d as f64 * self.c * u / r
    }

    /// `∂_ββ L(t) = 2d ∫_{|2t−1|}^1 e^{−2β} u (1 − u²) / (1 + (e^{−4β} − 1) u²)^{3/2} du`.
    pub fn dbb(&self, t: f64) -> f64 {
        let lower = (2.0 * t - 1.0).abs();
        let c = self.c;
        let integrand = |u: f64| {
            let r = 1.0 + self.radical_minus_one(u);
            c * u * (1.0 - u * u) / (r * r * r)
        };
        2.0 * self.d as f64 * integrate(integrand, lower, 1.0, 1e-14)
    }
}

fn count_sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Uniqueness grid on `s ∈ [from, 1/2 − guard]`: `from`, then every multiple of the grid step above it.
fn grid_from(from: f64) -> Vec<f64> {
    let end = 0.5 - ENDPOINT_GUARD;
    let mut pts = vec![from];
    let mut i = (from / UNIQUENESS_GRID).floor() as usize + 1;
    loop {
        let s = i as f64 * UNIQUENESS_GRID;
        if s >= end {
            break;
        }
        pts.push(s);
        i += 1;
    }
    pts.push(end);
    pts
}

fn solve_on_grid<F>(landscape: &Landscape, g: F, grid: &[f64], what: &str) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = grid.iter().map(|&s| g(s)).collect();
    let changes = count_sign_changes(values.iter().copied());
    if changes != 1 {
        return Err(Error::RootBracket(format!(
            "{what}: expected exactly one sign change on the grid, found {changes}"
        )));
    }
    let cell = values
        .windows(2)
        .position(|w| w[0] != 0.0 && w[1] != 0.0 && w[0].signum() != w[1].signum())
        .or_else(|| values.iter().position(|&v| v == 0.0).map(|i| i.saturating_sub(1)))
        .ok_or_else(|| Error::RootBracket(format!("{what}: no bracketing cell")))?;
    let (lo, hi) = (grid[cell], grid[cell + 1]);
    let root = bisect_newton(
        &g,
        |s| landscape.d2h_s(s).unwrap_or(f64::NAN),
        lo,
        hi,
        RootOptions { residual: ROOT_RESIDUAL, ..RootOptions::default() },
    )?;
    if root.residual > ROOT_RESIDUAL {
        return Err(Error::RootBracket(format!("{what}: residual {} above {ROOT_RESIDUAL}", root.residual)));
    }
    Ok((root.x, root.residual))
}

/// Unique maximizer `t_* ∈ (1/2, 1)` of `H_β(t) + 2Bt` for `B > 0`.
pub fn find_t_star(params: &ModelParams) -> Result<CriticalPoint> {
    if params.field <= 0.0 {
        return Err(Error::Precondition(format!("find_t_star needs B > 0, got {}", params.field)));
    }
    let landscape = params.landscape();
    let two_b = 2.0 * params.field;
    let g = |s: f64| landscape.dh_s(s) + two_b;
    let (s, residual) = solve_on_grid(&landscape, g, &grid_from(0.0), "dH + 2B")?;
    Ok(CriticalPoint { t_star: 0.5 + s, s_star: s, kind: RootKind::Field, residual })
}

/// Nontrivial root `t_+ ∈ (1/2, 1)` of `∂_t H_β` for `β > β_c`.
pub fn find_t_plus(d: u32, beta: f64) -> Result<CriticalPoint> {
    let beta_c = critical_beta(d)?;
    let landscape = Landscape::new(d, beta)?;
    if !(beta > beta_c) {
        return Err(Error::NoNontrivialRoot { beta, beta_c });
    }
    let df = d as f64;
    let g = |s: f64| landscape.dh_s(s);

    // leading order: s_+² ≈ 3d²(β − β_c) / (4(d − 1))
    let seed = (3.0 * df * df * (beta - beta_c) / (4.0 * (df - 1.0))).sqrt().min(0.25);
    let mut lo = 0.5 * seed;
    let mut halvings = 0;
    while g(lo) <= 0.0 {
        lo *= 0.5;
        halvings += 1;
        if halvings > 200 {
            return Err(Error::RootBracket("dH: no positive value near s = 0".into()));
        }
    }
    let (s, residual) = solve_on_grid(&landscape, g, &grid_from(lo), "dH")?;
    Ok(CriticalPoint { t_star: 0.5 + s, s_star: s, kind: RootKind::Spontaneous, residual })
}

/// Maximizer used by every limit quantity; `B = 0` means the one-sided limit `B → 0⁺`.
pub fn maximizer(params: &ModelParams) -> Result<CriticalPoint> {
    if params.field > 0.0 {
        return find_t_star(params);
    }
    let beta_c = critical_beta(params.d)?;
    if params.beta > beta_c {
        find_t_plus(params.d, params.beta)
    } else {
        Ok(CriticalPoint { t_star: 0.5, s_star: 0.0, kind: RootKind::Symmetric, residual: 0.0 })
    }
}

fn pressure_at(params: &ModelParams, landscape: &Landscape, point: &CriticalPoint) -> f64 {
    let d = params.d as f64;
    params.beta * d / 2.0 - params.field + landscape.h_unchecked(point.t_star) + 2.0 * params.field * point.t_star
}

/// `ψ(β, B)`.
pub fn pressure(params: &ModelParams) -> Result<f64> {
    let point = maximizer(params)?;
    Ok(pressure_at(params, &params.landscape(), &point))
}

/// `M(β, B) = 2t̂ − 1`.
pub fn magnetization(params: &ModelParams) -> Result<f64> {
    Ok(2.0 * maximizer(params)?.s_star)
}

fn susceptibility_at(params: &ModelParams, landscape: &Landscape, point: &CriticalPoint) -> Result<f64> {
    if params.is_critical() {
        return Ok(f64::INFINITY);
    }
    let curvature = landscape.d2h_s(point.s_star)?;
    if curvature >= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-4.0 / curvature)
}

/// `χ(β, B) = −4 / ∂_tt H_β(t̂)`; infinite at `(β_c, 0)`.
pub fn susceptibility(params: &ModelParams) -> Result<f64> {
    let point = maximizer(params)?;
    susceptibility_at(params, &params.landscape(), &point)
}

fn specific_heat_at(params: &ModelParams, landscape: &Landscape, point: &CriticalPoint) -> Result<f64> {
    if params.is_critical() {
        return Err(Error::UndefinedAtCriticality(format!("specific heat at beta = beta_c, B = 0 (d = {})", params.d)));
    }
    let t = point.t_star;
    let direct = landscape.dbb(t);
    if point.s_star == 0.0 {
        // ∂_tβ L(1/2) = 0
        return Ok(direct);
    }
    let cross = landscape.dtb(t);
    let curvature = landscape.d2h_s(point.s_star)?;
    Ok(direct - cross * cross / curvature)
}

/// Limit specific heat `C(β, B) = ∂²_β ψ`.
pub fn specific_heat(params: &ModelParams) -> Result<f64> {
    let point = maximizer(params)?;
    specific_heat_at(params, &params.landscape(), &point)
}

/// All limit quantities from one root solve.
pub fn thermo_point(params: &ModelParams) -> Result<ThermoPoint> {
    let landscape = params.landscape();
    let point = maximizer(params)?;
    let specific_heat = match specific_heat_at(params, &landscape, &point) {
        Ok(v) => Some(v),
        Err(Error::UndefinedAtCriticality(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ThermoPoint {
        psi: pressure_at(params, &landscape, &point),
        magnetization: 2.0 * point.s_star,
        susceptibility: susceptibility_at(params, &landscape, &point)?,
        specific_heat,
        point,
    })
}
