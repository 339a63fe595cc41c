//! Verification checks for the matching law and the finite-`n` engine.

use crate::cache::GTableSource;
use crate::criticality::{CheckReport, MGF_RS};
use crate::error::Result;
use crate::finiten::{
    finite_pressure, ratio_formula_deviation, remainder_lipschitz, spin_law, truncation_check, LogWeightTable,
};
use crate::matching::{brute_force_law, cross_count_law, CrossCountSampler};
use crate::thermo::{critical_beta, pressure, susceptibility, ModelParams};

pub const ORACLE_MAX_M: usize = 12;
pub const ORACLE_TOL: f64 = 1e-12;
pub const TRUNCATION_N_LIST: [usize; 2] = [500, 1000];
pub const WINDOW_EXPONENT: f64 = 5.0 / 6.0;
pub const REMAINDER_N_LIST: [usize; 4] = [50, 100, 200, 400];
pub const GAP_N_LIST: [usize; 4] = [250, 500, 1000, 2000];
pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const FREE_SPIN_TOL: f64 = 1e-12;
pub const RATIO_TOL: f64 = 1e-6;
pub const RATIO_N_LIST: [usize; 2] = [200, 400];

/// Subcritical inverse temperature used for the finite-`n` checks.
fn subcritical_beta(d: u32) -> Result<f64> {
    Ok(if d == 3 { 0.4 } else { 0.73 * critical_beta(d)? })
}

fn table(source: &(dyn GTableSource + Sync), d: u32, n: usize, beta: f64) -> Result<LogWeightTable> {
    LogWeightTable::new(d, n, beta, &source.log_g(d, n, beta)?)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Closed-form law against enumeration for every `(k, m)` with even `m ≤ max_m`.
pub fn matching_oracle(max_m: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("matching_oracle", 0);
    let mut worst: f64 = 0.0;
    let mut supports_agree = true;
    for m in (2..=max_m).step_by(2) {
        r.grid.push(m as f64);
        for k in 0..=m {
            let exact = cross_count_law(k, m)?;
            let brute = brute_force_law(k, m)?;
            supports_agree &= exact.support().eq(brute.support());
            for &(x, lp) in brute.entries() {
                worst = worst.max((exact.log_prob(x) - lp).abs());
            }
        }
    }
    r.compare_abs("max_log_prob_error", worst, 0.0, ORACLE_TOL);
    r.record("supports_agree", supports_agree);
    Ok(r)
}

/// Sampler against the exact law: `P(X(2,4) = 2)` and several `g_β(k, m)`.
pub fn matching_monte_carlo(seed: u64) -> Result<CheckReport> {
    let mut r = CheckReport::new("matching_monte_carlo", 0);
    let mut sampler = CrossCountSampler::new(seed);
    let draws = 1_000_000;
    let mut hits = 0usize;
    for _ in 0..draws {
        hits += usize::from(sampler.sample(2, 4)? == 2);
    }
    r.compare_abs("p_x2_k2_m4", hits as f64 / draws as f64, 2.0 / 3.0, 3e-3);
    for (k, m, beta) in [(6usize, 18usize, 0.3f64), (9, 30, 0.5), (20, 60, 0.2)] {
        let (mean, se) = sampler.estimate_g(k, m, beta, 100_000)?;
        let exact = cross_count_law(k, m)?.log_g(beta).exp();
        r.compare_abs(&format!("g_k{k}_m{m}"), mean, exact, 4.0 * se);
    }
    Ok(r)
}

/// Empirical Lipschitz constant of `r_j = ln g − n d F(j/n)`, which should level off in `n`.
///
/// The fitted bound extrapolates the increments as a geometric series; the check
/// passes when the increments shrink.
pub fn remainder_bound(d: u32, source: &(dyn GTableSource + Sync)) -> Result<CheckReport> {
    let mut r = CheckReport::new("remainder_bound", d);
    r.grid = REMAINDER_N_LIST.iter().map(|&n| n as f64).collect();
    for (label, beta) in [("subcritical", subcritical_beta(d)?), ("critical", critical_beta(d)?)] {
        let bounds = REMAINDER_N_LIST
            .iter()
            .map(|&n| remainder_lipschitz(&table(source, d, n, beta)?))
            .collect::<Result<Vec<_>>>()?;
        for (n, b) in REMAINDER_N_LIST.iter().zip(&bounds) {
            r.estimates.insert(format!("{label}_n{n}"), *b);
        }
        let inc: Vec<f64> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
        let last = *bounds.last().unwrap_or(&0.0);
        let (q, limit) = match inc.as_slice() {
            [.., a, b] if *b > 0.0 => {
                let q = b / a;
                (q, if q < 1.0 { last + b * q / (1.0 - q) } else { f64::INFINITY })
            }
            _ => (0.0, last),
        };
        r.estimates.insert(format!("{label}_increment_ratio"), q);
        r.estimates.insert(format!("{label}_fitted_bound"), limit);
        r.record(&format!("{label}_levels_off"), inc.iter().all(|&x| x <= 0.0) || strictly_decreasing(&inc));
    }
    Ok(r)
}

/// Tail mass outside `|j − n/2| ≤ n^{5/6}` and the windowed mgf at `(β_c, 0)`.
pub fn truncation(d: u32, n_list: &[usize], source: &(dyn GTableSource + Sync)) -> Result<CheckReport> {
    let beta_c = critical_beta(d)?;
    let mut r = CheckReport::new("truncation", d);
    r.grid = n_list.iter().map(|&n| n as f64).collect();
    let mut tails = Vec::new();
    for &n in n_list {
        let rep = truncation_check(&table(source, d, n, beta_c)?, WINDOW_EXPONENT, &MGF_RS)?;
        r.compare_abs(&format!("tail_mass_n{n}"), rep.tail_mass, 0.0, rep.tail_threshold);
        r.compare_abs(&format!("mgf_gap_n{n}"), rep.max_mgf_gap, 0.0, rep.mgf_tolerance);
        tails.push(rep.tail_mass);
    }
    r.record("tail_decreasing", strictly_decreasing(&tails));
    Ok(r)
}

/// Derivative identities, convergence of `ψ_n`, free-spin closed forms, the ratio
/// formula, and the Gaussian regime below `β_c`.
pub fn finite_n(d: u32, source: &(dyn GTableSource + Sync)) -> Result<Vec<CheckReport>> {
    let beta = subcritical_beta(d)?;
    let beta_c = critical_beta(d)?;
    let field = 0.1;
    let mut out = Vec::new();

    let mut r = CheckReport::new("finiten_derivatives", d);
    let t = table(source, d, 500, beta)?;
    r.grid = vec![500.0];
    let psi = |b: f64| finite_pressure(&t, b);
    let law = spin_law(&t, field);
    let h1 = 1e-5;
    let m_fd = (psi(field + h1) - psi(field - h1)) / (2.0 * h1);
    r.compare_abs("magnetization", law.magnetization(), m_fd, DERIVATIVE_TOL);
    let h2 = 1e-4;
    let chi_fd = (psi(field + h2) - 2.0 * psi(field) + psi(field - h2)) / (h2 * h2);
    r.compare_abs("susceptibility", law.variance() / 500.0, chi_fd, DERIVATIVE_TOL);
    out.push(r);

    let mut r = CheckReport::new("finiten_pressure_gap", d);
    r.grid = GAP_N_LIST.iter().map(|&n| n as f64).collect();
    let limit = pressure(&ModelParams::new(d, beta, field)?)?;
    r.targets.insert("psi".into(), limit);
    let mut gaps = Vec::new();
    for &n in &GAP_N_LIST {
        let gap = (finite_pressure(&table(source, d, n, beta)?, field) - limit).abs();
        r.estimates.insert(format!("gap_n{n}"), gap);
        gaps.push(gap);
    }
    r.record("gap_decreasing", strictly_decreasing(&gaps));
    out.push(r);

    let mut r = CheckReport::new("finiten_free_spins", d);
    let free = LogWeightTable::compute(d, 100, 0.0)?;
    r.grid = vec![100.0];
    r.compare_abs("psi_B0", finite_pressure(&free, 0.0), 2f64.ln(), FREE_SPIN_TOL);
    r.compare_abs("psi_B0.3", finite_pressure(&free, 0.3), (2.0 * 0.3f64.cosh()).ln(), FREE_SPIN_TOL);
    r.compare_abs("chi_B0", spin_law(&free, 0.0).variance() / 100.0, 1.0, FREE_SPIN_TOL);
    out.push(r);

    let mut r = CheckReport::new("finiten_ratio_formula", d);
    r.grid = RATIO_N_LIST.iter().map(|&n| n as f64).collect();
    for (label, b) in [("subcritical", beta), ("critical", beta_c)] {
        for &n in &RATIO_N_LIST {
            let dev = ratio_formula_deviation(&table(source, d, n, b)?, WINDOW_EXPONENT)?;
            r.compare_abs(&format!("{label}_n{n}"), dev, 0.0, RATIO_TOL);
        }
    }
    out.push(r);

    let mut r = CheckReport::new("finiten_gaussian_regime", d);
    r.grid = GAP_N_LIST.iter().map(|&n| n as f64).collect();
    let chi = susceptibility(&ModelParams::new(d, beta, 0.0)?)?;
    r.targets.insert("chi".into(), chi);
    let mut gaps = Vec::new();
    for &n in &GAP_N_LIST {
        let chi_n = spin_law(&table(source, d, n, beta)?, 0.0).variance() / n as f64;
        r.estimates.insert(format!("chi_n{n}"), chi_n);
        gaps.push((chi_n - chi).abs());
    }
    r.record("chi_gap_decreasing", strictly_decreasing(&gaps));
    out.push(r);

    Ok(out)
}
