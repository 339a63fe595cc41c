//! Cross-edge counts of uniform perfect matchings.
//!
//! For a uniform perfect matching on `m` points with a distinguished set of
//! size `k`, `X(k, m)` is the number of matched pairs with exactly one end in
//! the set. The transform `g_β(k, m) = E[exp(-2β X(k, m))]` is the weight that
//! turns the random-graph average into a scalar function of the number of plus
//! spins.
//!
//! The number of matchings with exactly `x` cross pairs is
//! `C(k, x) C(m-k, x) x! (k-x-1)!! (m-k-x-1)!!`: choose the crossing points on
//! each side, pair them up, then match the rest internally on each side.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{log_sum_exp, LnFactorials};

/// Largest `m` accepted by [`brute_force_law`].
pub const BRUTE_FORCE_MAX_M: usize = 14;

/// Exact law of `X(k, m)`, stored in log space over its support.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingLaw {
    k: usize,
    m: usize,
    /// `(x, ln P(X = x))`, ascending in `x`.
    log_prob: Vec<(usize, f64)>,
}

impl MatchingLaw {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.log_prob
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.log_prob.iter().map(|&(x, _)| x)
    }

    /// `ln P(X = x)`, `-inf` off the support.
    pub fn log_prob(&self, x: usize) -> f64 {
        self.log_prob.binary_search_by_key(&x, |&(y, _)| y).map(|i| self.log_prob[i].1).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.log_prob(x).exp()
    }

    /// `ln E[exp(-2β X)]`.
    pub fn log_g(&self, beta: f64) -> f64 {
        log_sum_exp(self.log_prob.iter().map(|&(x, lp)| lp - 2.0 * beta * x as f64)).min(0.0)
    }
}

fn check_km(k: usize, m: usize) -> Result<()> {
    if !m.is_multiple_of(2) {
        return Err(Error::Parity(format!("m = {m} is odd; a perfect matching needs an even number of points")));
    }
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if k > m {
        return Err(Error::Domain(format!("k = {k} exceeds m = {m}")));
    }
    Ok(())
}

/// Support of `X(k, m)`: `x ≡ k (mod 2)`, `0 ≤ x ≤ min(k, m-k)`.
fn support(k: usize, m: usize) -> impl Iterator<Item = usize> {
    (k % 2..=k.min(m - k)).step_by(2)
}

#[inline]
fn log_prob_with(table: &LnFactorials, k: usize, m: usize, x: usize) -> f64 {
    table.ln_binomial(k, x)
        + table.ln_binomial(m - k, x)
        + table.ln_factorial(x)
        + table.ln_odd_double_factorial(k - x)
        + table.ln_odd_double_factorial(m - k - x)
        - table.ln_odd_double_factorial(m)
}

/// Closed-form law of `X(k, m)` via log-gamma.
pub fn cross_count_law(k: usize, m: usize) -> Result<MatchingLaw> {
    check_km(k, m)?;
    let table = LnFactorials::new(m);
    Ok(law_with(&table, k, m))
}

fn law_with(table: &LnFactorials, k: usize, m: usize) -> MatchingLaw {
    let log_prob = support(k, m).map(|x| (x, log_prob_with(table, k, m, x))).collect();
    MatchingLaw { k, m, log_prob }
}

/// Law of `X(k, m)` by enumerating all `(m-1)!!` perfect matchings.
pub fn brute_force_law(k: usize, m: usize) -> Result<MatchingLaw> {
    check_km(k, m)?;
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::Size(format!("brute force enumeration limited to m <= {BRUTE_FORCE_MAX_M}, got {m}")));
    }
    let mut counts = vec![0u64; m / 2 + 1];
    let mut unmatched: Vec<usize> = (0..m).collect();
    enumerate(&mut unmatched, k, 0, &mut counts);
    let total: u64 = counts.iter().sum();
    let ln_total = (total as f64).ln();
    let log_prob =
        counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(x, &c)| (x, (c as f64).ln() - ln_total)).collect();
    Ok(MatchingLaw { k, m, log_prob })
}

fn enumerate(unmatched: &mut Vec<usize>, k: usize, crossings: usize, counts: &mut [u64]) {
    if unmatched.is_empty() {
        counts[crossings] += 1;
        return;
    }
    let first = unmatched.remove(0);
    for i in 0..unmatched.len() {
        let partner = unmatched.remove(i);
        let cross = usize::from((first < k) != (partner < k));
        enumerate(unmatched, k, crossings + cross, counts);
        unmatched.insert(i, partner);
    }
    unmatched.insert(0, first);
}

/// Draws `X(k, m)` by sequential uniform pairing.
#[derive(Debug, Clone)]
pub struct CrossCountSampler {
    rng: ChaCha8Rng,
    scratch: Vec<usize>,
}

impl CrossCountSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), scratch: Vec::new() }
    }

    pub fn sample(&mut self, k: usize, m: usize) -> Result<usize> {
        check_km(k, m)?;
        self.scratch.clear();
        self.scratch.extend(0..m);
        let mut crossings = 0;
        while let Some(first) = self.scratch.pop() {
            let idx = self.rng.random_range(0..self.scratch.len());
            let partner = self.scratch.swap_remove(idx);
            if (first < k) != (partner < k) {
                crossings += 1;
            }
        }
        Ok(crossings)
    }

    /// Monte Carlo estimate of `g_β(k, m)` with its standard error.
    pub fn estimate_g(&mut self, k: usize, m: usize, beta: f64, samples: usize) -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let w = (-2.0 * beta * self.sample(k, m)? as f64).exp();
            sum += w;
            sum_sq += w * w;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }
}

/// One draw of `X(k, m)` from a matching seeded by `seed`.
pub fn sample_cross_count(k: usize, m: usize, seed: u64) -> Result<usize> {
    CrossCountSampler::new(seed).sample(k, m)
}

/// `ln g_β(dj, dn)` for `j = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogG {
    pub d: u32,
    pub n: usize,
    pub beta: f64,
    pub values: Vec<f64>,
}

impl LogG {
    pub fn matches(&self, d: u32, n: usize, beta: f64) -> bool {
        self.d == d && self.n == n && self.beta == beta && self.values.len() == n + 1
    }
}

pub(crate) fn check_dnb(d: u32, n: usize, beta: f64) -> Result<()> {
    if d < 1 || n < 1 {
        return Err(Error::Domain(format!("need d >= 1 and n >= 1, got d = {d}, n = {n}")));
    }
    if !(d as usize * n).is_multiple_of(2) {
        return Err(Error::Parity(format!("d*n = {} is odd; no perfect matching of half-edges", d as usize * n)));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be finite and nonnegative, got {beta}")));
    }
    Ok(())
}

/// Builds the `ln g_β(dj, dn)` table. Work is O(d n^2) and runs in parallel over `j`.
pub fn log_g_table(d: u32, n: usize, beta: f64) -> Result<LogG> {
    check_dnb(d, n, beta)?;
    let m = d as usize * n;
    if beta == 0.0 {
        return Ok(LogG { d, n, beta, values: vec![0.0; n + 1] });
    }
    let table = LnFactorials::new(m);
    let half: Vec<f64> = (0..=n / 2)
        .into_par_iter()
        .map(|j| {
            let k = d as usize * j;
            let terms: Vec<f64> =
                support(k, m).map(|x| log_prob_with(&table, k, m, x) - 2.0 * beta * x as f64).collect();
            log_sum_exp(terms.iter().copied()).min(0.0)
        })
        .collect();
    let values = (0..=n).map(|j| half[j.min(n - j)]).collect();
    Ok(LogG { d, n, beta, values })
}
