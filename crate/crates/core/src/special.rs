//! Log-space combinatorics and reductions.

use statrs::function::gamma::ln_gamma;

/// `ln(i!)` for `i = 0..=max`, one log-gamma evaluation per entry.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let table = (0..=max).map(|i| ln_gamma(i as f64 + 1.0)).collect();
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, i: usize) -> f64 {
        self.table[i]
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n);
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// `ln((e - 1)!!)` for even `e`, with `(-1)!! = 1`.
    ///
    /// Uses `(2q - 1)!! = (2q)! / (2^q q!)`.
    #[inline]
    pub fn ln_odd_double_factorial(&self, e: usize) -> f64 {
        debug_assert!(e.is_multiple_of(2));
        let q = e / 2;
        self.table[e] - q as f64 * std::f64::consts::LN_2 - self.table[q]
    }
}

/// `ln((e - 1)!!)` for even `e` without a table.
pub fn ln_odd_double_factorial(e: usize) -> f64 {
    debug_assert!(e.is_multiple_of(2));
    let q = (e / 2) as f64;
    ln_gamma(2.0 * q + 1.0) - q * std::f64::consts::LN_2 - ln_gamma(q + 1.0)
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Max-shifted `ln Σ exp(v_i)`. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = values.into_iter();
    let max = iter.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = iter.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
