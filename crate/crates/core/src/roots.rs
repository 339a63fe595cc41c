//! Bracketed bisection followed by Newton polishing.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Bisect until the bracket is narrower than this.
    pub bracket_width: f64,
    /// Newton stops once `|f| <= residual`.
    pub residual: f64,
    pub max_newton: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { bracket_width: 1e-8, residual: 1e-12, max_newton: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
}

/// Find a root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite sign.
///
/// Newton steps that leave the current bracket fall back to bisection, so the
/// returned point always lies inside the original interval.
pub fn bisect_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, opts: RootOptions) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::RootBracket(format!("f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign")));
    }

    while hi - lo > opts.bracket_width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(Root { x: mid, residual: 0.0 });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    let mut best = Root { x, residual: fx.abs() };
    for _ in 0..opts.max_newton {
        if fx.abs() <= opts.residual {
            break;
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        let slope = df(x);
        let mut next = x - fx / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
        fx = f(x);
        if fx.abs() < best.residual {
            best = Root { x, residual: fx.abs() };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_newton(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, RootOptions::default()).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn flat_cubic_root() {
        // f = (x - 0.3)^3 has a triple root; Newton alone converges linearly
        let f = |x: f64| (x - 0.3).powi(3) + 1e-3 * (x - 0.3);
        let df = |x: f64| 3.0 * (x - 0.3).powi(2) + 1e-3;
        let r = bisect_newton(f, df, 0.0, 1.0, RootOptions::default()).unwrap();
        assert!((r.x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn same_sign_is_bracket_error() {
        let err = bisect_newton(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0, RootOptions::default());
        assert!(matches!(err, Err(Error::RootBracket(_))));
    }
}
