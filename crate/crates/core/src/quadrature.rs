//! Composite Gauss–Legendre quadrature with adaptive panel bisection.

use std::sync::OnceLock;

/// Nodes per panel.
pub const NODES: usize = 64;

/// Default absolute tolerance for the integrals in this crate.
pub const DEFAULT_TOL: f64 = 1e-13;

const MAX_DEPTH: u32 = 30;

#[derive(Debug)]
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(NODES).into())
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Newton iteration on `P_n` from the Tricomi initial guesses.
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

impl From<(Vec<f64>, Vec<f64>)> for Rule {
    fn from((nodes, weights): (Vec<f64>, Vec<f64>)) -> Self {
        Rule { nodes, weights }
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    r.nodes.iter().zip(&r.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// A panel is accepted when its 64-node value agrees with the sum over its two halves.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let whole = panel(&f, a, b);
    adapt(&f, a, b, whole, tol, 0)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let split = left + right;
    // below a few ulps of the panel value the comparison is rounding noise
    let floor = 8.0 * f64::EPSILON * split.abs();
    if (split - whole).abs() <= tol.max(floor) || depth >= MAX_DEPTH {
        return split;
    }
    adapt(f, a, mid, left, 0.5 * tol, depth + 1) + adapt(f, mid, b, right, 0.5 * tol, depth + 1)
}

/// Integrate over the real line, for integrands that decay at least like `exp(-c|y|)`.
///
/// The range doubles outward until the integrand drops below `1e-300`, then each
/// panel goes through [`integrate`].
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let mut lo = -1.0;
    while f(lo) > 1e-300 && lo > -1e6 {
        lo *= 2.0;
    }
    let mut hi = 1.0;
    while f(hi) > 1e-300 && hi < 1e6 {
        hi *= 2.0;
    }
    // about 64 equal panels, none narrower than 0.5
    let mut total = 0.0;
    let mut edges = vec![lo];
    let step = ((hi - lo) / 64.0).max(0.5);
    let mut x = lo + step;
    while x < hi {
        edges.push(x);
        x += step;
    }
    edges.push(hi);
    for w in edges.windows(2) {
        total += integrate(&f, w[0], w[1], tol / edges.len() as f64);
    }
    total
}
