use annealed_ising::cache::{Direct, GTableCache};
use annealed_ising::criticality::{
    fit_exponent_beta, fit_exponent_delta, fit_exponent_gamma, scaling_limit_check, taylor_check, ScalingLimit, Side,
};
use statrs::function::gamma::gamma;

#[test]
fn taylor_coefficients() {
    for d in [3u32, 4, 5, 8] {
        let r = taylor_check(d).unwrap();
        assert!(r.pass, "{r:?}");
    }
    let r = taylor_check(3).unwrap();
    assert!((r.estimates["H4"] + 64.0 / 9.0).abs() < 1e-6);
    assert!((r.estimates["F2"] - 4.0 / 3.0).abs() < 1e-10);
}

#[test]
fn magnetization_exponents() {
    let beta = fit_exponent_beta(3).unwrap();
    assert!(beta.exponent_ok(0.02) && beta.amplitude_ok(0.05), "{beta:?}");
    assert!(beta.r_squared >= 0.9999);
    assert!((beta.target_amplitude.unwrap() - 3.0 * 1.5f64.sqrt()).abs() < 1e-14);

    let delta = fit_exponent_delta(3).unwrap();
    assert!(delta.exponent_ok(0.01) && delta.amplitude_ok(0.05), "{delta:?}");
    assert!(delta.grid.windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn susceptibility_exponents() {
    for d in [3u32, 4] {
        let below = fit_exponent_gamma(d, Side::Below).unwrap();
        assert!(below.exponent_ok(0.02) && below.amplitude_ok(0.05), "{below:?}");
        let above = fit_exponent_gamma(d, Side::Above).unwrap();
        assert!(above.exponent_ok(0.02), "{above:?}");
        let measured = 1.0 / (2.0 * (d as f64 - 2.0));
        assert!((above.amplitude_estimate / measured - 1.0).abs() < 1e-3, "{above:?}");
    }
}

#[test]
fn quartic_limit_constants() {
    let s = ScalingLimit::new(3).unwrap();
    assert!((s.alpha_star + 8.0 / 27.0).abs() < 1e-15);
    assert!((s.moment4 - 13.5).abs() < 1e-12);
    assert!((s.moment2 - 54f64.sqrt() * gamma(0.75) / gamma(0.25)).abs() < 1e-12);
    assert!((s.moment2 - 2.4837).abs() < 1e-4);
    for d in [3u32, 4, 6] {
        let s = ScalingLimit::new(d).unwrap();
        let df = d as f64;
        assert!((s.moment4 - 3.0 * df * df / ((df - 1.0) * (df - 2.0))).abs() < 1e-12);
    }
}

#[test]
fn quartic_mgf_by_series() {
    // E[e^{rX}] = Σ_k r^{2k} E[X^{2k}] / (2k)!, E[X^{2k}] = a^{-k/2} Γ((2k+1)/4) / Γ(1/4)
    let s = ScalingLimit::new(3).unwrap();
    let a = s.quartic_coeff;
    for r in [0.5f64, 1.0, 2.0] {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 0..60 {
            if k > 0 {
                fact *= ((2 * k - 1) * (2 * k)) as f64;
            }
            let m = a.powf(-(k as f64) / 2.0) * gamma((2.0 * k as f64 + 1.0) / 4.0) / gamma(0.25);
            sum += r.powi(2 * k) * m / fact;
        }
        assert!((s.mgf(r) / sum - 1.0).abs() < 1e-11, "r={r}");
    }
}

#[test]
fn kolmogorov_distance_decreases() {
    let report = scaling_limit_check(3, &[250, 500, 1000], &Direct).unwrap();
    let ks: Vec<f64> = report.rows.iter().map(|r| r.ks_distance).collect();
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
    let m4: Vec<f64> = report.rows.iter().map(|r| (r.moment4 - 13.5).abs()).collect();
    assert!(m4.windows(2).all(|w| w[1] < w[0]), "{m4:?}");
}

#[test]
fn scaling_check_reads_through_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = GTableCache::new(dir.path());
    let a = scaling_limit_check(3, &[100, 200], &cache).unwrap();
    let b = scaling_limit_check(3, &[100, 200], &cache).unwrap();
    let c = scaling_limit_check(3, &[100, 200], &Direct).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn criticality_needs_finite_critical_point() {
    assert!(fit_exponent_beta(2).is_err());
    assert!(scaling_limit_check(2, &[10], &Direct).is_err());
    assert!(scaling_limit_check(3, &[11], &Direct).is_err());
}
