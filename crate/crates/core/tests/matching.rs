use annealed_ising::matching::{brute_force_law, cross_count_law, log_g_table, sample_cross_count, CrossCountSampler};
use annealed_ising::Error;
use proptest::prelude::*;

#[test]
fn closed_form_matches_enumeration_up_to_twelve_points() {
    for m in (2..=12).step_by(2) {
        for k in 0..=m {
            let exact = cross_count_law(k, m).unwrap();
            let brute = brute_force_law(k, m).unwrap();
            assert!(exact.support().eq(brute.support()), "support differs at k={k} m={m}");
            for &(x, lp) in brute.entries() {
                assert!((exact.log_prob(x) - lp).abs() <= 1e-12, "k={k} m={m} x={x}");
            }
        }
    }
}

#[test]
fn two_of_four_frequency() {
    let mut sampler = CrossCountSampler::new(11);
    let draws = 1_000_000;
    let hits = (0..draws).filter(|_| sampler.sample(2, 4).unwrap() == 2).count();
    assert!((hits as f64 / draws as f64 - 2.0 / 3.0).abs() < 3e-3);
}

#[test]
fn monte_carlo_transform_within_four_standard_errors() {
    let mut sampler = CrossCountSampler::new(3);
    for (k, m, beta) in [(4, 10, 0.7), (6, 18, 0.3), (15, 40, 0.25)] {
        let (mean, se) = sampler.estimate_g(k, m, beta, 100_000).unwrap();
        let exact = cross_count_law(k, m).unwrap().log_g(beta).exp();
        assert!((mean - exact).abs() <= 4.0 * se, "k={k} m={m}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn sampler_is_reproducible() {
    let a: Vec<usize> = (0..50).map(|s| sample_cross_count(7, 20, s).unwrap()).collect();
    let b: Vec<usize> = (0..50).map(|s| sample_cross_count(7, 20, s).unwrap()).collect();
    assert_eq!(a, b);
    assert!(a.iter().all(|&x| x % 2 == 1 && x <= 7));
}

#[test]
fn table_rejects_odd_half_edge_count() {
    assert!(matches!(log_g_table(3, 33, 0.5), Err(Error::Parity(_))));
    assert!(matches!(log_g_table(3, 10, -0.1), Err(Error::Domain(_))));
}

#[test]
fn table_matches_law_entries() {
    let g = log_g_table(3, 40, 0.37).unwrap();
    for j in [0, 1, 7, 20, 33, 40] {
        let direct = cross_count_law(3 * j, 120).unwrap().log_g(0.37);
        assert!((g.values[j] - direct).abs() < 1e-12, "j={j}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn law_is_normalized_and_complement_symmetric(half in 1usize..200, frac in 0.0f64..1.0) {
        let m = 2 * half;
        let k = ((m as f64) * frac) as usize;
        let law = cross_count_law(k, m).unwrap();
        let total: f64 = law.entries().iter().map(|(_, lp)| lp.exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mirror = cross_count_law(m - k, m).unwrap();
        for &(x, lp) in law.entries() {
            prop_assert!((mirror.log_prob(x) - lp).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_decreases_in_beta(half in 1usize..100, frac in 0.0f64..1.0, b in 0.0f64..2.0, db in 0.01f64..1.0) {
        let m = 2 * half;
        let k = ((m as f64) * frac) as usize;
        let law = cross_count_law(k, m).unwrap();
        let lo = law.log_g(b);
        let hi = law.log_g(b + db);
        prop_assert!(lo <= 0.0);
        if law.support().any(|x| x > 0) {
            prop_assert!(hi < lo);
        } else {
            prop_assert_eq!(hi, lo);
        }
    }

    #[test]
    fn table_is_symmetric(n in 1usize..120, beta in 0.0f64..1.5) {
        let d = if n % 2 == 0 { 3 } else { 4 };
        let g = log_g_table(d, n, beta).unwrap();
        prop_assert_eq!(g.values.len(), n + 1);
        for j in 0..=n {
            prop_assert_eq!(g.values[j], g.values[n - j]);
            prop_assert!(g.values[j] <= 0.0 && g.values[j].is_finite());
        }
    }
}
