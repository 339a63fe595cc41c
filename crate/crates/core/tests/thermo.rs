use annealed_ising::criticality::{specific_heat_below_limit, specific_heat_jump};
use annealed_ising::finiten::{finite_pressure, LogWeightTable};
use annealed_ising::thermo::{
    critical_beta, find_t_plus, find_t_star, magnetization, maximizer, pressure, specific_heat, susceptibility,
    thermo_point, Landscape, ModelParams, RootKind,
};
use proptest::prelude::*;

fn params(d: u32, beta: f64, field: f64) -> ModelParams {
    ModelParams::new(d, beta, field).unwrap()
}

fn psi(d: u32, beta: f64, field: f64) -> f64 {
    pressure(&params(d, beta, field)).unwrap()
}

/// `∫_0^1 2d³(d−2) u(1−u²)/(d² + (4−4d)u²)^{3/2} du` via the substitution `z = d² − (4d−4)u²`.
fn below_limit_antiderivative(d: u32) -> f64 {
    let df = d as f64;
    let a = df * df;
    let b = 4.0 * df - 4.0;
    let prim = |z: f64| (b - a) * (-2.0 / z.sqrt()) + 2.0 * z.sqrt();
    2.0 * df.powi(3) * (df - 2.0) * (prim(a) - prim(a - b)) / (2.0 * b * b)
}

#[test]
fn infinite_temperature_pressure() {
    for field in [0.0, 0.05, 0.3, 1.7] {
        let expected = (2.0 * f64::cosh(field)).ln();
        assert!((psi(3, 0.0, field) - expected).abs() < 1e-12, "B={field}");
        let t = LogWeightTable::compute(3, 100, 0.0).unwrap();
        assert!((finite_pressure(&t, field) - expected).abs() < 1e-12);
    }
}

#[test]
fn infinite_temperature_susceptibility() {
    for d in [2, 3, 6] {
        assert!((susceptibility(&params(d, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn critical_pressure_value() {
    let bc = critical_beta(3).unwrap();
    let land = Landscape::new(3, bc).unwrap();
    let expected = 1.5 * bc + 2f64.ln() + 3.0 * land.rate(0.5).unwrap();
    assert!((psi(3, bc, 0.0) - expected).abs() < 1e-14);
}

#[test]
fn magnetization_is_field_derivative_of_pressure() {
    let h = 1e-5;
    let fd = (psi(3, 0.4, 0.2 + h) - psi(3, 0.4, 0.2 - h)) / (2.0 * h);
    assert!((magnetization(&params(3, 0.4, 0.2)).unwrap() - fd).abs() < 1e-8);
}

#[test]
fn susceptibility_is_second_field_derivative_of_pressure() {
    let h = 1e-4;
    for (d, beta, field) in [(3, 0.4, 0.2), (3, 0.8, 0.05), (4, 0.2, 0.5), (5, 1.0, 0.3)] {
        let fd = (psi(d, beta, field + h) - 2.0 * psi(d, beta, field) + psi(d, beta, field - h)) / (h * h);
        let chi = susceptibility(&params(d, beta, field)).unwrap();
        assert!((chi - fd).abs() < 1e-6, "d={d} beta={beta} B={field}: {chi} vs {fd}");
    }
}

#[test]
fn specific_heat_is_second_beta_derivative_of_pressure() {
    let h = 1e-4;
    for (d, beta, field) in [(3, 0.4, 0.2), (3, 0.8, 0.05), (3, 0.3, 0.0), (3, 0.7, 0.0), (4, 0.2, 0.5)] {
        let fd = (psi(d, beta + h, field) - 2.0 * psi(d, beta, field) + psi(d, beta - h, field)) / (h * h);
        let c = specific_heat(&params(d, beta, field)).unwrap();
        assert!((c - fd).abs() < 1e-6, "d={d} beta={beta} B={field}: {c} vs {fd}");
    }
}

#[test]
fn spontaneous_magnetization_amplitude() {
    let bc = critical_beta(3).unwrap();
    let m = magnetization(&params(3, bc + 1e-4, 0.0)).unwrap();
    let expected = 2.0 * (27.0 * 1e-4 / 8.0f64).sqrt();
    assert!((m / expected - 1.0).abs() < 0.05);
}

#[test]
fn critical_isotherm_amplitude() {
    let bc = critical_beta(3).unwrap();
    for field in [1e-9, 1e-8] {
        let p = find_t_star(&params(3, bc, field)).unwrap();
        let expected = (27.0 * field / 16.0f64).cbrt();
        assert!((p.s_star / expected - 1.0).abs() < 1e-2, "B={field}");
    }
}

#[test]
fn susceptibility_below_critical_point() {
    for d in [3u32, 4, 5] {
        let bc = critical_beta(d).unwrap();
        let delta = 1e-6;
        let chi = susceptibility(&params(d, bc - delta, 0.0)).unwrap();
        assert!((chi * delta * (d as f64 - 2.0) - 1.0).abs() < 1e-3, "d={d}");
    }
}

/// Above `β_c` the curvature at `t_+` is `−2` times the curvature at `1/2` to
/// leading order, so `χ(β_c + Δ) Δ → 1/(2(d − 2))`. The reference values come
/// from differences of the magnetization in `B`, which only use `∂_t H`.
#[test]
fn susceptibility_above_critical_point() {
    for d in [3u32, 4, 5] {
        let bc = critical_beta(d).unwrap();
        let delta = 1e-4;
        let beta = bc + delta;
        let h = 1e-9;
        let m = |b: f64| magnetization(&params(d, beta, b)).unwrap();
        let fd = (-3.0 * m(0.0) + 4.0 * m(h) - m(2.0 * h)) / (2.0 * h);
        let chi = susceptibility(&params(d, beta, 0.0)).unwrap();
        assert!((chi / fd - 1.0).abs() < 5e-3, "d={d}: {chi} vs {fd}");
        let amplitude = 1.0 / (2.0 * (d as f64 - 2.0));
        assert!((chi * delta / amplitude - 1.0).abs() < 1e-2, "d={d}: {}", chi * delta);
    }
}

#[test]
fn specific_heat_limit_below_matches_closed_form() {
    for d in [3u32, 4, 5] {
        let quad = specific_heat_below_limit(d);
        let closed = below_limit_antiderivative(d);
        assert!((quad - closed).abs() < 1e-12, "d={d}");
    }
    assert!((below_limit_antiderivative(3) - 1.125).abs() < 1e-14);
}

/// The one-sided limits differ by `(∂_tβ L)² / |∂_tt H(t_+)|`, which tends to
/// `3d²(d − 2)/(2(d − 1))`. Each side is checked against second differences of
/// the pressure, which never touch the cross-derivative formulas.
#[test]
fn specific_heat_jump_from_pressure_differences() {
    for d in [3u32, 4] {
        let bc = critical_beta(d).unwrap();
        let delta = 1e-3;
        let h = 1e-4;
        for beta in [bc - delta, bc + delta] {
            let fd = (psi(d, beta + h, 0.0) - 2.0 * psi(d, beta, 0.0) + psi(d, beta - h, 0.0)) / (h * h);
            assert!((specific_heat(&params(d, beta, 0.0)).unwrap() - fd).abs() < 1e-5, "d={d} beta={beta}");
        }
        let report = specific_heat_jump(d).unwrap();
        let df = d as f64;
        let jump = 3.0 * df * df * (df - 2.0) / (2.0 * (df - 1.0));
        assert!((report.estimates["jump"] - jump).abs() < 1e-3, "d={d}: {}", report.estimates["jump"]);
        assert!((report.estimates["below_limit"] - below_limit_antiderivative(d)).abs() < 1e-3);
    }
}

#[test]
fn specific_heat_undefined_exactly_at_criticality() {
    let bc = critical_beta(3).unwrap();
    let tp = thermo_point(&params(3, bc, 0.0)).unwrap();
    assert!(tp.specific_heat.is_none());
    assert!(tp.susceptibility.is_infinite());
    assert_eq!(tp.magnetization, 0.0);
}

#[test]
fn concave_at_critical_point() {
    for d in [3u32, 4, 7] {
        let land = Landscape::new(d, critical_beta(d).unwrap()).unwrap();
        for i in 1..1000 {
            let t = i as f64 * 1e-3;
            assert!(land.d2h(t).unwrap() <= 1e-12, "d={d} t={t}");
        }
    }
}

fn sign_changes(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

#[test]
fn unique_stationary_points() {
    for (d, beta, field) in [(3, 0.3, 0.01), (3, 0.9, 0.2), (4, 0.35, 1e-4), (5, 0.3, 0.05)] {
        let land = Landscape::new(d, beta).unwrap();
        let vals: Vec<f64> = (501..1000).map(|i| land.dh(i as f64 * 1e-3).unwrap() + 2.0 * field).collect();
        assert_eq!(sign_changes(&vals), 1, "d={d} beta={beta} B={field}");
        let p = find_t_star(&params(d, beta, field)).unwrap();
        assert!(p.residual <= 1e-12);
        assert!(p.t_star > 0.5 && p.t_star < 1.0);
    }
    for (d, beta) in [(3, 0.6), (3, 1.2), (4, 0.5), (6, 0.4)] {
        let land = Landscape::new(d, beta).unwrap();
        let vals: Vec<f64> = (501..1000).map(|i| land.dh(i as f64 * 1e-3).unwrap()).collect();
        assert_eq!(sign_changes(&vals), 1, "d={d} beta={beta}");
        assert_eq!(find_t_plus(d, beta).unwrap().kind, RootKind::Spontaneous);
    }
}

#[test]
fn argmax_at_zero_field() {
    for (d, beta) in [(3u32, 0.2), (3, 0.5), (4, 0.3)] {
        let land = Landscape::new(d, beta).unwrap();
        let centre = land.h(0.5).unwrap();
        for i in 1..100 {
            assert!(land.h(i as f64 * 0.01).unwrap() <= centre + 1e-14);
        }
        assert_eq!(maximizer(&params(d, beta, 0.0)).unwrap().t_star, 0.5);
    }
    for (d, beta) in [(3u32, 0.6), (3, 1.0), (4, 0.5)] {
        let land = Landscape::new(d, beta).unwrap();
        let tp = find_t_plus(d, beta).unwrap().t_star;
        let top = land.h(tp).unwrap();
        assert!((land.h(1.0 - tp).unwrap() - top).abs() < 1e-12);
        assert!(top > land.h(0.5).unwrap());
        for i in 1..100 {
            assert!(land.h(i as f64 * 0.01).unwrap() <= top + 1e-14);
        }
    }
}

#[test]
fn magnetization_increases_with_field() {
    let ms: Vec<f64> = (1..40).map(|i| magnetization(&params(3, 0.45, i as f64 * 0.05)).unwrap()).collect();
    assert!(ms.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn two_regular_graphs_have_no_transition() {
    assert!(critical_beta(2).unwrap().is_infinite());
    assert_eq!(magnetization(&params(2, 5.0, 0.0)).unwrap(), 0.0);
    assert!(susceptibility(&params(2, 5.0, 0.0)).unwrap().is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn landscape_is_symmetric(d in 2u32..8, beta in 0.0f64..2.0, t in 0.001f64..0.5) {
        let land = Landscape::new(d, beta).unwrap();
        prop_assert!((land.h(t).unwrap() - land.h(1.0 - t).unwrap()).abs() < 1e-12);
        prop_assert!((land.rate(t).unwrap() - land.rate(1.0 - t).unwrap()).abs() < 1e-12);
        prop_assert!((land.dh(t).unwrap() + land.dh(1.0 - t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn first_derivative_matches_differences(d in 2u32..8, beta in 0.01f64..2.0, t in 0.01f64..0.99) {
        let land = Landscape::new(d, beta).unwrap();
        let h = 1e-6;
        let fd = (land.h(t + h).unwrap() - land.h(t - h).unwrap()) / (2.0 * h);
        let exact = land.dh(t).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-2), "{} vs {}", fd, exact);
    }

    #[test]
    fn second_derivative_matches_differences(d in 2u32..8, beta in 0.0f64..2.0, t in 0.01f64..0.99) {
        let land = Landscape::new(d, beta).unwrap();
        let h = 1e-6;
        let fd = (land.dh(t + h).unwrap() - land.dh(t - h).unwrap()) / (2.0 * h);
        let exact = land.d2h(t).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-2), "{} vs {}", fd, exact);
    }
}
