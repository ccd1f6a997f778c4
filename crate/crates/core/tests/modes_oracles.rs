//! Mode solver against the uniform-N closed forms
//! `K = (nπ/h)·ω/√(N² − ω²)` and `K'_ω = (nπ/h)·N²/(N² − ω²)^{3/2}`.

use igwave::modes::{domega_derivative, solve_k, solve_mode, ModeOptions};
use igwave::stratification::{ConstantN, Modulation, StratificationField, Thermocline};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn uniform(n0: f64, h: f64) -> StratificationField {
    StratificationField::new(Arc::new(ConstantN { n0, depth: h }), (-10.0, 10.0), (-10.0, 10.0), 10.0).unwrap()
}

fn thermocline() -> StratificationField {
    StratificationField::new(
        Arc::new(Thermocline {
            n_peak: 1.0,
            n_background: 0.35,
            center_depth: 0.9,
            width: 0.4,
            depth: PI,
            modulation: Modulation {
                amplitude: 0.1,
                scale: 50.0 * PI,
            },
        }),
        (-100.0, 100.0),
        (-100.0, 100.0),
        10.0,
    )
    .unwrap()
}

fn k_exact(n: usize, n0: f64, h: f64, w: f64) -> f64 {
    n as f64 * PI / h * w / (n0 * n0 - w * w).sqrt()
}

#[test]
fn k_matches_closed_form_for_three_modes_and_nine_frequencies() {
    let field = uniform(1.0, PI);
    let opts = ModeOptions::default();
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for i in 1..=9 {
            let w = 0.1 * i as f64;
            let m = solve_mode(&field, w, 0.0, 0.0, n, &opts).unwrap();
            let rel = (m.k / k_exact(n, 1.0, PI, w) - 1.0).abs();
            worst = worst.max(rel);
            assert!((m.norm_integral - 1.0).abs() <= 1e-8);
            assert_eq!(m.interior_zeros(), n - 1, "n={n} ω={w}");
        }
    }
    assert!(worst <= 1e-6, "worst relative K error {worst:e}");
}

#[test]
fn normalization_holds_against_an_independent_fine_quadrature() {
    // Re-integrate the interpolated mode on a grid 7 times finer.
    let field = thermocline();
    let m = solve_mode(&field, 0.3, 5.0, 2.0, 2, &ModeOptions::default()).unwrap();
    let steps = 14_000;
    let d = PI / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let z = if i == steps { 0.0 } else { -PI + i as f64 * d };
        let n2 = field.eval_n2(z, 5.0, 2.0).unwrap();
        let f = m.f_at(z).unwrap();
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (n2 - 0.09) * f * f;
    }
    acc *= d / 3.0;
    assert!((acc - 1.0).abs() <= 1e-8, "∫(N²−ω²)f² = {acc}");
}

#[test]
fn uniform_eigenfunction_is_the_normalized_sine() {
    let field = uniform(1.0, PI);
    let m = solve_mode(&field, 0.6, 0.0, 0.0, 1, &ModeOptions::default()).unwrap();
    let c = (2.0 / (PI * 0.64_f64)).sqrt();
    assert!((c - 0.997356).abs() < 5e-7);
    for i in 0..=40 {
        let z = -PI * i as f64 / 40.0;
        assert!((m.f_at(z).unwrap() + c * z.sin()).abs() < 1e-8, "z={z}");
    }
    let slope = m.df_dz_at(-PI / 4.0).unwrap();
    assert!((slope.abs() - c * (PI / 4.0).cos()).abs() < 1e-8);
    // the quoted six-digit value 0.705240 rounds c·cos(π/4) = 0.7052370
    assert!((slope.abs() - 0.705240).abs() < 5e-6);
    assert!(m.f_at(0.0).unwrap().abs() < 1e-12 && m.f_at(-PI).unwrap() == 0.0);
}

#[test]
fn domega_matches_closed_form() {
    let field = uniform(1.0, PI);
    let opts = ModeOptions::default();
    let d = domega_derivative(&field, 0.6, 0.0, 0.0, 1, &opts).unwrap();
    assert!((d / 1.953125 - 1.0).abs() <= 1e-6, "K'_ω = {d}");
    let d7 = domega_derivative(&field, 0.7, 0.0, 0.0, 1, &opts).unwrap();
    assert!(d7 > d);
    // ω → 0: K'_ω → nπ/(hN) = 1
    let d0 = domega_derivative(&field, 0.01, 0.0, 0.0, 1, &opts).unwrap();
    assert!((d0 - 1.0 / (1.0 - 1e-4_f64).powf(1.5)).abs() < 1e-6);
    for n in 1..=3 {
        let w: f64 = 0.45;
        let exact = n as f64 / (1.0 - w * w).powf(1.5);
        let got = domega_derivative(&field, w, 0.0, 0.0, n, &opts).unwrap();
        assert!((got / exact - 1.0).abs() <= 1e-6, "n={n}: {got} vs {exact}");
    }
}

#[test]
fn scaled_column_follows_the_closed_form() {
    let field = uniform(0.02, 120.0);
    let w = 0.011;
    let k = solve_k(&field, w, 0.0, 0.0, 2, &ModeOptions::default()).unwrap();
    assert!((k / k_exact(2, 0.02, 120.0, w) - 1.0).abs() <= 1e-6);
}

/// Numerov form of the discrete equation: fourth-order consistent, so the
/// residual measures solver error rather than truncation of a plain
/// second difference.
fn numerov_residual(m: &igwave::modes::ModeSolution) -> (f64, f64) {
    let d = m.step();
    let f2 = m.second_derivative();
    let mut worst: f64 = 0.0;
    for i in 1..m.f.len() - 1 {
        let lhs = (m.f[i + 1] - 2.0 * m.f[i] + m.f[i - 1]) / (d * d);
        let rhs = (f2[i + 1] + 10.0 * f2[i] + f2[i - 1]) / 12.0;
        worst = worst.max((lhs - rhs).abs());
    }
    let scale = f2.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    (worst, scale)
}

#[test]
fn discrete_equation_residual_is_small() {
    for field in [uniform(1.0, PI), thermocline()] {
        for n in 1..=3 {
            let m = solve_mode(&field, 0.3, 1.0, 0.0, n, &ModeOptions::default()).unwrap();
            let (r, s) = numerov_residual(&m);
            assert!(r <= 1e-6 * s, "n={n}: residual {r:e} vs max|f''| {s:e}");
        }
    }
}

#[test]
fn sign_change_of_integrand_is_flagged() {
    let field = thermocline();
    // ω above the background N: evanescent below and above the thermocline
    let m = solve_mode(&field, 0.5, 0.0, 0.0, 1, &ModeOptions::default()).unwrap();
    assert!(m.integrand_sign_change);
    assert!((m.norm_integral - 1.0).abs() <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenvalues_increase_with_mode_index(w in 0.05f64..0.9, x in -50.0f64..50.0) {
        let field = thermocline();
        let opts = ModeOptions::default();
        let k: Vec<f64> = (1..=3).map(|n| solve_k(&field, w, x, 0.0, n, &opts).unwrap()).collect();
        prop_assert!(k[0] > 0.0 && k[0] < k[1] && k[1] < k[2]);
    }

    #[test]
    fn shooting_slope_does_not_change_the_mode(slope in 1e-3f64..1e3, n in 1usize..4) {
        let field = thermocline();
        let base = solve_mode(&field, 0.4, 3.0, 1.0, n, &ModeOptions::default()).unwrap();
        let opts = ModeOptions { shooting_slope: slope, ..ModeOptions::default() };
        let other = solve_mode(&field, 0.4, 3.0, 1.0, n, &opts).unwrap();
        prop_assert!((base.k - other.k).abs() <= 1e-12 * base.k);
        let peak = base.f.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for (a, b) in base.f.iter().zip(&other.f) {
            prop_assert!((a - b).abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn sturm_count_matches_mode_index(w in 0.05f64..0.9, n in 1usize..5) {
        let m = solve_mode(&thermocline(), w, 0.0, 0.0, n, &ModeOptions::default()).unwrap();
        prop_assert_eq!(m.interior_zeros(), n - 1);
        prop_assert!(m.df[0] > 0.0);
    }
}
