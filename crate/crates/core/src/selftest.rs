//! Built-in checks against closed forms that need no configuration.

use crate::dispersion::{DispersionProvider, OnTheFly};
use crate::error::Result;
use crate::modes::{solve_k, solve_mode, ModeOptions};
use crate::numerics::gauss_legendre;
use crate::specfun::{airy_ai, airy_ai_prime, fresnel_phi};
use crate::stratification::{ConstantN, StratificationField};
use crate::transport::source_constant;
use crate::waves::{Airy, Fresnel, WaveShape};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

const GAMMA_1_3: f64 = 2.678_938_534_707_747_6;
const GAMMA_2_3: f64 = 1.354_117_939_426_400_4;

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(name: &'static str, measured: f64, tolerance: f64) -> SelfCheck {
    SelfCheck {
        name,
        measured,
        tolerance,
        passed: measured <= tolerance,
    }
}

/// Brute-force `Φ(σ) = ∫₀^∞ cos(σt + t²/2) dt`: Gauss–Legendre panels up to
/// where the phase slope reaches 60, then two terms of the integrated tail.
fn phi_quadrature(sigma: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let slope_end = 60.0;
    let t_end = slope_end - sigma;
    let panels = (t_end * slope_end / 2.0).ceil() as usize;
    let width = t_end / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            let t = a + 0.5 * width * (xi + 1.0);
            acc += wi * (sigma * t + 0.5 * t * t).cos();
        }
    }
    acc *= 0.5 * width;
    let phase = sigma * t_end + 0.5 * t_end * t_end;
    acc - phase.sin() / slope_end + phase.cos() / slope_end.powi(3)
}

fn uniform_column() -> Result<StratificationField> {
    StratificationField::new(
        Arc::new(ConstantN { n0: 1.0, depth: PI }),
        (-10.0, 10.0),
        (-10.0, 10.0),
        10.0,
    )
}

/// Runs every check with tolerances multiplied by `scale`.
pub fn run(scale: f64) -> Result<Vec<SelfCheck>> {
    let mut out = Vec::new();

    let ai0 = 1.0 / (3f64.powf(2.0 / 3.0) * GAMMA_2_3);
    let aip0 = -1.0 / (3f64.powf(1.0 / 3.0) * GAMMA_1_3);
    out.push(check("airy_ai_at_zero", (airy_ai(0.0)? - ai0).abs(), 1e-9 * scale));
    out.push(check(
        "airy_ai_prime_at_zero",
        (airy_ai_prime(0.0)? - aip0).abs(),
        1e-9 * scale,
    ));

    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for s in [-8.0, -3.0, -0.5, 0.0, 0.7, 2.0, 5.0] {
        let d2 = (airy_ai_prime(s + h)? - airy_ai_prime(s - h)?) / (2.0 * h);
        worst = worst.max((d2 - s * airy_ai(s)?).abs());
    }
    out.push(check("airy_equation_residual", worst, 1e-6 * scale));

    let front = (fresnel_phi(0.0)? - PI.sqrt() / 2.0).abs();
    out.push(check("fresnel_phi_at_front", front, 1e-9 * scale));
    let mut worst: f64 = 0.0;
    for s in [-9.0, -4.0, -1.5, 0.5, 2.5, 6.0, 10.0] {
        worst = worst.max((fresnel_phi(s)? - phi_quadrature(s)).abs());
    }
    out.push(check("fresnel_phi_quadrature", worst, 1e-6 * scale));

    let field = uniform_column()?;
    let opts = ModeOptions::default();
    let mut worst_k: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    let mut worst_zeros = 0.0_f64;
    for n in 1..=3 {
        for w in [0.2, 0.6, 0.85] {
            let exact = n as f64 * w / (1.0 - w * w).sqrt();
            let k = solve_k(&field, w, 0.0, 0.0, n, &opts)?;
            worst_k = worst_k.max((k / exact - 1.0).abs());
            let m = solve_mode(&field, w, 0.0, 0.0, n, &opts)?;
            let c = (2.0 / (PI * (1.0 - w * w))).sqrt();
            for i in 0..m.f.len() {
                let z = m.z_at(i);
                worst_f = worst_f.max((m.f[i] - c * (n as f64 * (z + PI)).sin()).abs());
            }
            worst_zeros = worst_zeros.max((m.interior_zeros() as f64 - (n - 1) as f64).abs());
        }
    }
    out.push(check("uniform_k_closed_form", worst_k, 1e-6 * scale));
    out.push(check("uniform_eigenfunction", worst_f, 1e-7 * scale));
    out.push(check("eigenfunction_zero_count", worst_zeros, 0.0));

    let (w, v) = (0.6, 1.0);
    let provider = OnTheFly::new(field.clone(), 1, opts, 1e-4);
    let c2 = 2.0 / (PI * (1.0 - w * w));
    let (k0, vv) = (0.75, 0.45);
    let fs2 = c2 * FRAC_PI_4.cos().powi(2);
    let expected_airy = w.powi(4) * fs2 / (2.0 * v * k0 * k0 * k0 * vv);
    let expected_fresnel = w * w * fs2 / (2.0 * v * k0 * vv);
    let airy = source_constant(&provider, &field, &opts, -FRAC_PI_4, v, w, 0.0, &Airy, 1e-3)?;
    let fresnel = source_constant(&provider, &field, &opts, -FRAC_PI_4, v, w, 0.0, &Fresnel, 1e-3)?;
    out.push(check(
        "canonical_airy_source_constant",
        (airy.c / expected_airy - 1.0).abs(),
        1e-6 * scale,
    ));
    out.push(check(
        "canonical_fresnel_source_constant",
        (fresnel.c / expected_fresnel - 1.0).abs(),
        1e-6 * scale,
    ));
    let d = provider.eval(w, 0.0, 0.0)?;
    out.push(check(
        "canonical_k_omega",
        (d.k_omega / 1.953125 - 1.0).abs(),
        1e-6 * scale,
    ));
    let p = Airy.p_factor(&d, 1.0)?;
    out.push(check(
        "canonical_airy_p_factor",
        (p / (1.953125 / 0.5625) - 1.0).abs(),
        1e-6 * scale,
    ));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_at_unit_scale() {
        let checks = run(1.0).unwrap();
        for c in &checks {
            assert!(c.passed, "{} measured {:e} > {:e}", c.name, c.measured, c.tolerance);
        }
        assert!(run(0.0).unwrap().iter().any(|c| !c.passed));
    }
}
