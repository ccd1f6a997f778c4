mod common;

use common::{homogeneous_field, lin, Analytic};
use igwave::modes::ModeOptions;
use igwave::rays::{trace_fan, FanSpec, RayFan, RayOptions};
use igwave::transport::{
    compute_transport, jacobian, source_constant, Quality, Transport, TransportInputs, TransportOptions,
};
use igwave::waves::{Airy, Fresnel, UnitSigma, WaveShape};
use std::f64::consts::PI;

const Z0: f64 = -PI / 4.0;

fn fan(omega: Vec<f64>, t0: Vec<f64>, speed: f64) -> RayFan {
    let spec = FanSpec {
        omega,
        t0,
        branches: vec![1, -1],
        speed,
        t_obs: 40.0,
        dt_out: 2.0,
    };
    trace_fan(&Analytic::CANONICAL, &spec, &RayOptions::default()).unwrap()
}

fn transport(fan: &RayFan, wave: &dyn WaveShape) -> Transport {
    let field = homogeneous_field(100.0);
    let inp = TransportInputs {
        fan,
        provider: &Analytic::CANONICAL,
        field: &field,
        mode_opts: &ModeOptions::default(),
        ray_opts: &RayOptions::default(),
        source_depth: Z0,
        wave,
        sigma: &UnitSigma,
    };
    compute_transport(&inp, &TransportOptions::default()).unwrap()
}

/// `D/(t − t0)` from differentiating `x = V·t0 + c_x(ω)(t − t0)`,
/// `y = c_y(ω)(t − t0)` by hand (N = 1, h = π, n = 1).
fn d_rate(omega: f64, speed: f64, branch: f64) -> f64 {
    let s = 1.0 - omega * omega;
    let k = omega / s.sqrt();
    let kw = s.powf(-1.5);
    let g = s * s / omega;
    let dg = (-4.0 * omega * omega * s - s * s) / (omega * omega);
    let v = (k * k - (omega / speed).powi(2)).sqrt();
    let dv = (k * kw - omega / (speed * speed)) / v;
    let cx = omega / speed * g;
    let dcx = -4.0 * omega * s / speed;
    let cy = branch * v * g;
    let dcy = branch * (dv * g + v * dg);
    branch * ((speed - cx) * dcy + dcx * cy)
}

#[test]
fn jacobian_matches_the_hand_differentiated_map() {
    let f = fan(lin(0.5, 0.7, 21), lin(0.0, 10.0, 11), 1.0);
    for (ib, b) in [(0, 1.0), (1, -1.0)] {
        let rate = d_rate(0.6, 1.0, b);
        let mut pts = Vec::new();
        for k in 0..f.times.len() {
            let Some(s) = f.sample(10, 4, ib, k) else { continue };
            if s.t <= 4.0 {
                continue;
            }
            let d = jacobian(&f, 10, 4, ib, k).unwrap().d;
            let exact = rate * (s.t - 4.0);
            assert!((d - exact).abs() <= 1e-6 * exact.abs(), "t = {}: {d} vs {exact}", s.t);
            pts.push((s.t - 4.0, d));
        }
        // least-squares line through the origin
        let slope = pts.iter().map(|(a, d)| a * d).sum::<f64>() / pts.iter().map(|(a, _)| a * a).sum::<f64>();
        let worst = pts
            .iter()
            .map(|(a, d)| (d - slope * a).abs() / d.abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-3, "linear fit residual {worst:e}");
    }
}

#[test]
fn psi_decays_as_inverse_square_root() {
    let f = fan(lin(0.5, 0.7, 21), lin(0.0, 10.0, 11), 1.0);
    for wave in [&Airy as &dyn WaveShape, &Fresnel] {
        let tr = transport(&f, wave);
        let pts: Vec<(f64, f64)> = (0..f.times.len())
            .filter_map(|k| tr.sample(&f, 10, 0, 0, k))
            .filter(|s| s.t >= 4.0 && s.quality == Quality::Ok)
            .map(|s| (s.t.ln(), s.psi.ln()))
            .collect();
        assert!(
            pts.last().unwrap().0 - pts[0].0 >= 10f64.ln() - 1e-12,
            "a decade in t − t0"
        );
        let n = pts.len() as f64;
        let (mx, my) = (
            pts.iter().map(|p| p.0).sum::<f64>() / n,
            pts.iter().map(|p| p.1).sum::<f64>() / n,
        );
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() <= 0.01, "{slope}");
    }
}

#[test]
fn conservation_holds_along_interior_rays() {
    let f = fan(lin(0.5, 0.7, 21), lin(0.0, 10.0, 11), 1.0);
    for wave in [&Airy as &dyn WaveShape, &Fresnel] {
        let tr = transport(&f, wave);
        let worst = tr.worst_residual().unwrap();
        assert!(worst <= 1e-3, "{worst:e}");
        let checked = (0..f.times.len())
            .filter(|&k| tr.sample(&f, 10, 4, 1, k).is_some_and(|s| s.residual.is_some()))
            .count();
        assert!(checked >= 10, "{checked}");
        // ψ²·D·P recomputed from the stored pieces at two times
        let a = tr.sample(&f, 10, 4, 1, 5).unwrap();
        let b = tr.sample(&f, 10, 4, 1, f.times.len() - 1).unwrap();
        let ia = a.psi * a.psi * a.d.abs() * a.p;
        let ib = b.psi * b.psi * b.d.abs() * b.p;
        assert!((ia - ib).abs() <= 1e-12 * ia);
    }
}

#[test]
fn launch_samples_and_fan_edges_are_flagged() {
    let f = fan(lin(0.5, 0.7, 21), lin(0.0, 10.0, 11), 1.0);
    let tr = transport(&f, &Fresnel);
    let launch = tr.sample(&f, 10, 4, 0, 2).unwrap();
    assert_eq!(launch.t, 4.0);
    assert!(launch.caustic && launch.quality == Quality::CausticMasked && launch.psi.is_nan());
    let edge = tr.sample(&f, 0, 4, 0, 10).unwrap();
    assert!(edge.downgraded && edge.residual.is_none());
    let next = tr.sample(&f, 1, 4, 0, 10).unwrap();
    assert!(!next.downgraded && next.residual.is_none() && next.quality == Quality::Ok);
}

#[test]
fn single_launch_time_uses_auxiliary_rays() {
    let f = fan(lin(0.5, 0.7, 21), vec![4.0], 1.0);
    let tr = transport(&f, &Fresnel);
    let s = tr.sample(&f, 10, 0, 0, f.times.len() - 1).unwrap();
    let exact = d_rate(0.6, 1.0, 1.0) * 36.0;
    assert!((s.d - exact).abs() <= 1e-4 * exact.abs(), "{} vs {exact}", s.d);
    assert_eq!(s.quality, Quality::Ok);
}

#[test]
fn canonical_source_constants() {
    let field = homogeneous_field(100.0);
    let opts = ModeOptions::default();
    let p = &Analytic::CANONICAL;
    let a = source_constant(p, &field, &opts, Z0, 1.0, 0.6, 0.0, &Airy, 1e-3).unwrap();
    let f = source_constant(p, &field, &opts, Z0, 1.0, 0.6, 0.0, &Fresnel, 1e-3).unwrap();
    assert!((a.c / 0.16977 - 1.0).abs() <= 1e-4, "{}", a.c);
    assert!((f.c / 0.26526 - 1.0).abs() <= 1e-4, "{}", f.c);
    assert!((a.launch.v - 0.45).abs() < 1e-12 && (a.launch.k0 - 0.75).abs() < 1e-12);
    assert!(!a.near_cone);
}

#[test]
fn source_constant_diverges_toward_the_mach_cone() {
    // V = 0.8 puts the cone at ω = √(1 − V²) = 0.6
    let field = homogeneous_field(100.0);
    let opts = ModeOptions::default();
    let omega = lin(0.6005, 0.7, 12);
    for wave in [&Airy as &dyn WaveShape, &Fresnel] {
        let c: Vec<f64> = omega
            .iter()
            .map(|&w| {
                source_constant(&Analytic::CANONICAL, &field, &opts, Z0, 0.8, w, 0.0, wave, 1e-3)
                    .unwrap()
                    .c
            })
            .collect();
        assert!(c[..5].windows(2).all(|w| w[0] > w[1]), "{c:?}");
        assert!(c[0] > 5.0 * c[11]);
    }
    let near = source_constant(&Analytic::CANONICAL, &field, &opts, Z0, 0.8, 0.60001, 0.0, &Airy, 1e-3).unwrap();
    assert!(near.near_cone);
    assert!(source_constant(&Analytic::CANONICAL, &field, &opts, Z0, 0.8, 0.59, 0.0, &Airy, 1e-3).is_err());
}

#[test]
fn missing_neighbours_make_the_jacobian_unavailable() {
    // the lowest ω of this fan lies inside the cone and never launches
    let f = fan(vec![0.55, 0.62, 0.64, 0.66], lin(0.0, 4.0, 5), 0.8);
    assert!(!f.ray(0, 2, 0).launched());
    assert!(jacobian(&f, 0, 2, 0, 3).is_err());
    let d = jacobian(&f, 1, 2, 0, 3).unwrap();
    assert!(d.downgraded && d.check.is_none());
}
