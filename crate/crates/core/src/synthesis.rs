//! Observable fields from the fan: the global Airy vertical velocity and the
//! global Fresnel rise, per mode, plus gridding of the scattered samples.

use crate::dispersion::DispersionProvider;
use crate::error::{Error, Result};
use crate::modes::{solve_mode, ModeOptions, ModeSolution};
use crate::rays::{FanRay, RayFan, RayState};
use crate::stratification::StratificationField;
use crate::transport::{Quality, Transport};
use crate::waves::{FrontOrientation, Local, WaveKind, WaveShape};
use rayon::prelude::*;
use serde::Serialize;

/// Below this `|σ_arg|` the leading asymptotic form is not used.
pub const WKB_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub mode: usize,
    pub wave_kind: WaveKind,
    pub omega: f64,
    pub t0: f64,
    pub branch: i8,
    pub s_star: f64,
    pub sigma_arg: f64,
    /// Closed-form amplitude (w0 or η0).
    pub amplitude: f64,
    /// `sgn(∂f/∂z0)·ψ` from the conservation law.
    pub chain_amplitude: f64,
    /// Eigenfunction at `(ω, x, y, z)`.
    pub eigen: f64,
    /// `Ai'(σ_arg)` or `Φ(σ_arg)`.
    pub special: f64,
    pub value: f64,
    pub quality: Quality,
}

/// Everything needed to turn one mode's fan into field samples.
pub struct ModeField<'a> {
    pub fan: &'a RayFan,
    pub transport: &'a Transport,
    pub provider: &'a dyn DispersionProvider,
    pub field: &'a StratificationField,
    pub mode_opts: &'a ModeOptions,
    pub wave: &'a dyn WaveShape,
    pub orientation: FrontOrientation,
}

/// A sample's ingredients before the special function is applied.
struct Parts {
    base: FieldSample,
    mode: Option<ModeSolution>,
}

impl ModeField<'_> {
    fn parts(&self, iw: usize, it: usize, ib: usize, k: usize, z: f64) -> Result<Parts> {
        let fan = self.fan;
        let state = fan.sample(iw, it, ib, k).ok_or_else(|| {
            Error::Unavailable(format!(
                "ray (omega index {iw}, t0 index {it}) has no sample at time index {k}"
            ))
        })?;
        let ts = self.transport.sample(fan, iw, it, ib, k);
        let src = self.transport.source(fan, iw, it);
        let sigma_arg = self.wave.sigma_arg(state.s_star, self.orientation);
        let mut base = FieldSample {
            t: state.t,
            x: state.x,
            y: state.y,
            z,
            mode: fan.mode,
            wave_kind: self.wave.kind(),
            omega: state.omega,
            t0: fan.t0[it],
            branch: fan.branches[ib],
            s_star: state.s_star,
            sigma_arg,
            amplitude: f64::NAN,
            chain_amplitude: f64::NAN,
            eigen: f64::NAN,
            special: f64::NAN,
            value: f64::NAN,
            quality: Quality::DeadRay,
        };
        let (Some(ts), Some(src)) = (ts, src) else {
            return Ok(Parts { base, mode: None });
        };
        base.quality = ts.quality;
        if matches!(ts.quality, Quality::CausticMasked | Quality::DeadRay) {
            return Ok(Parts { base, mode: None });
        }
        let disp = self.provider.eval(state.omega, state.x, state.y)?;
        let local = Local {
            disp,
            sigma: ts.sigma,
            jacobian: ts.d.abs(),
        };
        base.amplitude = self.wave.direct_amplitude(&src.launch, &local)?;
        base.chain_amplitude = src.launch.f_slope.signum() * ts.psi;
        let mode = solve_mode(self.field, state.omega, state.x, state.y, fan.mode, self.mode_opts)?;
        base.eigen = mode.f_at(z)?;
        Ok(Parts { base, mode: Some(mode) })
    }

    /// The global-shape field at one fan point and depth `z`.
    pub fn sample(&self, iw: usize, it: usize, ib: usize, k: usize, z: f64) -> Result<FieldSample> {
        let Parts { mut base, mode } = self.parts(iw, it, ib, k, z)?;
        if mode.is_some() {
            base.special = self.wave.special(base.sigma_arg)?.value;
            base.value = base.amplitude * base.eigen * base.special;
        }
        Ok(base)
    }

    /// The same field with the special function replaced by its leading
    /// large-argument form; also returns the local envelope
    /// `|amplitude·f|·envelope`.
    pub fn wkb_far_field(&self, iw: usize, it: usize, ib: usize, k: usize, z: f64) -> Result<(FieldSample, f64)> {
        let Parts { mut base, mode } = self.parts(iw, it, ib, k, z)?;
        if base.sigma_arg.abs() < WKB_THRESHOLD {
            return Err(Error::NotApplicable(format!(
                "|sigma_arg| = {} is below {WKB_THRESHOLD}",
                base.sigma_arg.abs()
            )));
        }
        if mode.is_none() {
            return Err(Error::Unavailable("sample is masked".into()));
        }
        let (lead, env) = self.wave.leading(base.sigma_arg)?;
        base.special = lead;
        base.value = base.amplitude * base.eigen * lead;
        Ok((base, (base.amplitude * base.eigen).abs() * env))
    }

    /// `−ψ·∂f/∂z·(S*/a)^{1−a}·k/|k|²` at one fan point.
    pub fn horizontal_velocity(&self, iw: usize, it: usize, ib: usize, k: usize, z: f64) -> Result<[f64; 2]> {
        let Parts { base, mode } = self.parts(iw, it, ib, k, z)?;
        let mode = mode.ok_or_else(|| Error::Unavailable("sample is masked".into()))?;
        let state = self.fan.sample(iw, it, ib, k).expect("parts checked the sample");
        Ok(horizontal_velocity(
            base.chain_amplitude,
            mode.df_dz_at(z)?,
            state.s_star,
            self.wave.exponent(),
            state.p,
            state.q,
        ))
    }

    /// Scattered samples of every launched ray at output index `k`. Rays
    /// that stopped early or failed to evaluate appear once with quality
    /// `dead_ray` at their last known state.
    pub fn samples_at(&self, k: usize, z: f64) -> Vec<FieldSample> {
        let fan = self.fan;
        let (nt, nb) = (fan.t0.len(), fan.branches.len());
        let dead = |ray: &FanRay, state: &RayState| FieldSample {
            t: state.t,
            x: state.x,
            y: state.y,
            z,
            mode: fan.mode,
            wave_kind: self.wave.kind(),
            omega: ray.omega,
            t0: ray.t0,
            branch: ray.branch,
            s_star: state.s_star,
            sigma_arg: self.wave.sigma_arg(state.s_star, self.orientation),
            amplitude: f64::NAN,
            chain_amplitude: f64::NAN,
            eigen: f64::NAN,
            special: f64::NAN,
            value: f64::NAN,
            quality: Quality::DeadRay,
        };
        let out: Vec<Option<FieldSample>> = (0..fan.rays.len())
            .into_par_iter()
            .map(|r| {
                let (iw, it, ib) = (r / (nt * nb), (r / nb) % nt, r % nb);
                let ray = &fan.rays[r];
                if !ray.launched() {
                    return None;
                }
                let Some(state) = ray.samples[k] else {
                    if fan.times[k] < ray.t0 {
                        return None;
                    }
                    return ray.last.map(|last| dead(ray, &last));
                };
                match self.sample(iw, it, ib, k, z) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        log::warn!("field sample failed on ray omega={}, t0={}: {e}", ray.omega, ray.t0);
                        Some(dead(ray, &state))
                    }
                }
            })
            .collect();
        out.into_iter().flatten().collect()
    }
}

pub fn horizontal_velocity(psi: f64, df_dz: f64, s_star: f64, a: f64, p: f64, q: f64) -> [f64; 2] {
    let k2 = p * p + q * q;
    let scale = -psi * df_dz * (s_star.max(0.0) / a).powf(1.0 - a) / k2;
    [scale * p, scale * q]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    /// Largest distance from a cell centre to a contributing sample.
    pub radius: f64,
}

impl GridSpec {
    pub fn x(&self, i: usize) -> f64 {
        axis(self.x_min, self.x_max, self.nx, i)
    }
    pub fn y(&self, j: usize) -> f64 {
        axis(self.y_min, self.y_max, self.ny, j)
    }
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridField {
    pub spec: GridSpec,
    /// Row-major over `(y, x)`; NaN marks cells with no nearby sample.
    pub values: Vec<f64>,
}

impl GridField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    pub fn masked_fraction(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().filter(|v| v.is_nan()).count() as f64 / self.values.len() as f64
    }
}

/// Nearest good sample of each mode within the radius, summed over modes.
pub fn synthesize_grid(samples: &[FieldSample], spec: &GridSpec) -> GridField {
    if samples.is_empty() {
        log::warn!("no field samples to grid");
    }
    let mut modes: Vec<usize> = samples.iter().map(|s| s.mode).collect();
    modes.sort_unstable();
    modes.dedup();
    let good: Vec<&FieldSample> = samples
        .iter()
        .filter(|s| s.quality == Quality::Ok && s.value.is_finite())
        .collect();
    let r2 = spec.radius * spec.radius;
    let values: Vec<f64> = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|c| {
            let (cx, cy) = (spec.x(c % spec.nx), spec.y(c / spec.nx));
            let mut total = 0.0;
            let mut any = false;
            for &m in &modes {
                let mut best: Option<(f64, f64)> = None;
                for s in good.iter().filter(|s| s.mode == m) {
                    let d2 = (s.x - cx).powi(2) + (s.y - cy).powi(2);
                    if d2 <= r2 && best.is_none_or(|(bd, _)| d2 < bd) {
                        best = Some((d2, s.value));
                    }
                }
                if let Some((_, v)) = best {
                    total += v;
                    any = true;
                }
            }
            if any {
                total
            } else {
                f64::NAN
            }
        })
        .collect();
    GridField { spec: *spec, values }
}
