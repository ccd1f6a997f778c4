//! Space-time rays of the eikonal `|∇S| = K(∂S/∂t, x, y)` launched from the
//! moving source, and the two-parameter fan indexed by `(ω, t0, branch)`.

use crate::dispersion::DispersionProvider;
use crate::error::{Error, Result};
use crate::ode::{integrate, StepOutcome, Tolerances};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Rescale `(p, q)` onto `|k| = K` after every accepted step.
    pub reproject: bool,
    /// Relative eikonal drift that triggers a warning.
    pub drift_warning: f64,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            rtol: 1e-11,
            atol: 1e-14,
            reproject: false,
            drift_warning: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
    pub omega: f64,
    pub s_star: f64,
    pub alive: bool,
}

impl RayState {
    fn vector(&self) -> [f64; 5] {
        [self.x, self.y, self.p, self.q, self.s_star]
    }

    fn with(&self, t: f64, v: [f64; 5]) -> RayState {
        RayState {
            t,
            x: v[0],
            y: v[1],
            p: v[2],
            q: v[3],
            omega: self.omega,
            s_star: v[4],
            alive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RayStatus {
    Alive,
    NotLaunched { reason: String },
    LeftValidRegion { t: f64 },
    IntegrationFailure { t: f64, reason: String },
}

/// `x = V·t0`, `y = 0`, `p = ω/V`, `q = branch·√(K² − ω²/V²)`, `S* = 0`.
pub fn initial_conditions(
    provider: &dyn DispersionProvider,
    omega: f64,
    t0: f64,
    branch: i8,
    speed: f64,
) -> Result<RayState> {
    let x = speed * t0;
    let k = provider.eval(omega, x, 0.0)?.k;
    let p = omega / speed;
    let v2 = k * k - p * p;
    if v2 < 0.0 {
        return Err(Error::Evanescent {
            omega,
            t0,
            k,
            cutoff: p,
        });
    }
    Ok(RayState {
        t: t0,
        x,
        y: 0.0,
        p,
        q: f64::from(branch.signum()) * v2.sqrt(),
        omega,
        s_star: 0.0,
        alive: true,
    })
}

/// Relative eikonal residual `|p² + q² − K²| / K²`.
pub fn constraint_drift(provider: &dyn DispersionProvider, s: &RayState) -> Result<f64> {
    let k = provider.eval(s.omega, s.x, s.y)?.k;
    Ok(((s.p * s.p + s.q * s.q) - k * k).abs() / (k * k))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// One entry per requested output time; `None` where the ray was not
    /// alive.
    pub samples: Vec<Option<RayState>>,
    pub status: RayStatus,
    pub max_drift: f64,
    /// Last state reached (the final sample, or the termination point).
    pub last: RayState,
}

/// Traces from `state0` to `t_end`, sampling at `state0.t`, at the
/// multiples of `dt_out` strictly between, and at `t_end`.
pub fn trace_ray(
    provider: &dyn DispersionProvider,
    state0: &RayState,
    t_end: f64,
    dt_out: f64,
    opts: &RayOptions,
) -> Result<Trajectory> {
    if !(dt_out > 0.0) {
        return Err(Error::config("dt_out must be positive"));
    }
    let mut times = vec![state0.t];
    let dir = (t_end - state0.t).signum();
    if dir != 0.0 {
        let mut j = (state0.t / dt_out).floor() as i64;
        loop {
            j += dir as i64;
            let tj = j as f64 * dt_out;
            if (tj - state0.t) * dir <= 0.0 {
                continue;
            }
            if (t_end - tj) * dir <= 0.0 {
                break;
            }
            times.push(tj);
        }
        times.push(t_end);
    }
    Ok(trace_ray_at(provider, state0, &times, opts))
}

/// Traces through the given output times, which must be monotone in the
/// direction of integration and not precede `state0.t`.
pub fn trace_ray_at(
    provider: &dyn DispersionProvider,
    state0: &RayState,
    times: &[f64],
    opts: &RayOptions,
) -> Trajectory {
    let mut samples: Vec<Option<RayState>> = vec![None; times.len()];
    let omega = state0.omega;
    let Some(&t_end) = times.last() else {
        return Trajectory {
            samples,
            status: RayStatus::Alive,
            max_drift: 0.0,
            last: *state0,
        };
    };
    let dir = if t_end >= state0.t { 1.0 } else { -1.0 };
    let mut next = 0;
    while next < times.len() && times[next] == state0.t {
        samples[next] = Some(*state0);
        next += 1;
    }
    let mut max_drift = constraint_drift(provider, state0).unwrap_or(0.0);
    let rhs = |_t: f64, y: &[f64; 5]| -> Result<[f64; 5]> {
        let d = provider.eval(omega, y[0], y[1])?;
        let kk = d.k * d.k_omega;
        Ok([
            y[2] / kk,
            y[3] / kk,
            d.k_x / d.k_omega,
            d.k_y / d.k_omega,
            omega + d.k / d.k_omega,
        ])
    };
    let tol = Tolerances {
        rtol: opts.rtol,
        atol: opts.atol,
        ..Tolerances::default()
    };
    let mut warned = false;
    let (y_end, t_stop, outcome) = integrate(rhs, state0.t, state0.vector(), t_end, &tol, |step, y_new| {
        let t_hi = step.t0 + step.h;
        while next < times.len() && (t_hi - times[next]) * dir >= 0.0 {
            samples[next] = Some(state0.with(times[next], step.eval(times[next])));
            next += 1;
        }
        if let Ok(d) = provider.eval(omega, y_new[0], y_new[1]) {
            let k2 = d.k * d.k;
            let drift = ((y_new[2] * y_new[2] + y_new[3] * y_new[3]) - k2).abs() / k2;
            max_drift = max_drift.max(drift);
            if drift > opts.drift_warning && !warned {
                warned = true;
                log::warn!(
                    "eikonal drift {drift:e} on ray omega={omega}, t0={} at t={t_hi}",
                    state0.t
                );
            }
            if opts.reproject {
                let scale = d.k / y_new[2].hypot(y_new[3]);
                y_new[2] *= scale;
                y_new[3] *= scale;
            }
        }
    });
    let last = state0.with(t_stop, y_end);
    if matches!(outcome, StepOutcome::Done) {
        // the clipped final step can land one ulp short of t_end
        for k in next..times.len() {
            samples[k] = Some(state0.with(times[k], y_end));
        }
    }
    let status = match outcome {
        StepOutcome::Done => RayStatus::Alive,
        StepOutcome::RhsFailed(Error::Extrapolation { .. }) => RayStatus::LeftValidRegion { t: t_stop },
        StepOutcome::RhsFailed(e) => RayStatus::IntegrationFailure {
            t: t_stop,
            reason: e.to_string(),
        },
        StepOutcome::Stalled(reason) => RayStatus::IntegrationFailure { t: t_stop, reason },
    };
    let last = RayState {
        alive: status == RayStatus::Alive,
        ..last
    };
    Trajectory {
        samples,
        status,
        max_drift,
        last,
    }
}

#[derive(Debug, Clone)]
pub struct FanSpec {
    pub omega: Vec<f64>,
    pub t0: Vec<f64>,
    pub branches: Vec<i8>,
    pub speed: f64,
    pub t_obs: f64,
    pub dt_out: f64,
}

/// Shared output grid: multiples of `dt_out` from the earliest launch up to
/// `t_obs`, with `t_obs` itself last.
pub fn output_times(t0_min: f64, t_obs: f64, dt_out: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut j = (t0_min / dt_out).ceil() as i64;
    loop {
        let t = j as f64 * dt_out;
        if t >= t_obs {
            break;
        }
        times.push(t);
        j += 1;
    }
    times.push(t_obs);
    times
}

#[derive(Debug, Clone)]
pub struct FanRay {
    pub omega: f64,
    pub t0: f64,
    pub branch: i8,
    /// Aligned with [`RayFan::times`].
    pub samples: Vec<Option<RayState>>,
    pub status: RayStatus,
    pub max_drift: f64,
    pub last: Option<RayState>,
}

impl FanRay {
    pub fn launched(&self) -> bool {
        !matches!(self.status, RayStatus::NotLaunched { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RayFan {
    pub mode: usize,
    pub omega: Vec<f64>,
    pub t0: Vec<f64>,
    pub branches: Vec<i8>,
    pub speed: f64,
    pub times: Vec<f64>,
    /// Index `(iw·n_t0 + it)·n_branch + ib`.
    pub rays: Vec<FanRay>,
}

impl RayFan {
    pub fn index(&self, iw: usize, it: usize, ib: usize) -> usize {
        (iw * self.t0.len() + it) * self.branches.len() + ib
    }

    pub fn ray(&self, iw: usize, it: usize, ib: usize) -> &FanRay {
        &self.rays[self.index(iw, it, ib)]
    }

    pub fn sample(&self, iw: usize, it: usize, ib: usize, k: usize) -> Option<&RayState> {
        self.ray(iw, it, ib).samples[k].as_ref()
    }
}

pub fn trace_fan(provider: &dyn DispersionProvider, spec: &FanSpec, opts: &RayOptions) -> Result<RayFan> {
    if spec.omega.is_empty() || spec.t0.is_empty() || spec.branches.is_empty() {
        return Err(Error::config("fan needs at least one omega, t0 and branch"));
    }
    if !(spec.dt_out > 0.0) {
        return Err(Error::config("dt_out must be positive"));
    }
    let t0_max = spec.t0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(spec.t_obs >= t0_max) {
        return Err(Error::config("t_obs must not precede the last launch time"));
    }
    let t0_min = spec.t0.iter().copied().fold(f64::INFINITY, f64::min);
    let times = output_times(t0_min, spec.t_obs, spec.dt_out);
    let labels: Vec<(f64, f64, i8)> = spec
        .omega
        .iter()
        .flat_map(|&w| {
            spec.t0
                .iter()
                .flat_map(move |&t0| spec.branches.iter().map(move |&b| (w, t0, b)))
        })
        .collect();
    let rays: Vec<FanRay> = labels
        .par_iter()
        .map(|&(omega, t0, branch)| {
            let mut samples = vec![None; times.len()];
            match initial_conditions(provider, omega, t0, branch, spec.speed) {
                Err(e) => FanRay {
                    omega,
                    t0,
                    branch,
                    samples,
                    status: RayStatus::NotLaunched { reason: e.to_string() },
                    max_drift: 0.0,
                    last: None,
                },
                Ok(s0) => {
                    let first = times.partition_point(|&t| t < t0);
                    let traj = trace_ray_at(provider, &s0, &times[first..], opts);
                    for (slot, s) in samples[first..].iter_mut().zip(traj.samples) {
                        *slot = s;
                    }
                    FanRay {
                        omega,
                        t0,
                        branch,
                        samples,
                        status: traj.status,
                        max_drift: traj.max_drift,
                        last: Some(traj.last),
                    }
                }
            }
        })
        .collect();
    Ok(RayFan {
        mode: provider.mode(),
        omega: spec.omega.clone(),
        t0: spec.t0.clone(),
        branches: spec.branches.clone(),
        speed: spec.speed,
        times,
        rays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_grid_ends_at_observation_time() {
        assert_eq!(output_times(0.0, 2.0, 0.5), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(output_times(0.2, 1.1, 0.5), vec![0.5, 1.0, 1.1]);
    }
}
