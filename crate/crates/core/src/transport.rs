//! Geometric spreading and amplitude: the ray-map Jacobian D over the
//! `(t0, ω)` fan, the source constants C, and ψ from `D·ψ²·P = C`.

use crate::dispersion::DispersionProvider;
use crate::error::{Error, Result};
use crate::modes::{solve_mode, ModeOptions};
use crate::rays::{initial_conditions, trace_ray_at, RayFan, RayOptions};
use crate::stratification::StratificationField;
use crate::waves::{Launch, SigmaModel, WaveShape};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportOptions {
    /// `|D| < threshold · median|D|` at the same time marks a caustic.
    pub caustic_threshold: f64,
    /// `v² < epsilon · K²` at launch marks a near-cone ray.
    pub near_cone_epsilon: f64,
    /// Relative ω step of auxiliary rays when the fan has a single ω.
    pub aux_omega_step: f64,
    /// t0 step of auxiliary rays when the fan has a single t0.
    pub aux_t0_step: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            caustic_threshold: 1e-3,
            near_cone_epsilon: 1e-3,
            aux_omega_step: 1e-3,
            aux_t0_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Ok,
    CausticMasked,
    NearCone,
    DeadRay,
}

impl Quality {
    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Ok => "ok",
            Quality::CausticMasked => "caustic_masked",
            Quality::NearCone => "near_cone",
            Quality::DeadRay => "dead_ray",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianEstimate {
    /// Branch-oriented `x_{t0}·y_ω − x_ω·y_{t0}`, five-point centred where
    /// two neighbours exist on each side, three-point otherwise.
    pub d: f64,
    /// The three-point estimate, present only when `d` is five-point.
    pub check: Option<f64>,
    /// A one-sided difference was used on some axis.
    pub downgraded: bool,
}

/// Neighbour positions along one fan axis at a fixed time, keyed by the
/// offset from the centre ray.
struct AxisPoints {
    centre: (f64, f64, f64),
    others: Vec<(i32, f64, f64, f64)>,
}

impl AxisPoints {
    fn get(&self, off: i32) -> Option<(f64, f64, f64)> {
        if off == 0 {
            return Some(self.centre);
        }
        self.others.iter().find(|p| p.0 == off).map(|&(_, a, x, y)| (a, x, y))
    }

    /// `(∂x, ∂y)` at the centre by Lagrange differentiation on the given
    /// offsets.
    fn derivative(&self, offs: &[i32]) -> Option<Xy> {
        let pts: Vec<(f64, f64, f64)> = offs.iter().map(|&o| self.get(o)).collect::<Option<_>>()?;
        let a0 = self.centre.0;
        let mut dx = 0.0;
        let mut dy = 0.0;
        for (j, pj) in pts.iter().enumerate() {
            // L_j'(a0)
            let mut w = 0.0;
            for (m, pm) in pts.iter().enumerate() {
                if m == j {
                    continue;
                }
                let mut term = 1.0 / (pj.0 - pm.0);
                for (l, pl) in pts.iter().enumerate() {
                    if l != j && l != m {
                        term *= (a0 - pl.0) / (pj.0 - pl.0);
                    }
                }
                w += term;
            }
            dx += w * pj.1;
            dy += w * pj.2;
        }
        Some((dx, dy))
    }

    /// Primary derivative, optional check derivative, downgraded flag.
    fn estimate(&self) -> Option<(Xy, Option<Xy>, bool)> {
        if let Some(d) = self.derivative(&[-2, -1, 0, 1, 2]) {
            return Some((d, self.derivative(&[-1, 0, 1]), false));
        }
        if let Some(d) = self.derivative(&[-1, 0, 1]) {
            return Some((d, None, false));
        }
        for offs in [&[0, 1, 2][..], &[0, -1, -2], &[0, 1], &[0, -1]] {
            if let Some(d) = self.derivative(offs) {
                return Some((d, None, true));
            }
        }
        None
    }
}

type Xy = (f64, f64);

/// Positions of one auxiliary ray on the output grid, for both offsets.
type AuxPair = [Option<Vec<Option<Xy>>>; 2];

/// Auxiliary rays standing in for a missing fan axis, traced on the fan's
/// time grid.
struct Auxiliary {
    omega: Vec<AuxPair>,
    omega_step: Vec<f64>,
    t0: Vec<AuxPair>,
    t0_step: f64,
}

fn trace_positions(
    provider: &dyn DispersionProvider,
    fan: &RayFan,
    omega: f64,
    t0: f64,
    branch: i8,
    opts: &RayOptions,
) -> Option<Vec<Option<Xy>>> {
    let s0 = initial_conditions(provider, omega, t0, branch, fan.speed).ok()?;
    let first = fan.times.partition_point(|&t| t < t0);
    let traj = trace_ray_at(provider, &s0, &fan.times[first..], opts);
    let mut out = vec![None; fan.times.len()];
    for (slot, s) in out[first..].iter_mut().zip(traj.samples) {
        *slot = s.map(|s| (s.x, s.y));
    }
    Some(out)
}

impl Auxiliary {
    fn build(
        fan: &RayFan,
        provider: &dyn DispersionProvider,
        ray_opts: &RayOptions,
        opts: &TransportOptions,
    ) -> Auxiliary {
        let n = fan.rays.len();
        let need_w = fan.omega.len() == 1;
        let need_t = fan.t0.len() == 1;
        let omega_step: Vec<f64> = fan.rays.iter().map(|r| opts.aux_omega_step * r.omega).collect();
        let (omega, t0): (Vec<_>, Vec<_>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let r = &fan.rays[i];
                if !r.launched() {
                    return ([None, None], [None, None]);
                }
                let trace = |w: f64, t: f64| trace_positions(provider, fan, w, t, r.branch, ray_opts);
                let dw = omega_step[i];
                let dt = opts.aux_t0_step;
                let a = if need_w {
                    [trace(r.omega - dw, r.t0), trace(r.omega + dw, r.t0)]
                } else {
                    [None, None]
                };
                let b = if need_t {
                    [trace(r.omega, r.t0 - dt), trace(r.omega, r.t0 + dt)]
                } else {
                    [None, None]
                };
                (a, b)
            })
            .unzip();
        Auxiliary {
            omega,
            omega_step,
            t0,
            t0_step: opts.aux_t0_step,
        }
    }
}

fn axis_points(
    fan: &RayFan,
    aux: Option<&Auxiliary>,
    iw: usize,
    it: usize,
    ib: usize,
    k: usize,
    along_omega: bool,
) -> Option<AxisPoints> {
    let centre = fan.sample(iw, it, ib, k)?;
    let (grid, i) = if along_omega { (&fan.omega, iw) } else { (&fan.t0, it) };
    let mut others = Vec::new();
    if grid.len() > 1 {
        for off in [-2i32, -1, 1, 2] {
            let j = i as i64 + off as i64;
            if j < 0 || j >= grid.len() as i64 {
                continue;
            }
            let j = j as usize;
            let s = if along_omega {
                fan.sample(j, it, ib, k)
            } else {
                fan.sample(iw, j, ib, k)
            };
            if let Some(s) = s {
                others.push((off, grid[j], s.x, s.y));
            }
        }
    } else if let Some(aux) = aux {
        let r = fan.index(iw, it, ib);
        let (paths, step) = if along_omega {
            (&aux.omega[r], aux.omega_step[r])
        } else {
            (&aux.t0[r], aux.t0_step)
        };
        for (side, off) in [(0usize, -1i32), (1, 1)] {
            if let Some(Some((x, y))) = paths[side].as_ref().map(|p| p[k]) {
                others.push((off, grid[i] + off as f64 * step, x, y));
            }
        }
    }
    Some(AxisPoints {
        centre: (grid[i], centre.x, centre.y),
        others,
    })
}

fn jacobian_with(
    fan: &RayFan,
    aux: Option<&Auxiliary>,
    iw: usize,
    it: usize,
    ib: usize,
    k: usize,
) -> Result<JacobianEstimate> {
    let unavailable = || {
        Error::Unavailable(format!(
            "Jacobian at omega index {iw}, t0 index {it}, branch index {ib}, time index {k}: missing neighbours"
        ))
    };
    let pw = axis_points(fan, aux, iw, it, ib, k, true).ok_or_else(unavailable)?;
    let pt = axis_points(fan, aux, iw, it, ib, k, false).ok_or_else(unavailable)?;
    let (dw, dw_check, down_w) = pw.estimate().ok_or_else(unavailable)?;
    let (dt, dt_check, down_t) = pt.estimate().ok_or_else(unavailable)?;
    let b = f64::from(fan.branches[ib].signum());
    let det = |t: Xy, w: Xy| b * (t.0 * w.1 - w.0 * t.1);
    let check = match (dw_check, dt_check) {
        (Some(w), Some(t)) => Some(det(t, w)),
        _ => None,
    };
    Ok(JacobianEstimate {
        d: det(dt, dw),
        check,
        downgraded: down_w || down_t,
    })
}

/// D at output time index `k` from centred differences across the fan.
pub fn jacobian(fan: &RayFan, iw: usize, it: usize, ib: usize, k: usize) -> Result<JacobianEstimate> {
    if fan.sample(iw, it, ib, k).is_none() {
        return Err(Error::Unavailable(format!(
            "ray (omega index {iw}, t0 index {it}) is not alive at time index {k}"
        )));
    }
    jacobian_with(fan, None, iw, it, ib, k)
}

/// `ψ = √(C / (|D|·P))`.
pub fn amplitude_psi(d: f64, p: f64, c: f64) -> Result<f64> {
    if d == 0.0 || !(p > 0.0) || !(c >= 0.0) {
        return Err(Error::Domain {
            function: "amplitude_psi",
            value: d,
        });
    }
    Ok((c / (d.abs() * p)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceConstant {
    pub launch: Launch,
    pub c: f64,
    pub near_cone: bool,
}

/// C(ω, t0) with the mode slope at the source from a fresh solve at the
/// launch point.
#[allow(clippy::too_many_arguments)]
pub fn source_constant(
    provider: &dyn DispersionProvider,
    field: &StratificationField,
    mode_opts: &ModeOptions,
    source_depth: f64,
    speed: f64,
    omega: f64,
    t0: f64,
    wave: &dyn WaveShape,
    near_cone_epsilon: f64,
) -> Result<SourceConstant> {
    let x0 = speed * t0;
    let k0 = provider.eval(omega, x0, 0.0)?.k;
    let v2 = k0 * k0 - (omega / speed).powi(2);
    if !(v2 > 0.0) {
        return Err(Error::Evanescent {
            omega,
            t0,
            k: k0,
            cutoff: omega / speed,
        });
    }
    let near_cone = v2 < near_cone_epsilon * k0 * k0;
    if near_cone {
        log::warn!(
            "near-cone launch at omega={omega}, t0={t0}: v²/K² = {:e}",
            v2 / (k0 * k0)
        );
    }
    let mode = solve_mode(field, omega, x0, 0.0, provider.mode(), mode_opts)?;
    let launch = Launch {
        omega,
        speed,
        k0,
        v: v2.sqrt(),
        f_slope: mode.df_dz_at(source_depth)?,
    };
    Ok(SourceConstant {
        launch,
        c: wave.source_constant(&launch),
        near_cone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportSample {
    pub t: f64,
    pub d: f64,
    pub d_check: Option<f64>,
    pub psi: f64,
    pub p: f64,
    pub c: f64,
    pub sigma: f64,
    pub caustic: bool,
    pub downgraded: bool,
    /// Sign changes of D along the ray up to this sample.
    pub phase_index: u32,
    /// `|D_check·ψ²·P − C| / C` where a check Jacobian exists.
    pub residual: Option<f64>,
    pub quality: Quality,
}

#[derive(Debug, Clone)]
pub struct Transport {
    pub mode: usize,
    pub wave: crate::waves::WaveKind,
    /// `[iw·n_t0 + it]`.
    pub sources: Vec<Option<SourceConstant>>,
    /// `[ray][time index]`.
    pub samples: Vec<Vec<Option<TransportSample>>>,
}

impl Transport {
    pub fn sample(&self, fan: &RayFan, iw: usize, it: usize, ib: usize, k: usize) -> Option<&TransportSample> {
        self.samples[fan.index(iw, it, ib)][k].as_ref()
    }

    pub fn source(&self, fan: &RayFan, iw: usize, it: usize) -> Option<&SourceConstant> {
        self.sources[iw * fan.t0.len() + it].as_ref()
    }

    /// Largest conservation residual over interior, non-caustic samples.
    pub fn worst_residual(&self) -> Option<f64> {
        self.samples
            .iter()
            .flatten()
            .flatten()
            .filter(|s| !s.caustic && !s.downgraded)
            .filter_map(|s| s.residual)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
    }
}

pub struct TransportInputs<'a> {
    pub fan: &'a RayFan,
    pub provider: &'a dyn DispersionProvider,
    pub field: &'a StratificationField,
    pub mode_opts: &'a ModeOptions,
    pub ray_opts: &'a RayOptions,
    pub source_depth: f64,
    pub wave: &'a dyn WaveShape,
    pub sigma: &'a dyn SigmaModel,
}

/// Evaluates D, P, C and ψ at every live sample of the fan.
pub fn compute_transport(inp: &TransportInputs, opts: &TransportOptions) -> Result<Transport> {
    let fan = inp.fan;
    let (nw, nt, nb, nk) = (fan.omega.len(), fan.t0.len(), fan.branches.len(), fan.times.len());
    let sources: Vec<Option<SourceConstant>> = (0..nw * nt)
        .into_par_iter()
        .map(|idx| {
            let (iw, it) = (idx / nt, idx % nt);
            if !(0..nb).any(|ib| fan.ray(iw, it, ib).launched()) {
                return None;
            }
            match source_constant(
                inp.provider,
                inp.field,
                inp.mode_opts,
                inp.source_depth,
                fan.speed,
                fan.omega[iw],
                fan.t0[it],
                inp.wave,
                opts.near_cone_epsilon,
            ) {
                Ok(c) => Some(c),
                Err(e) => {
                    log::warn!("no source constant at omega={}, t0={}: {e}", fan.omega[iw], fan.t0[it]);
                    None
                }
            }
        })
        .collect();

    let aux = (nw == 1 || nt == 1).then(|| Auxiliary::build(fan, inp.provider, inp.ray_opts, opts));
    let jac: Vec<Vec<Option<JacobianEstimate>>> = (0..fan.rays.len())
        .into_par_iter()
        .map(|r| {
            let (iw, it, ib) = (r / (nt * nb), (r / nb) % nt, r % nb);
            (0..nk)
                .map(|k| {
                    let s = fan.sample(iw, it, ib, k)?;
                    if s.t == fan.t0[it] {
                        // every ray of one launch starts at the source point
                        return Some(JacobianEstimate {
                            d: 0.0,
                            check: None,
                            downgraded: false,
                        });
                    }
                    jacobian_with(fan, aux.as_ref(), iw, it, ib, k).ok()
                })
                .collect()
        })
        .collect();

    let medians: Vec<f64> = (0..nk)
        .map(|k| {
            let mut v: Vec<f64> = jac.iter().filter_map(|row| row[k].map(|j| j.d.abs())).collect();
            if v.is_empty() {
                return 0.0;
            }
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = v.len();
            if m % 2 == 1 {
                v[m / 2]
            } else {
                0.5 * (v[m / 2 - 1] + v[m / 2])
            }
        })
        .collect();

    let samples: Vec<Vec<Option<TransportSample>>> = (0..fan.rays.len())
        .into_par_iter()
        .map(|r| {
            let (iw, it) = (r / (nt * nb), (r / nb) % nt);
            let src = sources[iw * nt + it];
            let mut phase = 0u32;
            let mut last_sign = 0.0_f64;
            let mut row = vec![None; nk];
            for k in 0..nk {
                let Some(state) = fan.rays[r].samples[k] else {
                    continue;
                };
                let Some(src) = src else { continue };
                let Some(j) = jac[r][k] else {
                    row[k] = Some(TransportSample {
                        t: state.t,
                        d: f64::NAN,
                        d_check: None,
                        psi: f64::NAN,
                        p: f64::NAN,
                        c: src.c,
                        sigma: f64::NAN,
                        caustic: false,
                        downgraded: true,
                        phase_index: phase,
                        residual: None,
                        quality: Quality::DeadRay,
                    });
                    continue;
                };
                if j.d != 0.0 {
                    if last_sign != 0.0 && j.d.signum() != last_sign {
                        phase += 1;
                    }
                    last_sign = j.d.signum();
                }
                let disp = inp.provider.eval(state.omega, state.x, state.y);
                let (p, sigma) = match disp {
                    Ok(d) => {
                        let sigma = inp.sigma.sigma(state.omega, state.x, state.y, &d);
                        match inp.wave.p_factor(&d, sigma) {
                            Ok(p) => (p, sigma),
                            Err(_) => (f64::NAN, sigma),
                        }
                    }
                    Err(_) => (f64::NAN, f64::NAN),
                };
                let caustic = j.d.abs() < opts.caustic_threshold * medians[k] || j.d == 0.0;
                let psi = if caustic || !p.is_finite() {
                    f64::NAN
                } else {
                    amplitude_psi(j.d, p, src.c).unwrap_or(f64::NAN)
                };
                let residual = match (j.check, psi.is_finite(), j.downgraded) {
                    (Some(dc), true, false) => Some((dc.abs() * psi * psi * p - src.c).abs() / src.c),
                    _ => None,
                };
                let quality = if !p.is_finite() {
                    Quality::DeadRay
                } else if caustic {
                    Quality::CausticMasked
                } else if src.near_cone {
                    Quality::NearCone
                } else {
                    Quality::Ok
                };
                row[k] = Some(TransportSample {
                    t: state.t,
                    d: j.d,
                    d_check: j.check,
                    psi,
                    p,
                    c: src.c,
                    sigma,
                    caustic,
                    downgraded: j.downgraded,
                    phase_index: phase,
                    residual,
                    quality,
                });
            }
            row
        })
        .collect();

    Ok(Transport {
        mode: fan.mode,
        wave: inp.wave.kind(),
        sources,
        samples,
    })
}
