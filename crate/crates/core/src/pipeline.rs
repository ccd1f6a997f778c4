//! The `selftest`, `dispersion` and `field` runs. Each writes its dumps and
//! a `report.json` into an output directory.

use crate::config::RunConfig;
use crate::dispersion::{build_surface, DispersionProvider, DispersionSurface, OnTheFly, SurfaceGrid};
use crate::error::{Error, Result};
use crate::output;
use crate::rays::{trace_fan, FanSpec, RayFan, RayStatus};
use crate::selftest;
use crate::stratification::{validate, StratificationField, ValidationReport};
use crate::synthesis::{synthesize_grid, FieldSample, ModeField};
use crate::transport::{compute_transport, Quality, TransportInputs};
use crate::waves::{wave_shape, WaveKind};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const REPORT_VERSION: u32 = 1;

/// Above this share of masked or dead samples a field run is partial.
pub const PARTIAL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    /// Completed, but most field samples are masked.
    Partial,
    /// Completed, but a check did not pass.
    Failed,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub status: RunStatus,
    pub json: Value,
}

impl Report {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self.json)? + "\n")?;
        Ok(path)
    }
}

/// Runs `f` on a dedicated pool; `threads = 0` lets the pool pick.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Default)]
struct Timings(BTreeMap<&'static str, f64>);

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.0.entry(stage).or_default() += start.elapsed().as_secs_f64();
        out
    }

    fn json(&self) -> Value {
        json!(self.0)
    }
}

fn envelope(command: &str, status: RunStatus, body: Map<String, Value>) -> Value {
    let mut m = Map::new();
    m.insert("version".into(), json!(REPORT_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("status".into(), json!(status));
    m.extend(body);
    Value::Object(m)
}

pub fn cmd_selftest(scale: f64) -> Result<Report> {
    let start = Instant::now();
    let checks = selftest::run(scale)?;
    for c in &checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        log::info!(
            "{verdict} {} measured {:e} tolerance {:e}",
            c.name,
            c.measured,
            c.tolerance
        );
    }
    let status = if checks.iter().all(|c| c.passed) {
        RunStatus::Success
    } else {
        RunStatus::Failed
    };
    let mut body = Map::new();
    body.insert("tolerance_scale".into(), json!(scale));
    body.insert("checks".into(), json!(checks));
    body.insert("timings".into(), json!({ "selftest": start.elapsed().as_secs_f64() }));
    Ok(Report {
        status,
        json: envelope("selftest", status, body),
    })
}

/// Shape checks, the medium, and the medium checks; any failure is a
/// configuration error.
fn prepare(cfg: &RunConfig) -> Result<(StratificationField, ValidationReport)> {
    cfg.check_shape()?;
    let field = cfg.field()?;
    let report = validate(&field, &cfg.source());
    if !report.passed() {
        let msgs: Vec<String> = report
            .failures()
            .iter()
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(Error::config(format!("validation failed: {}", msgs.join("; "))));
    }
    for c in &report.checks {
        log::debug!("check {}: {}", c.name, c.detail);
    }
    Ok((field, report))
}

fn surface_grid(cfg: &RunConfig) -> SurfaceGrid {
    SurfaceGrid {
        omega: cfg.surface_omega(),
        x: cfg.dispersion.x.values(),
        y: cfg.dispersion.y.values(),
    }
}

/// What a cached surface depends on besides its grid.
fn medium_key(cfg: &RunConfig) -> Value {
    json!({ "stratification": cfg.stratification, "solver": cfg.modes.solver })
}

fn cache_path(dir: &Path, mode: usize) -> PathBuf {
    dir.join(format!("surface_mode{mode}.json"))
}

pub fn cmd_dispersion(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut timings = Timings::default();
    let (field, validation) = timings.time("validate", || prepare(cfg))?;
    std::fs::create_dir_all(out)?;
    let grid = surface_grid(cfg);
    let mut surfaces = Map::new();
    for &n in &cfg.modes.list {
        let surface = timings
            .time("surface", || build_surface(&field, n, &grid, &cfg.modes.solver))?
            .with_medium(medium_key(cfg));
        let path = cache_path(out, n);
        timings.time("output", || surface.write_cache(&path))?;
        let (_, _, valid) = surface.table();
        surfaces.insert(
            format!("mode{n}"),
            json!({
                "path": path.display().to_string(),
                "nodes": valid.len(),
                "valid_nodes": valid.iter().filter(|&&v| v).count(),
            }),
        );
    }
    let mut body = Map::new();
    body.insert("config".into(), cfg.resolved());
    body.insert("validation".into(), json!(validation));
    body.insert("surfaces".into(), Value::Object(surfaces));
    body.insert("timings".into(), timings.json());
    Ok(Report {
        status: RunStatus::Success,
        json: envelope("dispersion", RunStatus::Success, body),
    })
}

/// The configured dispersion provider for one mode. A cache directory is
/// read when it holds a surface for the configured medium and grid, and
/// refilled otherwise.
fn provider(cfg: &RunConfig, field: &StratificationField, n: usize) -> Result<Box<dyn DispersionProvider>> {
    let d = &cfg.dispersion;
    if d.on_the_fly {
        return Ok(Box::new(OnTheFly::new(
            field.clone(),
            n,
            cfg.modes.solver,
            d.fd_fraction,
        )));
    }
    let grid = surface_grid(cfg);
    let Some(dir) = &d.cache else {
        return Ok(Box::new(build_surface(field, n, &grid, &cfg.modes.solver)?));
    };
    let path = cache_path(dir, n);
    let key = medium_key(cfg);
    if path.exists() {
        let cached = DispersionSurface::read_cache(&path)?;
        if cached.mode() == n && *cached.grid() == grid && cached.medium() == Some(&key) {
            log::info!("using cached surface {}", path.display());
            return Ok(Box::new(cached));
        }
        log::warn!(
            "cached surface {} was built for another medium or grid; rebuilding",
            path.display()
        );
    }
    let surface = build_surface(field, n, &grid, &cfg.modes.solver)?.with_medium(key);
    std::fs::create_dir_all(dir)?;
    surface.write_cache(&path)?;
    Ok(Box::new(surface))
}

fn ray_summary(fan: &RayFan) -> Value {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut max_drift: f64 = 0.0;
    for ray in &fan.rays {
        let key = match ray.status {
            RayStatus::Alive => "alive",
            RayStatus::NotLaunched { .. } => "not_launched",
            RayStatus::LeftValidRegion { .. } => "left_valid_region",
            RayStatus::IntegrationFailure { .. } => "integration_failure",
        };
        *counts.entry(key).or_default() += 1;
        if ray.launched() {
            max_drift = max_drift.max(ray.max_drift);
        }
    }
    json!({ "rays": fan.rays.len(), "status": counts, "max_drift": max_drift })
}

fn quality_counts(samples: &[FieldSample]) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    for q in [Quality::Ok, Quality::NearCone, Quality::CausticMasked, Quality::DeadRay] {
        counts.insert(q.as_str(), samples.iter().filter(|s| s.quality == q).count());
    }
    counts
}

/// Share of samples without a usable value: caustic-masked or dead.
pub fn masked_fraction(samples: &[FieldSample]) -> f64 {
    if samples.is_empty() {
        return 1.0;
    }
    let masked = samples
        .iter()
        .filter(|s| matches!(s.quality, Quality::CausticMasked | Quality::DeadRay))
        .count();
    masked as f64 / samples.len() as f64
}

pub fn cmd_field(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut timings = Timings::default();
    let (field, validation) = timings.time("validate", || prepare(cfg))?;
    let z = cfg.observation_depth();
    if !(z >= -field.depth() && z <= 0.0) {
        return Err(Error::config(format!(
            "observation depth {z} outside [-{}, 0]",
            field.depth()
        )));
    }
    let sigma = cfg.sigma()?;
    std::fs::create_dir_all(out)?;

    let spec = FanSpec {
        omega: cfg.fan.omega.values(),
        t0: cfg.fan.t0.values(),
        branches: cfg.source.branches.signs().to_vec(),
        speed: cfg.source.speed,
        t_obs: cfg.fan.t_obs,
        dt_out: cfg.fan.dt_out,
    };
    let kinds = cfg.wave.kind.kinds();
    let mut samples: BTreeMap<WaveKind, Vec<FieldSample>> = BTreeMap::new();
    let mut rays = Map::new();
    let mut residuals = Map::new();
    let mut worst_residual: Option<f64> = None;
    let mut files = Vec::new();
    let mut t_obs = cfg.fan.t_obs;

    for &n in &cfg.modes.list {
        let provider = timings.time("surface", || provider(cfg, &field, n))?;
        let fan = timings.time("rays", || trace_fan(provider.as_ref(), &spec, &cfg.numerics.rays))?;
        rays.insert(format!("mode{n}"), ray_summary(&fan));
        if cfg.output.rays {
            let path = out.join(format!("rays_mode{n}.csv"));
            timings.time("output", || output::write_rays(&path, &fan))?;
            files.push(path);
        }
        let last = fan.times.len() - 1;
        t_obs = fan.times[last];
        for &kind in kinds {
            let wave = wave_shape(kind);
            let inputs = TransportInputs {
                fan: &fan,
                provider: provider.as_ref(),
                field: &field,
                mode_opts: &cfg.modes.solver,
                ray_opts: &cfg.numerics.rays,
                source_depth: cfg.source.depth,
                wave: wave.as_ref(),
                sigma: sigma.as_ref(),
            };
            let tr = timings.time("transport", || compute_transport(&inputs, &cfg.numerics.transport))?;
            let worst = tr.worst_residual();
            if let Some(r) = worst {
                worst_residual = Some(worst_residual.map_or(r, |w| w.max(r)));
            }
            residuals.insert(format!("mode{n}_{}", kind.name()), json!(worst));
            if cfg.output.transport {
                let path = out.join(format!("transport_mode{n}_{}.csv", kind.name()));
                timings.time("output", || output::write_transport(&path, &fan, &tr))?;
                files.push(path);
            }
            let mf = ModeField {
                fan: &fan,
                transport: &tr,
                provider: provider.as_ref(),
                field: &field,
                mode_opts: &cfg.modes.solver,
                wave: wave.as_ref(),
                orientation: cfg.wave.orientation,
            };
            let s = timings.time("synthesis", || mf.samples_at(last, z));
            samples.entry(kind).or_default().extend(s);
        }
    }

    let mut grids = Map::new();
    for (&kind, s) in &samples {
        if cfg.output.field {
            let path = out.join(format!("field_{}.csv", kind.name()));
            timings.time("output", || output::write_field(&path, s))?;
            files.push(path);
        }
        if let Some(spec) = &cfg.output.grid {
            let grid = timings.time("synthesis", || synthesize_grid(s, spec));
            let path = out.join(format!("grid_{}.csv", kind.name()));
            let label = wave_shape(kind).quantity();
            timings.time("output", || output::write_grid(&path, &grid, label, t_obs, z))?;
            grids.insert(kind.name().into(), json!({ "masked_fraction": grid.masked_fraction() }));
            files.push(path);
        }
    }

    let all: Vec<FieldSample> = samples.values().flatten().copied().collect();
    let masked = masked_fraction(&all);
    let status = if masked > PARTIAL_THRESHOLD {
        log::warn!("{:.1}% of field samples are masked", 100.0 * masked);
        RunStatus::Partial
    } else {
        RunStatus::Success
    };
    let per_kind: Map<String, Value> = samples
        .iter()
        .map(|(k, s)| (k.name().to_string(), json!(quality_counts(s))))
        .collect();

    let mut body = Map::new();
    body.insert("config".into(), cfg.resolved());
    body.insert("validation".into(), json!(validation));
    body.insert("observation".into(), json!({ "t": t_obs, "z": z }));
    body.insert("rays".into(), Value::Object(rays));
    body.insert(
        "samples".into(),
        json!({
            "total": all.len(),
            "quality": quality_counts(&all),
            "by_kind": per_kind,
            "masked_fraction": masked,
        }),
    );
    body.insert("grids".into(), Value::Object(grids));
    body.insert("worst_conservation_residual".into(), json!(worst_residual));
    body.insert("conservation_residuals".into(), Value::Object(residuals));
    body.insert(
        "files".into(),
        json!(files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()),
    );
    body.insert("timings".into(), timings.json());
    Ok(Report {
        status,
        json: envelope("field", status, body),
    })
}
