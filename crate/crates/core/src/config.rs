//! JSON run configuration shared by every subcommand.

use crate::error::{Error, Result};
use crate::modes::ModeOptions;
use crate::rays::RayOptions;
use crate::registry::Params;
use crate::stratification::{models, Branches, SourceSpec, StratificationField};
use crate::synthesis::GridSpec;
use crate::transport::TransportOptions;
use crate::waves::{sigma_models, FrontOrientation, SigmaModel, WaveKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

/// Either explicit values or `count` evenly spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linear { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Linear { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratificationConfig {
    pub model: String,
    #[serde(default)]
    pub params: Params,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub reference_wavelength: f64,
    #[serde(default = "default_slowness")]
    pub slowness_threshold: f64,
}

fn default_slowness() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub speed: f64,
    pub depth: f64,
    #[serde(default = "default_branches")]
    pub branches: Branches,
}

fn default_branches() -> Branches {
    Branches::Both
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanConfig {
    pub omega: Grid,
    pub t0: Grid,
    pub t_obs: f64,
    pub dt_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesConfig {
    pub list: Vec<usize>,
    pub solver: ModeOptions,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig {
            list: vec![1],
            solver: ModeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveSelection {
    Airy,
    Fresnel,
    Both,
}

impl WaveSelection {
    pub fn kinds(self) -> &'static [WaveKind] {
        match self {
            WaveSelection::Airy => &[WaveKind::Airy],
            WaveSelection::Fresnel => &[WaveKind::Fresnel],
            WaveSelection::Both => &[WaveKind::Airy, WaveKind::Fresnel],
        }
    }
}

/// A registry entry chosen by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Named {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    pub kind: WaveSelection,
    /// Observation depth; the source depth when absent.
    pub z: Option<f64>,
    pub orientation: FrontOrientation,
    pub sigma: Named,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig {
            kind: WaveSelection::Both,
            z: None,
            orientation: FrontOrientation::Behind,
            sigma: Named {
                name: "unit".into(),
                params: Params::new(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    /// Extra ω nodes; the fan frequencies are always tabulated.
    #[serde(default)]
    pub omega: Option<Grid>,
    pub x: Grid,
    pub y: Grid,
    /// Directory holding `surface_mode{n}.json` caches.
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub on_the_fly: bool,
    #[serde(default = "default_fd_fraction")]
    pub fd_fraction: f64,
}

fn default_fd_fraction() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub rays: bool,
    pub transport: bool,
    pub field: bool,
    pub grid: Option<GridSpec>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            rays: true,
            transport: true,
            field: true,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub rays: RayOptions,
    pub transport: TransportOptions,
    /// Multiplies every selftest tolerance.
    pub selftest_tolerance_scale: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            rays: RayOptions::default(),
            transport: TransportOptions::default(),
            selftest_tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub stratification: StratificationConfig,
    pub source: SourceConfig,
    pub fan: FanConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub wave: WaveConfig,
    pub dispersion: DispersionConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Json(j) => Error::Parse {
                path: path.display().to_string(),
                reason: j.to_string(),
            },
            other => other,
        })?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        if let Some(Value::String(p)) = self.stratification.params.get_mut("path") {
            if Path::new(p.as_str()).is_relative() {
                *p = dir.join(&*p).display().to_string();
            }
        }
        if let Some(c) = &mut self.dispersion.cache {
            if c.is_relative() {
                *c = dir.join(&*c);
            }
        }
    }

    pub fn field(&self) -> Result<StratificationField> {
        let s = &self.stratification;
        let model = models().build(&s.model, &s.params)?;
        let mut field = StratificationField::new(
            model,
            (s.x_range[0], s.x_range[1]),
            (s.y_range[0], s.y_range[1]),
            s.reference_wavelength,
        )?;
        field.slowness_threshold = s.slowness_threshold;
        Ok(field)
    }

    pub fn source(&self) -> SourceSpec {
        SourceSpec {
            speed: self.source.speed,
            depth: self.source.depth,
            t0: self.fan.t0.values(),
            omega: self.fan.omega.values(),
            branches: self.source.branches,
        }
    }

    pub fn sigma(&self) -> Result<Arc<dyn SigmaModel>> {
        sigma_models().build(&self.wave.sigma.name, &self.wave.sigma.params)
    }

    pub fn observation_depth(&self) -> f64 {
        self.wave.z.unwrap_or(self.source.depth)
    }

    /// Fan frequencies merged with the optional extra nodes.
    pub fn surface_omega(&self) -> Vec<f64> {
        let mut w = self.fan.omega.values();
        if let Some(extra) = &self.dispersion.omega {
            w.extend(extra.values());
        }
        w.sort_by(f64::total_cmp);
        w.dedup();
        w
    }

    /// Checks that do not need the medium.
    pub fn check_shape(&self) -> Result<()> {
        let fan = &self.fan;
        if fan.omega.values().is_empty() {
            return Err(Error::config("fan.omega is empty"));
        }
        if fan.t0.values().is_empty() {
            return Err(Error::config("fan.t0 is empty"));
        }
        if !(fan.dt_out > 0.0) {
            return Err(Error::config("fan.dt_out must be positive"));
        }
        let t0_max = fan.t0.values().into_iter().fold(f64::NEG_INFINITY, f64::max);
        if !(fan.t_obs >= t0_max) {
            return Err(Error::config("fan.t_obs must not precede the last launch time"));
        }
        if self.modes.list.is_empty() {
            return Err(Error::config("modes.list is empty"));
        }
        if let Some(&n) = self
            .modes
            .list
            .iter()
            .find(|&&n| n == 0 || n > self.modes.solver.max_mode)
        {
            return Err(Error::config(format!(
                "mode {n} outside 1..={}",
                self.modes.solver.max_mode
            )));
        }
        let mut sorted = self.modes.list.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.modes.list.len() {
            return Err(Error::config("modes.list repeats a mode"));
        }
        if self.modes.solver.grid_points < 5 || self.modes.solver.grid_points.is_multiple_of(2) {
            return Err(Error::config("modes.solver.grid_points must be odd and at least 5"));
        }
        let r = &self.numerics.rays;
        if !(r.rtol > 0.0 && r.atol > 0.0) {
            return Err(Error::config("ray tolerances must be positive"));
        }
        let scale = self.numerics.selftest_tolerance_scale;
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::config(
                "selftest_tolerance_scale must be finite and non-negative",
            ));
        }
        if !(self.dispersion.fd_fraction > 0.0 && self.dispersion.fd_fraction < 0.5) {
            return Err(Error::config("dispersion.fd_fraction must lie in (0, 0.5)"));
        }
        if let Some(g) = &self.output.grid {
            if g.nx == 0 || g.ny == 0 || !(g.radius > 0.0) {
                return Err(Error::config("output.grid needs nx, ny > 0 and a positive radius"));
            }
        }
        Ok(())
    }

    /// The config with every default written out.
    pub fn resolved(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
