//! Global wave shapes (Airy vertical velocity, Fresnel rise) and the medium
//! coefficient σ(ω, x, y), both selected by name.

use crate::dispersion::DispersionValue;
use crate::error::{Error, Result};
use crate::registry::{param_f64, Params, Registry};
use crate::specfun::{self, SpecFunValue};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Airy,
    Fresnel,
}

impl WaveKind {
    pub fn name(self) -> &'static str {
        match self {
            WaveKind::Airy => "airy",
            WaveKind::Fresnel => "fresnel",
        }
    }
}

/// Which side of the front `S* = 0` carries the oscillations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrontOrientation {
    /// Oscillatory behind the front, where `S* > 0`.
    #[default]
    Behind,
    /// `σ_arg` carries the sign of `S*`.
    AsPrinted,
}

/// Launch-point quantities entering the source constant and the closed-form
/// amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Launch {
    pub omega: f64,
    pub speed: f64,
    /// K at `(V·t0, 0)`.
    pub k0: f64,
    /// `√(K0² − ω²/V²)`.
    pub v: f64,
    /// `∂f/∂z` at the source depth.
    pub f_slope: f64,
}

/// Local quantities at the current ray point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Local {
    pub disp: DispersionValue,
    pub sigma: f64,
    /// `|D|`.
    pub jacobian: f64,
}

pub trait WaveShape: Send + Sync {
    fn kind(&self) -> WaveKind;
    /// Exponent `a` of `σ = (S/a)^a`.
    fn exponent(&self) -> f64;
    /// Column name of the synthesized quantity.
    fn quantity(&self) -> &'static str;
    fn p_factor(&self, disp: &DispersionValue, sigma: f64) -> Result<f64>;
    fn source_constant(&self, launch: &Launch) -> f64;
    /// Closed-form amplitude in front of `f·F(σ_arg)`.
    fn direct_amplitude(&self, launch: &Launch, local: &Local) -> Result<f64>;
    fn sigma_arg(&self, s_star: f64, orientation: FrontOrientation) -> f64;
    fn special(&self, sigma_arg: f64) -> Result<SpecFunValue>;
    /// Leading large-argument form and its envelope.
    fn leading(&self, sigma_arg: f64) -> Result<(f64, f64)>;
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "sigma",
            value: sigma,
        })
    }
}

#[derive(Debug)]
pub struct Airy;

impl WaveShape for Airy {
    fn kind(&self) -> WaveKind {
        WaveKind::Airy
    }
    fn exponent(&self) -> f64 {
        2.0 / 3.0
    }
    fn quantity(&self) -> &'static str {
        "w"
    }
    fn p_factor(&self, d: &DispersionValue, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        Ok(sigma.sqrt() * d.k_omega / (d.k * d.k))
    }
    fn source_constant(&self, l: &Launch) -> f64 {
        l.omega.powi(4) * l.f_slope * l.f_slope / (2.0 * l.speed * l.k0.powi(3) * l.v)
    }
    fn direct_amplitude(&self, l: &Launch, loc: &Local) -> Result<f64> {
        check_sigma(loc.sigma)?;
        let den = 2.0 * l.speed * loc.disp.k_omega * loc.jacobian * l.k0.powi(3) * l.v;
        Ok(l.omega * l.omega * loc.disp.k * loc.sigma.powf(-0.25) * l.f_slope / den.sqrt())
    }
    fn sigma_arg(&self, s_star: f64, orientation: FrontOrientation) -> f64 {
        let mag = (1.5 * s_star.abs()).powf(2.0 / 3.0);
        match orientation {
            FrontOrientation::Behind => -s_star.signum() * mag,
            FrontOrientation::AsPrinted => s_star.signum() * mag,
        }
    }
    fn special(&self, s: f64) -> Result<SpecFunValue> {
        Ok(specfun::airy_values(s)?.1)
    }
    fn leading(&self, s: f64) -> Result<(f64, f64)> {
        specfun::asymptotic::airy_ai_prime_leading(s)
    }
}

#[derive(Debug)]
pub struct Fresnel;

impl WaveShape for Fresnel {
    fn kind(&self) -> WaveKind {
        WaveKind::Fresnel
    }
    fn exponent(&self) -> f64 {
        0.5
    }
    fn quantity(&self) -> &'static str {
        "eta"
    }
    fn p_factor(&self, d: &DispersionValue, _sigma: f64) -> Result<f64> {
        Ok(d.k_omega)
    }
    fn source_constant(&self, l: &Launch) -> f64 {
        l.omega * l.omega * l.f_slope * l.f_slope / (2.0 * l.speed * l.k0 * l.v)
    }
    fn direct_amplitude(&self, l: &Launch, loc: &Local) -> Result<f64> {
        let den = 2.0 * l.speed * loc.disp.k_omega * loc.jacobian * l.k0 * l.v;
        Ok(l.omega * l.f_slope / den.sqrt())
    }
    fn sigma_arg(&self, s_star: f64, orientation: FrontOrientation) -> f64 {
        let mag = (2.0 * s_star.abs()).sqrt();
        match orientation {
            FrontOrientation::Behind => -s_star.signum() * mag,
            FrontOrientation::AsPrinted => s_star.signum() * mag,
        }
    }
    fn special(&self, s: f64) -> Result<SpecFunValue> {
        specfun::fresnel_phi_value(s)
    }
    fn leading(&self, s: f64) -> Result<(f64, f64)> {
        specfun::asymptotic::fresnel_phi_leading(s)
    }
}

pub fn wave_shapes() -> &'static Registry<dyn WaveShape> {
    static REG: OnceLock<Registry<dyn WaveShape>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn WaveShape> = Registry::new("wave kind");
        r.register("airy", "vertical velocity w with Ai'", |_| Ok(Arc::new(Airy)));
        r.register("fresnel", "rise η with Φ", |_| Ok(Arc::new(Fresnel)));
        r
    })
}

pub fn wave_shape(kind: WaveKind) -> Arc<dyn WaveShape> {
    match kind {
        WaveKind::Airy => Arc::new(Airy),
        WaveKind::Fresnel => Arc::new(Fresnel),
    }
}

/// The medium coefficient σ(ω, x, y) in the Airy amplitude.
pub trait SigmaModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn sigma(&self, omega: f64, x: f64, y: f64, disp: &DispersionValue) -> f64;
}

#[derive(Debug)]
pub struct UnitSigma;

impl SigmaModel for UnitSigma {
    fn name(&self) -> &'static str {
        "unit"
    }
    fn sigma(&self, _omega: f64, _x: f64, _y: f64, _disp: &DispersionValue) -> f64 {
        1.0
    }
}

#[derive(Debug)]
pub struct ConstantSigma(pub f64);

impl SigmaModel for ConstantSigma {
    fn name(&self) -> &'static str {
        "constant"
    }
    fn sigma(&self, _omega: f64, _x: f64, _y: f64, _disp: &DispersionValue) -> f64 {
        self.0
    }
}

pub fn sigma_models() -> &'static Registry<dyn SigmaModel> {
    static REG: OnceLock<Registry<dyn SigmaModel>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn SigmaModel> = Registry::new("sigma model");
        r.register("unit", "σ ≡ 1", |_| Ok(Arc::new(UnitSigma)));
        r.register("constant", "σ ≡ value", |p: &Params| {
            let v = param_f64(p, "value")?;
            check_sigma(v)?;
            Ok(Arc::new(ConstantSigma(v)))
        });
        r
    })
}
