//! The medium: squared buoyancy frequency N²(z, x, y) over the layer
//! `-h <= z <= 0`, and the moving-source parameters.

use crate::error::{Error, Result};
use crate::registry::{param_f64, param_f64_or, param_str, Params, Registry};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

/// A vertical profile family. Implementations are evaluated without bounds
/// checks; [`StratificationField`] owns the domain.
pub trait StratificationModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn depth(&self) -> f64;
    fn n2(&self, z: f64, x: f64, y: f64) -> f64;
    /// Whether `n2(z, x, -y) == n2(z, x, y)` for all arguments.
    fn y_symmetric(&self) -> bool {
        true
    }
}

/// Multiplicative horizontal modulation `1 + amplitude·sin(2πx/L)·cos(2πy/L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub amplitude: f64,
    pub scale: f64,
}

impl Modulation {
    pub const NONE: Modulation = Modulation {
        amplitude: 0.0,
        scale: 1.0,
    };

    fn from_params(params: &Params) -> Result<Self> {
        let amplitude = param_f64_or(params, "modulation_amplitude", 0.0)?;
        let scale = param_f64_or(params, "modulation_scale", 1.0)?;
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::config("modulation_amplitude must lie in [0, 1)"));
        }
        if !(scale > 0.0) {
            return Err(Error::config("modulation_scale must be positive"));
        }
        Ok(Modulation { amplitude, scale })
    }

    #[inline]
    pub fn factor(&self, x: f64, y: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 1.0;
        }
        let k = 2.0 * PI / self.scale;
        1.0 + self.amplitude * (k * x).sin() * (k * y).cos()
    }
}

#[derive(Debug, Clone)]
pub struct ConstantN {
    pub n0: f64,
    pub depth: f64,
}

impl StratificationModel for ConstantN {
    fn name(&self) -> &'static str {
        "constant"
    }
    fn depth(&self) -> f64 {
        self.depth
    }
    fn n2(&self, _z: f64, _x: f64, _y: f64) -> f64 {
        self.n0 * self.n0
    }
}

/// Two homogeneous layers joined by a tanh transition centred at
/// `z = -interface_depth`.
#[derive(Debug, Clone)]
pub struct TwoLayer {
    pub n_upper: f64,
    pub n_lower: f64,
    pub interface_depth: f64,
    pub transition_width: f64,
    pub depth: f64,
    pub modulation: Modulation,
}

impl StratificationModel for TwoLayer {
    fn name(&self) -> &'static str {
        "two_layer"
    }
    fn depth(&self) -> f64 {
        self.depth
    }
    fn n2(&self, z: f64, x: f64, y: f64) -> f64 {
        let (a, b) = (self.n_upper * self.n_upper, self.n_lower * self.n_lower);
        let s = 0.5 * (1.0 + ((z + self.interface_depth) / self.transition_width).tanh());
        (b + (a - b) * s) * self.modulation.factor(x, y)
    }
}

/// Background stratification with a sech² peak of N² at `z = -center_depth`.
#[derive(Debug, Clone)]
pub struct Thermocline {
    pub n_peak: f64,
    pub n_background: f64,
    pub center_depth: f64,
    pub width: f64,
    pub depth: f64,
    pub modulation: Modulation,
}

impl StratificationModel for Thermocline {
    fn name(&self) -> &'static str {
        "thermocline"
    }
    fn depth(&self) -> f64 {
        self.depth
    }
    fn n2(&self, z: f64, x: f64, y: f64) -> f64 {
        let bg = self.n_background * self.n_background;
        let peak = self.n_peak * self.n_peak;
        let sech = 1.0 / ((z + self.center_depth) / self.width).cosh();
        (bg + (peak - bg) * sech * sech) * self.modulation.factor(x, y)
    }
}

/// Measured profile, shape-preserving cubic (PCHIP) in z, replicated
/// horizontally under the modulation.
#[derive(Debug, Clone)]
pub struct Tabulated {
    z: Vec<f64>,
    n2: Vec<f64>,
    slopes: Vec<f64>,
    pub modulation: Modulation,
}

impl Tabulated {
    /// `z` strictly decreasing from 0 to `-h`, `n2 >= 0`.
    pub fn new(z_desc: &[f64], n2_desc: &[f64], modulation: Modulation) -> Result<Self> {
        if z_desc.len() != n2_desc.len() || z_desc.len() < 2 {
            return Err(Error::config("tabulated profile needs at least two (z, N²) rows"));
        }
        if z_desc[0].abs() > 1e-9 {
            return Err(Error::config("tabulated profile must start at z = 0"));
        }
        if z_desc.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::config("tabulated z must be strictly decreasing"));
        }
        if n2_desc.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::config("tabulated N² must be finite and non-negative"));
        }
        let mut z: Vec<f64> = z_desc.iter().rev().copied().collect();
        let n2: Vec<f64> = n2_desc.iter().rev().copied().collect();
        let last = z.len() - 1;
        z[last] = 0.0;
        let slopes = pchip_slopes(&z, &n2);
        Ok(Tabulated {
            z,
            n2,
            slopes,
            modulation,
        })
    }

    /// Two whitespace- or comma-separated columns; `#` starts a comment.
    pub fn load(path: &Path, modulation: Modulation) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parse_err = |line: usize, reason: &str| Error::Parse {
            path: path.display().to_string(),
            reason: format!("line {line}: {reason}"),
        };
        let (mut z, mut n2) = (Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(parse_err(i + 1, "expected two columns"));
            }
            let a: f64 = cols[0].parse().map_err(|_| parse_err(i + 1, "bad z value"))?;
            let b: f64 = cols[1].parse().map_err(|_| parse_err(i + 1, "bad N² value"))?;
            z.push(a);
            n2.push(b);
        }
        Tabulated::new(&z, &n2, modulation).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    fn profile(&self, z: f64) -> f64 {
        let n = self.z.len();
        let i = match self.z.partition_point(|&v| v <= z) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.z[i + 1] - self.z[i];
        let u = ((z - self.z[i]) / h).clamp(0.0, 1.0);
        let (b, _) = crate::numerics::hermite_basis(u);
        b[0] * self.n2[i] + b[1] * h * self.slopes[i] + b[2] * self.n2[i + 1] + b[3] * h * self.slopes[i + 1]
    }
}

impl StratificationModel for Tabulated {
    fn name(&self) -> &'static str {
        "tabulated"
    }
    fn depth(&self) -> f64 {
        -self.z[0]
    }
    fn n2(&self, z: f64, x: f64, y: f64) -> f64 {
        self.profile(z) * self.modulation.factor(x, y)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() || d0 == 0.0 {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn positive(params: &Params, key: &str) -> Result<f64> {
    let v = param_f64(params, key)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(format!("'{key}' must be positive")))
    }
}

fn non_negative(params: &Params, key: &str) -> Result<f64> {
    let v = param_f64(params, key)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(format!("'{key}' must be non-negative")))
    }
}

/// Built-in profile families keyed by the `model` name used in configs.
pub fn models() -> &'static Registry<dyn StratificationModel> {
    static REG: OnceLock<Registry<dyn StratificationModel>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn StratificationModel> = Registry::new("stratification model");
        r.register("constant", "uniform N (n0, depth)", |p| {
            Ok(Arc::new(ConstantN {
                n0: non_negative(p, "n0")?,
                depth: positive(p, "depth")?,
            }))
        });
        r.register(
            "two_layer",
            "tanh pycnocline (n_upper, n_lower, interface_depth, transition_width, depth)",
            |p| {
                Ok(Arc::new(TwoLayer {
                    n_upper: non_negative(p, "n_upper")?,
                    n_lower: non_negative(p, "n_lower")?,
                    interface_depth: positive(p, "interface_depth")?,
                    transition_width: positive(p, "transition_width")?,
                    depth: positive(p, "depth")?,
                    modulation: Modulation::from_params(p)?,
                }))
            },
        );
        r.register(
            "thermocline",
            "sech² peak (n_peak, n_background, center_depth, width, depth)",
            |p| {
                Ok(Arc::new(Thermocline {
                    n_peak: non_negative(p, "n_peak")?,
                    n_background: non_negative(p, "n_background")?,
                    center_depth: positive(p, "center_depth")?,
                    width: positive(p, "width")?,
                    depth: positive(p, "depth")?,
                    modulation: Modulation::from_params(p)?,
                }))
            },
        );
        r.register("tabulated", "two-column (z, N²) file at 'path'", |p| {
            let path = param_str(p, "path")?;
            Ok(Arc::new(Tabulated::load(Path::new(path), Modulation::from_params(p)?)?))
        });
        r
    })
}

/// A profile model bound to its horizontal domain.
#[derive(Debug, Clone)]
pub struct StratificationField {
    model: Arc<dyn StratificationModel>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Wavelength used to judge horizontal slowness.
    pub reference_wavelength: f64,
    pub slowness_threshold: f64,
}

impl StratificationField {
    pub fn new(
        model: Arc<dyn StratificationModel>,
        x_range: (f64, f64),
        y_range: (f64, f64),
        reference_wavelength: f64,
    ) -> Result<Self> {
        if !(x_range.0 < x_range.1) || !(y_range.0 < y_range.1) {
            return Err(Error::config("domain ranges must be non-empty"));
        }
        if !(reference_wavelength > 0.0) {
            return Err(Error::config("reference_wavelength must be positive"));
        }
        Ok(StratificationField {
            model,
            x_range,
            y_range,
            reference_wavelength,
            slowness_threshold: 0.1,
        })
    }

    pub fn model(&self) -> &dyn StratificationModel {
        self.model.as_ref()
    }

    pub fn depth(&self) -> f64 {
        self.model.depth()
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x >= self.x_range.0 && x <= self.x_range.1 && y >= self.y_range.0 && y <= self.y_range.1
    }

    pub fn eval_n2(&self, z: f64, x: f64, y: f64) -> Result<f64> {
        let h = self.depth();
        if !(z >= -h && z <= 0.0) || !self.contains_xy(x, y) {
            return Err(Error::OutOfDomain { z, x, y });
        }
        Ok(self.model.n2(z, x, y))
    }

    /// `max_z N` at a horizontal position, from a dense scan of the column.
    pub fn max_n(&self, x: f64, y: f64) -> f64 {
        let h = self.depth();
        let m = 2000;
        (0..=m)
            .map(|i| self.model.n2(-h * i as f64 / m as f64, x, y))
            .fold(0.0_f64, f64::max)
            .sqrt()
    }

    /// Largest horizontal-slowness ratio `|∇N²|·λ/N²` over a sample grid.
    pub fn slowness_ratio(&self) -> f64 {
        let (nx, ny, nz) = (17, 17, 41);
        let h = self.depth();
        let dx = 1e-4 * (self.x_range.1 - self.x_range.0);
        let dy = 1e-4 * (self.y_range.1 - self.y_range.0);
        let mut peak = 0.0_f64;
        let mut worst = 0.0_f64;
        for k in 0..nz {
            let z = -h * k as f64 / (nz - 1) as f64;
            for i in 0..nx {
                let x = lerp(self.x_range, i as f64 / (nx - 1) as f64);
                let xm = (x - dx).max(self.x_range.0);
                let xp = (x + dx).min(self.x_range.1);
                for j in 0..ny {
                    let y = lerp(self.y_range, j as f64 / (ny - 1) as f64);
                    let ym = (y - dy).max(self.y_range.0);
                    let yp = (y + dy).min(self.y_range.1);
                    let n2 = self.model.n2(z, x, y);
                    peak = peak.max(n2);
                    let gx = (self.model.n2(z, xp, y) - self.model.n2(z, xm, y)) / (xp - xm);
                    let gy = (self.model.n2(z, x, yp) - self.model.n2(z, x, ym)) / (yp - ym);
                    let g = gx.hypot(gy);
                    if g == 0.0 {
                        continue;
                    }
                    if n2 <= 1e-12 * peak.max(1e-300) {
                        worst = f64::INFINITY;
                    } else {
                        worst = worst.max(g * self.reference_wavelength / n2);
                    }
                }
            }
        }
        worst
    }

    fn min_n2_on_grid(&self) -> f64 {
        let h = self.depth();
        let mut lo = f64::INFINITY;
        for k in 0..=100 {
            let z = -h * k as f64 / 100.0;
            for i in 0..=16 {
                let x = lerp(self.x_range, i as f64 / 16.0);
                for j in 0..=16 {
                    let y = lerp(self.y_range, j as f64 / 16.0);
                    lo = lo.min(self.model.n2(z, x, y));
                }
            }
        }
        lo
    }
}

fn lerp(r: (f64, f64), u: f64) -> f64 {
    r.0 + (r.1 - r.0) * u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branches {
    Plus,
    Minus,
    Both,
}

impl Branches {
    pub fn signs(self) -> &'static [i8] {
        match self {
            Branches::Plus => &[1],
            Branches::Minus => &[-1],
            Branches::Both => &[1, -1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub speed: f64,
    pub depth: f64,
    pub t0: Vec<f64>,
    pub omega: Vec<f64>,
    pub branches: Branches,
}

impl SourceSpec {
    pub fn track(&self, t0: f64) -> (f64, f64) {
        (self.speed * t0, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub slowness_ratio: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

pub fn validate(field: &StratificationField, source: &SourceSpec) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, passed, measured, detail: String| {
        checks.push(Check {
            name,
            passed,
            measured,
            detail,
        })
    };
    let h = field.depth();
    push("depth_positive", h > 0.0 && h.is_finite(), Some(h), format!("h = {h}"));

    let min_n2 = field.min_n2_on_grid();
    push(
        "n2_non_negative",
        min_n2 >= 0.0,
        Some(min_n2),
        format!("min sampled N² = {min_n2:e}"),
    );

    let ratio = field.slowness_ratio();
    push(
        "horizontal_slowness",
        ratio <= field.slowness_threshold,
        Some(ratio),
        format!(
            "max |grad N²|·λ/N² = {ratio:e} (threshold {})",
            field.slowness_threshold
        ),
    );

    let v = source.speed;
    push("speed_positive", v > 0.0 && v.is_finite(), Some(v), format!("V = {v}"));

    let z0 = source.depth;
    push(
        "source_inside_layer",
        z0 > -h && z0 < 0.0,
        Some(z0),
        format!("z0 = {z0}, layer ({}, 0)", -h),
    );

    let t0_ok = !source.t0.is_empty() && strictly_increasing(&source.t0);
    push(
        "t0_grid",
        t0_ok,
        Some(source.t0.len() as f64),
        "non-empty, strictly increasing".into(),
    );

    let track_ok = source.t0.iter().all(|&t| {
        let (x, y) = source.track(t);
        field.contains_xy(x, y)
    });
    push(
        "track_inside_domain",
        track_ok && t0_ok,
        None,
        format!("x0 = V·t0 within [{}, {}]", field.x_range.0, field.x_range.1),
    );

    let omega_shape = !source.omega.is_empty() && strictly_increasing(&source.omega);
    let n_cap = if track_ok && t0_ok {
        source
            .t0
            .iter()
            .map(|&t| {
                let (x, y) = source.track(t);
                field.max_n(x, y)
            })
            .fold(f64::INFINITY, f64::min)
    } else {
        f64::NAN
    };
    let omega_ok = omega_shape && source.omega.iter().all(|&w| w > 0.0 && w < n_cap);
    push(
        "omega_below_buoyancy",
        omega_ok,
        Some(n_cap),
        format!(
            "omega grid strictly inside (0, {n_cap}) along the track, {} values",
            source.omega.len()
        ),
    );

    ValidationReport {
        checks,
        slowness_ratio: ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant() -> StratificationField {
        StratificationField::new(
            Arc::new(ConstantN { n0: 1.0, depth: PI }),
            (-50.0, 50.0),
            (-50.0, 50.0),
            2.0 * PI,
        )
        .unwrap()
    }

    fn source() -> SourceSpec {
        SourceSpec {
            speed: 1.0,
            depth: -PI / 4.0,
            t0: vec![0.0, 1.0],
            omega: vec![0.5, 0.6],
            branches: Branches::Both,
        }
    }

    #[test]
    fn constant_model_is_coordinate_free() {
        let f = constant();
        assert_eq!(f.eval_n2(-1.0, 3.0, -7.0).unwrap(), 1.0);
        assert_eq!(f.eval_n2(0.0, -50.0, 50.0).unwrap(), 1.0);
        assert!(f.eval_n2(0.1, 0.0, 0.0).is_err());
        assert!(f.eval_n2(-1.0, 51.0, 0.0).is_err());
        let r = validate(&f, &source());
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r.slowness_ratio, 0.0);
    }

    #[test]
    fn source_on_surface_fails() {
        let mut s = source();
        s.depth = 0.0;
        let r = validate(&constant(), &s);
        assert!(!r.passed());
        assert_eq!(r.failures()[0].name, "source_inside_layer");
    }

    #[test]
    fn omega_above_buoyancy_fails() {
        let mut s = source();
        s.omega = vec![0.5, 1.0];
        let r = validate(&constant(), &s);
        assert_eq!(r.failures()[0].name, "omega_below_buoyancy");
    }

    #[test]
    fn short_modulation_scale_fails_slowness() {
        let model = Thermocline {
            n_peak: 1.0,
            n_background: 0.5,
            center_depth: 1.0,
            width: 0.3,
            depth: PI,
            modulation: Modulation {
                amplitude: 0.1,
                scale: 5.0,
            },
        };
        let f = StratificationField::new(Arc::new(model), (-50.0, 50.0), (-50.0, 50.0), 2.0 * PI).unwrap();
        let r = validate(&f, &source());
        assert!(r.slowness_ratio > 0.1);
        assert!(r.failures().iter().any(|c| c.name == "horizontal_slowness"));
    }

    #[test]
    fn zero_modulation_matches_plain_profile() {
        let plain = TwoLayer {
            n_upper: 1.0,
            n_lower: 0.4,
            interface_depth: 1.0,
            transition_width: 0.2,
            depth: PI,
            modulation: Modulation::NONE,
        };
        let mut zero = plain.clone();
        zero.modulation = Modulation {
            amplitude: 0.0,
            scale: 30.0,
        };
        for &(z, x, y) in &[(-0.3, 1.0, 2.0), (-1.0, -7.0, 3.0), (-3.0, 10.0, -1.0)] {
            assert_eq!(plain.n2(z, x, y), zero.n2(z, x, y));
        }
    }

    #[test]
    fn thermocline_peaks_at_center() {
        let m = Thermocline {
            n_peak: 1.2,
            n_background: 0.3,
            center_depth: 0.8,
            width: 0.25,
            depth: PI,
            modulation: Modulation {
                amplitude: 0.05,
                scale: 200.0,
            },
        };
        let (x, y) = (13.0, 4.0);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=100_000 {
            let z = -PI * i as f64 / 100_000.0;
            let v = m.n2(z, x, y);
            if v > best.0 {
                best = (v, z);
            }
        }
        assert!((best.1 + 0.8).abs() <= PI / 100_000.0);
        assert!(m.n2(-0.8, x, y) >= best.0);
    }

    #[test]
    fn pchip_reproduces_nodes_and_stays_monotone() {
        let z = [0.0, -0.5, -1.0, -2.0, -3.0];
        let n2 = [0.1, 0.9, 1.0, 0.3, 0.2];
        let t = Tabulated::new(&z, &n2, Modulation::NONE).unwrap();
        for (zi, vi) in z.iter().zip(&n2) {
            assert!((t.n2(*zi, 0.0, 0.0) - vi).abs() < 1e-15);
        }
        let mut prev = t.n2(-3.0, 0.0, 0.0);
        for i in 1..=300 {
            let zz = -3.0 + i as f64 * 0.01;
            let v = t.n2(zz, 0.0, 0.0);
            if zz <= -1.0 + 1e-12 {
                assert!(v >= prev - 1e-15, "not monotone at {zz}");
            } else {
                assert!(v <= prev + 1e-15, "not monotone at {zz}");
            }
            assert!(v <= 1.0 + 1e-15);
            prev = v;
        }
        assert_eq!(t.depth(), 3.0);
    }

    #[test]
    fn tabulated_rejects_bad_order() {
        assert!(Tabulated::new(&[0.0, -1.0, -0.5], &[1.0, 1.0, 1.0], Modulation::NONE).is_err());
        assert!(Tabulated::new(&[-0.1, -1.0], &[1.0, 1.0], Modulation::NONE).is_err());
    }

    #[test]
    fn modulated_models_are_y_symmetric() {
        let m = Modulation {
            amplitude: 0.1,
            scale: 40.0,
        };
        for y in [0.3, 5.0, 17.0] {
            assert_eq!(m.factor(3.0, y), m.factor(3.0, -y));
        }
    }
}
