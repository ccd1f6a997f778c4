#![allow(dead_code)]

use igwave::dispersion::{build_surface, DispersionProvider, DispersionSurface, DispersionValue, SurfaceGrid};
use igwave::modes::ModeOptions;
use igwave::stratification::{ConstantN, Modulation, StratificationField, StratificationModel, Thermocline};
use igwave::Result;
use std::f64::consts::PI;
use std::sync::Arc;

pub fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Closed-form uniform-N dispersion `K = (nπ/h)·ω/√(N² − ω²)`.
#[derive(Debug, Clone, Copy)]
pub struct Analytic {
    pub n: f64,
    pub h: f64,
    pub mode: usize,
}

impl Analytic {
    pub const CANONICAL: Analytic = Analytic { n: 1.0, h: PI, mode: 1 };
}

impl DispersionProvider for Analytic {
    fn name(&self) -> &'static str {
        "analytic"
    }
    fn mode(&self) -> usize {
        self.mode
    }
    fn eval(&self, omega: f64, _x: f64, _y: f64) -> Result<DispersionValue> {
        let a = self.mode as f64 * PI / self.h;
        let d = self.n * self.n - omega * omega;
        Ok(DispersionValue {
            k: a * omega / d.sqrt(),
            k_omega: a * self.n * self.n / d.powf(1.5),
            k_x: 0.0,
            k_y: 0.0,
        })
    }
}

pub fn homogeneous_field(half_width: f64) -> StratificationField {
    let model: Arc<dyn StratificationModel> = Arc::new(ConstantN { n0: 1.0, depth: PI });
    StratificationField::new(model, (-half_width, half_width), (-half_width, half_width), 10.0).unwrap()
}

/// Uniform N² = 1 with a 10% modulation over L = 50h.
pub fn modulated_field(half_width: f64) -> StratificationField {
    let model: Arc<dyn StratificationModel> = Arc::new(Thermocline {
        n_peak: 1.0,
        n_background: 1.0,
        center_depth: 1.0,
        width: 1.0,
        depth: PI,
        modulation: Modulation {
            amplitude: 0.1,
            scale: 50.0 * PI,
        },
    });
    StratificationField::new(model, (-half_width, half_width), (-half_width, half_width), 10.0).unwrap()
}

pub fn surface(field: &StratificationField, omega: Vec<f64>, nxy: usize) -> DispersionSurface {
    let (x0, x1) = field.x_range;
    let (y0, y1) = field.y_range;
    let grid = SurfaceGrid {
        omega,
        x: lin(x0, x1, nxy),
        y: lin(y0, y1, nxy),
    };
    build_surface(field, 1, &grid, &ModeOptions::default()).unwrap()
}
