//! The dispersion surface `K_n(ω, x, y)` and its partial derivatives.
//!
//! The tabulated surface is a tensor-product cubic Hermite interpolant:
//! in ω it matches K and the mode solver's `K'_ω` at every node, in x and
//! y it uses not-a-knot spline slopes. `K'_x` and `K'_y` are the exact
//! derivatives of that interpolant.

use crate::error::{Error, Result};
use crate::modes::{k_and_derivative, solve_k, ModeOptions};
use crate::numerics::{hermite_basis, locate, SplineSlopes};
use crate::stratification::StratificationField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionValue {
    pub k: f64,
    pub k_omega: f64,
    pub k_x: f64,
    pub k_y: f64,
}

/// Anything that can answer `(K, K'_ω, K'_x, K'_y)` for one mode.
pub trait DispersionProvider: Send + Sync {
    fn name(&self) -> &'static str;
    fn mode(&self) -> usize;
    fn eval(&self, omega: f64, x: f64, y: f64) -> Result<DispersionValue>;
    fn is_valid(&self, omega: f64, x: f64, y: f64) -> bool {
        self.eval(omega, x, y).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub omega: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SurfaceGrid {
    fn check(&self) -> Result<()> {
        for (name, axis) in [("omega", &self.omega), ("x", &self.x), ("y", &self.y)] {
            if axis.len() < 2 {
                return Err(Error::config(format!(
                    "dispersion {name} grid needs at least two nodes"
                )));
            }
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::config(format!(
                    "dispersion {name} grid must be strictly increasing"
                )));
            }
        }
        if self.omega[0] <= 0.0 {
            return Err(Error::config("dispersion omega grid must be positive"));
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.omega.len() * self.x.len() * self.y.len()
    }
}

#[derive(Debug, Clone)]
struct NodeField {
    v: Vec<f64>,
    vx: Vec<f64>,
    vy: Vec<f64>,
    vxy: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DispersionSurface {
    mode: usize,
    grid: SurfaceGrid,
    k: Vec<f64>,
    k_omega: Vec<f64>,
    valid: Vec<bool>,
    fk: NodeField,
    fw: NodeField,
    medium: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    mode: usize,
    omega: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    k: Vec<f64>,
    k_omega: Vec<f64>,
    valid: Vec<bool>,
    /// Description of the medium the table was built for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    medium: Option<serde_json::Value>,
}

const CACHE_FORMAT: &str = "igwave-dispersion-surface";
const CACHE_VERSION: u32 = 1;

/// Tabulates mode `n` on the grid; nodes where the mode does not propagate
/// are excluded from the valid region.
pub fn build_surface(
    field: &StratificationField,
    n: usize,
    grid: &SurfaceGrid,
    opts: &ModeOptions,
) -> Result<DispersionSurface> {
    grid.check()?;
    let (ny, nxy) = (grid.y.len(), grid.x.len() * grid.y.len());
    let nodes: Vec<Result<Option<(f64, f64)>>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let w = grid.omega[idx / nxy];
            let x = grid.x[(idx % nxy) / ny];
            let y = grid.y[idx % ny];
            match k_and_derivative(field, w, x, y, n, opts) {
                Ok(v) => Ok(Some(v)),
                Err(Error::NoPropagatingMode { .. }) | Err(Error::DerivativeFailure { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut k = vec![0.0; grid.len()];
    let mut k_omega = vec![0.0; grid.len()];
    let mut valid = vec![false; grid.len()];
    for (idx, node) in nodes.into_iter().enumerate() {
        if let Some((kv, dv)) = node? {
            k[idx] = kv;
            k_omega[idx] = dv;
            valid[idx] = true;
        }
    }
    DispersionSurface::from_table(n, grid.clone(), k, k_omega, valid)
}

impl DispersionSurface {
    pub fn from_table(
        mode: usize,
        grid: SurfaceGrid,
        k: Vec<f64>,
        k_omega: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        grid.check()?;
        let len = grid.len();
        if k.len() != len || k_omega.len() != len || valid.len() != len {
            return Err(Error::config("dispersion table size does not match its grid"));
        }
        if !valid.iter().any(|&v| v) {
            return Err(Error::Unavailable(format!(
                "mode {mode} propagates at no node of the dispersion grid"
            )));
        }
        for (i, (&kv, &ok)) in k.iter().zip(&valid).enumerate() {
            if ok && !(kv > 0.0 && kv.is_finite() && k_omega[i].is_finite()) {
                return Err(Error::config(format!("non-positive K at dispersion node {i}")));
            }
        }
        let (kf, wf) = fill_invalid(&grid, &k, &k_omega, &valid);
        let fk = node_field(&grid, kf);
        let fw = node_field(&grid, wf);
        Ok(DispersionSurface {
            mode,
            grid,
            k,
            k_omega,
            valid,
            fk,
            fw,
            medium: None,
        })
    }

    /// Attaches a description of the medium, stored with the cache.
    pub fn with_medium(mut self, medium: serde_json::Value) -> Self {
        self.medium = Some(medium);
        self
    }

    pub fn medium(&self) -> Option<&serde_json::Value> {
        self.medium.as_ref()
    }

    pub fn grid(&self) -> &SurfaceGrid {
        &self.grid
    }

    pub fn table(&self) -> (&[f64], &[f64], &[bool]) {
        (&self.k, &self.k_omega, &self.valid)
    }

    fn index(&self, iw: usize, ix: usize, iy: usize) -> usize {
        (iw * self.grid.x.len() + ix) * self.grid.y.len() + iy
    }

    fn cell(&self, omega: f64, x: f64, y: f64) -> Option<[(usize, f64); 3]> {
        let cw = locate(&self.grid.omega, omega)?;
        let cx = locate(&self.grid.x, x)?;
        let cy = locate(&self.grid.y, y)?;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    if !self.valid[self.index(cw.0 + a, cx.0 + b, cy.0 + c)] {
                        return None;
                    }
                }
            }
        }
        Some([cw, cx, cy])
    }

    /// Bicubic Hermite value and x, y derivatives of one node field on the
    /// ω-layer `iw`.
    fn layer(&self, f: &NodeField, iw: usize, cx: (usize, f64), cy: (usize, f64)) -> [f64; 3] {
        let (ix, u) = cx;
        let (iy, v) = cy;
        let hx = self.grid.x[ix + 1] - self.grid.x[ix];
        let hy = self.grid.y[iy + 1] - self.grid.y[iy];
        let (bx, dbx) = hermite_basis(u);
        let (by, dby) = hermite_basis(v);
        let mut out = [0.0; 3];
        for i in 0..2 {
            let (ax, bxv, dax, dbxv) = (bx[2 * i], bx[2 * i + 1], dbx[2 * i], dbx[2 * i + 1]);
            for j in 0..2 {
                let (ay, byv, day, dbyv) = (by[2 * j], by[2 * j + 1], dby[2 * j], dby[2 * j + 1]);
                let n = self.index(iw, ix + i, iy + j);
                let (p, px, py, pxy) = (f.v[n], hx * f.vx[n], hy * f.vy[n], hx * hy * f.vxy[n]);
                out[0] += ax * ay * p + bxv * ay * px + ax * byv * py + bxv * byv * pxy;
                out[1] += (dax * ay * p + dbxv * ay * px + dax * byv * py + dbxv * byv * pxy) / hx;
                out[2] += (ax * day * p + bxv * day * px + ax * dbyv * py + bxv * dbyv * pxy) / hy;
            }
        }
        out
    }

    /// `(K, K'_ω, K'_x, K'_y)` inside the valid region.
    pub fn eval(&self, omega: f64, x: f64, y: f64) -> Result<DispersionValue> {
        let [cw, cx, cy] = self.cell(omega, x, y).ok_or(Error::Extrapolation { omega, x, y })?;
        let (iw, t) = cw;
        let hw = self.grid.omega[iw + 1] - self.grid.omega[iw];
        let (bw, dbw) = hermite_basis(t);
        let mut out = DispersionValue {
            k: 0.0,
            k_omega: 0.0,
            k_x: 0.0,
            k_y: 0.0,
        };
        for a in 0..2 {
            let f = self.layer(&self.fk, iw + a, cx, cy);
            let g = self.layer(&self.fw, iw + a, cx, cy);
            let (va, vb, da, db) = (bw[2 * a], bw[2 * a + 1], dbw[2 * a], dbw[2 * a + 1]);
            out.k += va * f[0] + vb * hw * g[0];
            out.k_omega += da / hw * f[0] + db * g[0];
            out.k_x += va * f[1] + vb * hw * g[1];
            out.k_y += va * f[2] + vb * hw * g[2];
        }
        Ok(out)
    }

    pub fn is_valid(&self, omega: f64, x: f64, y: f64) -> bool {
        self.cell(omega, x, y).is_some()
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let file = CacheFile {
            format: CACHE_FORMAT.into(),
            version: CACHE_VERSION,
            mode: self.mode,
            omega: self.grid.omega.clone(),
            x: self.grid.x.clone(),
            y: self.grid.y.clone(),
            k: self.k.clone(),
            k_omega: self.k_omega.clone(),
            valid: self.valid.clone(),
            medium: self.medium.clone(),
        };
        std::fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parse = |reason: String| Error::Parse {
            path: path.display().to_string(),
            reason,
        };
        let file: CacheFile = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
        if file.format != CACHE_FORMAT || file.version != CACHE_VERSION {
            return Err(parse(format!(
                "unsupported cache format {} v{}",
                file.format, file.version
            )));
        }
        let grid = SurfaceGrid {
            omega: file.omega,
            x: file.x,
            y: file.y,
        };
        let surface = DispersionSurface::from_table(file.mode, grid, file.k, file.k_omega, file.valid)
            .map_err(|e| parse(e.to_string()))?;
        Ok(match file.medium {
            Some(m) => surface.with_medium(m),
            None => surface,
        })
    }
}

impl DispersionProvider for DispersionSurface {
    fn name(&self) -> &'static str {
        "tabulated"
    }
    fn mode(&self) -> usize {
        self.mode
    }
    fn eval(&self, omega: f64, x: f64, y: f64) -> Result<DispersionValue> {
        DispersionSurface::eval(self, omega, x, y)
    }
    fn is_valid(&self, omega: f64, x: f64, y: f64) -> bool {
        DispersionSurface::is_valid(self, omega, x, y)
    }
}

/// Invalid nodes borrow the nearest valid node (index metric) so that the
/// spline slopes stay finite; cells touching them are still rejected.
fn fill_invalid(grid: &SurfaceGrid, k: &[f64], kw: &[f64], valid: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let (nx, ny) = (grid.x.len(), grid.y.len());
    let coords = |idx: usize| {
        let iw = idx / (nx * ny);
        let ix = (idx % (nx * ny)) / ny;
        (iw as i64, ix as i64, (idx % ny) as i64)
    };
    let good: Vec<usize> = (0..valid.len()).filter(|&i| valid[i]).collect();
    let mut kf = k.to_vec();
    let mut wf = kw.to_vec();
    for idx in (0..valid.len()).filter(|&i| !valid[i]) {
        let (a, b, c) = coords(idx);
        let src = *good
            .iter()
            .min_by_key(|&&g| {
                let (p, q, r) = coords(g);
                (p - a).abs() + (q - b).abs() + (r - c).abs()
            })
            .expect("at least one valid node");
        kf[idx] = k[src];
        wf[idx] = kw[src];
    }
    (kf, wf)
}

fn node_field(grid: &SurfaceGrid, v: Vec<f64>) -> NodeField {
    let (nw, nx, ny) = (grid.omega.len(), grid.x.len(), grid.y.len());
    let sx = SplineSlopes::new(&grid.x);
    let sy = SplineSlopes::new(&grid.y);
    let mut vx = vec![0.0; v.len()];
    let mut vy = vec![0.0; v.len()];
    let mut vxy = vec![0.0; v.len()];
    for iw in 0..nw {
        for iy in 0..ny {
            sx.apply_strided(&v, iw * nx * ny + iy, ny, &mut vx);
        }
        for ix in 0..nx {
            let off = (iw * nx + ix) * ny;
            sy.apply_strided(&v, off, 1, &mut vy);
            sy.apply_strided(&vx, off, 1, &mut vxy);
        }
    }
    NodeField { v, vx, vy, vxy }
}

/// Direct mode solves per query, with centred differences in x and y.
/// Slow; serves as the reference for the tabulated surface.
pub struct OnTheFly {
    field: StratificationField,
    mode: usize,
    opts: ModeOptions,
    dx: f64,
    dy: f64,
}

impl OnTheFly {
    /// `fd_fraction` scales the x/y difference steps to the domain extent.
    pub fn new(field: StratificationField, mode: usize, opts: ModeOptions, fd_fraction: f64) -> Self {
        let dx = fd_fraction * (field.x_range.1 - field.x_range.0);
        let dy = fd_fraction * (field.y_range.1 - field.y_range.0);
        OnTheFly {
            field,
            mode,
            opts,
            dx,
            dy,
        }
    }
}

impl DispersionProvider for OnTheFly {
    fn name(&self) -> &'static str {
        "on_the_fly"
    }
    fn mode(&self) -> usize {
        self.mode
    }
    fn eval(&self, omega: f64, x: f64, y: f64) -> Result<DispersionValue> {
        let (f, n, o) = (&self.field, self.mode, &self.opts);
        let (xr, yr) = (f.x_range, f.y_range);
        if !(x - self.dx >= xr.0 && x + self.dx <= xr.1 && y - self.dy >= yr.0 && y + self.dy <= yr.1) {
            return Err(Error::Extrapolation { omega, x, y });
        }
        let wrap = |e: Error| match e {
            Error::NoPropagatingMode { .. } | Error::DerivativeFailure { .. } => Error::Extrapolation { omega, x, y },
            other => other,
        };
        let (k, k_omega) = k_and_derivative(f, omega, x, y, n, o).map_err(wrap)?;
        let kk = |xx: f64, yy: f64| solve_k(f, omega, xx, yy, n, o).map_err(wrap);
        let k_x = (kk(x + self.dx, y)? - kk(x - self.dx, y)?) / (2.0 * self.dx);
        let k_y = (kk(x, y + self.dy)? - kk(x, y - self.dy)?) / (2.0 * self.dy);
        Ok(DispersionValue { k, k_omega, k_x, k_y })
    }
}
