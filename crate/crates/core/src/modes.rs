//! Vertical eigenproblem `A'' + K²(N²/ω² − 1)A = 0`, `A(−h) = A(0) = 0`,
//! solved by shooting from the bottom with RK4 on a uniform grid.

use crate::error::{Error, Result};
use crate::numerics::{brent, hermite_basis, simpson};
use crate::stratification::StratificationField;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeOptions {
    /// Points of the uniform z-grid, endpoints included (odd).
    pub grid_points: usize,
    pub max_mode: usize,
    /// Initial slope `f'(−h)` of the shooting solution before normalization.
    pub shooting_slope: f64,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions {
            grid_points: 2001,
            max_mode: 10,
            shooting_slope: 1.0,
        }
    }
}

/// One normalized vertical mode at `(ω, x, y)`.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub mode: usize,
    pub omega: f64,
    pub x: f64,
    pub y: f64,
    pub k: f64,
    pub depth: f64,
    /// Eigenfunction on `z_i = −h + i·h/(M−1)`.
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    d2f: Vec<f64>,
    /// `∫(N² − ω²) f² dz` evaluated on the grid after normalization.
    pub norm_integral: f64,
    /// The normalization integrand `N² − ω²` changes sign in the column.
    pub integrand_sign_change: bool,
}

impl ModeSolution {
    pub fn step(&self) -> f64 {
        self.depth / (self.f.len() - 1) as f64
    }

    pub fn z_at(&self, i: usize) -> f64 {
        if i + 1 == self.f.len() {
            0.0
        } else {
            -self.depth + i as f64 * self.step()
        }
    }

    fn cell(&self, z: f64) -> Result<(usize, f64, f64)> {
        if !(z >= -self.depth && z <= 0.0) {
            return Err(Error::OutOfDomain {
                z,
                x: self.x,
                y: self.y,
            });
        }
        let d = self.step();
        let last = self.f.len() - 2;
        let i = (((z + self.depth) / d).floor() as usize).min(last);
        let u = ((z + self.depth) / d - i as f64).clamp(0.0, 1.0);
        Ok((i, u, d))
    }

    /// Eigenfunction value at any depth in the layer.
    pub fn f_at(&self, z: f64) -> Result<f64> {
        let (i, u, d) = self.cell(z)?;
        let (b, _) = hermite_basis(u);
        Ok(b[0] * self.f[i] + b[1] * d * self.df[i] + b[2] * self.f[i + 1] + b[3] * d * self.df[i + 1])
    }

    /// `∂f/∂z` at any depth in the layer.
    pub fn df_dz_at(&self, z: f64) -> Result<f64> {
        let (i, u, d) = self.cell(z)?;
        let (b, _) = hermite_basis(u);
        Ok(b[0] * self.df[i] + b[1] * d * self.d2f[i] + b[2] * self.df[i + 1] + b[3] * d * self.d2f[i + 1])
    }

    /// Interior sign changes of the sampled eigenfunction.
    pub fn interior_zeros(&self) -> usize {
        count_sign_changes(&self.f[1..self.f.len() - 1])
    }

    /// `f''` at grid nodes, from the differential equation.
    pub fn second_derivative(&self) -> &[f64] {
        &self.d2f
    }
}

fn count_sign_changes(v: &[f64]) -> usize {
    let mut prev = 0.0_f64;
    let mut n = 0;
    for &x in v {
        if x == 0.0 {
            continue;
        }
        if prev != 0.0 && x.signum() != prev.signum() {
            n += 1;
        }
        prev = x;
    }
    n
}

/// `N²` sampled on the half-step grid of one column.
struct Column {
    depth: f64,
    intervals: usize,
    n2: Vec<f64>,
    n_max: f64,
}

impl Column {
    fn new(field: &StratificationField, x: f64, y: f64, opts: &ModeOptions) -> Result<Self> {
        let depth = field.depth();
        if !field.contains_xy(x, y) {
            return Err(Error::OutOfDomain { z: 0.0, x, y });
        }
        if opts.grid_points < 5 || opts.grid_points.is_multiple_of(2) {
            return Err(Error::config("mode grid_points must be odd and at least 5"));
        }
        let intervals = opts.grid_points - 1;
        let fine = 2 * intervals;
        let model = field.model();
        let n2: Vec<f64> = (0..=fine)
            .map(|j| {
                let z = if j == fine {
                    0.0
                } else {
                    -depth + depth * j as f64 / fine as f64
                };
                model.n2(z, x, y)
            })
            .collect();
        let n_max = n2.iter().copied().fold(0.0_f64, f64::max).sqrt();
        Ok(Column {
            depth,
            intervals,
            n2,
            n_max,
        })
    }

    fn step(&self) -> f64 {
        self.depth / self.intervals as f64
    }

    /// Integrates from the bottom; returns `f(0)` and the sign changes of
    /// `f` over the nodes above the bottom, `f(0)` included.
    fn shoot(&self, k: f64, omega: f64, slope: f64) -> (f64, usize) {
        let lam = k * k / (omega * omega);
        let w2 = omega * omega;
        let d = self.step();
        let (mut f, mut g) = (0.0_f64, slope);
        let mut prev = 0.0_f64;
        let mut zeros = 0;
        for i in 0..self.intervals {
            let a0 = -lam * (self.n2[2 * i] - w2);
            let ah = -lam * (self.n2[2 * i + 1] - w2);
            let a1 = -lam * (self.n2[2 * i + 2] - w2);
            (f, g) = rk4_step(f, g, a0, ah, a1, d);
            if f.abs() > 1e150 {
                f *= 1e-150;
                g *= 1e-150;
            }
            if f != 0.0 {
                if prev != 0.0 && f.signum() != prev.signum() {
                    zeros += 1;
                }
                prev = f;
            }
        }
        (f, zeros)
    }

    fn trajectory(&self, k: f64, omega: f64, slope: f64) -> (Vec<f64>, Vec<f64>) {
        let lam = k * k / (omega * omega);
        let w2 = omega * omega;
        let d = self.step();
        let mut f = vec![0.0; self.intervals + 1];
        let mut g = vec![0.0; self.intervals + 1];
        g[0] = slope;
        for i in 0..self.intervals {
            let a0 = -lam * (self.n2[2 * i] - w2);
            let ah = -lam * (self.n2[2 * i + 1] - w2);
            let a1 = -lam * (self.n2[2 * i + 2] - w2);
            (f[i + 1], g[i + 1]) = rk4_step(f[i], g[i], a0, ah, a1, d);
        }
        (f, g)
    }
}

#[inline]
fn rk4_step(f: f64, g: f64, a0: f64, ah: f64, a1: f64, d: f64) -> (f64, f64) {
    let k1f = g;
    let k1g = a0 * f;
    let k2f = g + 0.5 * d * k1g;
    let k2g = ah * (f + 0.5 * d * k1f);
    let k3f = g + 0.5 * d * k2g;
    let k3g = ah * (f + 0.5 * d * k2f);
    let k4f = g + d * k3g;
    let k4g = a1 * (f + d * k3f);
    (
        f + d / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
        g + d / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
    )
}

struct Problem<'a> {
    column: &'a Column,
    omega: f64,
    x: f64,
    y: f64,
    n: usize,
    slope: f64,
}

impl Problem<'_> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::ModeSolver {
            mode: self.n,
            omega: self.omega,
            x: self.x,
            y: self.y,
            reason: reason.into(),
        }
    }

    fn count(&self, k: f64) -> usize {
        self.column.shoot(k, self.omega, self.slope).1
    }

    /// `K_n` by zero-count bracketing and Brent on `f(0; K)`.
    fn eigenvalue(&self, guess: Option<f64>) -> Result<f64> {
        let n = self.n;
        let (mut lo, mut hi) = match guess.and_then(|g| self.bracket_near(g)) {
            Some(b) => b,
            None => self.bracket_from_scratch()?,
        };
        let mut clo = self.count(lo);
        let mut chi = self.count(hi);
        let mut iter = 0;
        while !(clo == n - 1 && chi == n) {
            let mid = 0.5 * (lo + hi);
            let c = self.count(mid);
            if c >= n {
                hi = mid;
                chi = c;
            } else {
                lo = mid;
                clo = c;
            }
            iter += 1;
            if iter > 200 || hi - lo <= 1e-15 * hi {
                return Err(self.fail(format!(
                    "zero-count bracketing stalled in [{lo}, {hi}] (counts {clo}, {chi})"
                )));
            }
        }
        let shoot = |k: f64| self.column.shoot(k, self.omega, self.slope).0;
        brent(shoot, lo, hi, 1e-15 * hi, 200)
            .ok_or_else(|| self.fail(format!("no sign change of f(0) in [{lo}, {hi}]")))
    }

    fn bracket_near(&self, g: f64) -> Option<(f64, f64)> {
        let (lo, hi) = (g * (1.0 - 1e-3), g * (1.0 + 1e-3));
        (self.count(lo) == self.n - 1 && self.count(hi) == self.n).then_some((lo, hi))
    }

    fn bracket_from_scratch(&self) -> Result<(f64, f64)> {
        let n = self.n;
        let w = self.omega;
        // A uniform column at the largest N has the smallest K_n; start there.
        let r_max = (self.column.n_max * self.column.n_max - w * w) / (w * w);
        let k_floor = n as f64 * std::f64::consts::PI / (self.column.depth * r_max.sqrt());
        let mut lo = 0.0;
        let mut hi = k_floor * (1.0 + 1e-6);
        for _ in 0..200 {
            if self.count(hi) >= n {
                return Ok((lo, hi));
            }
            lo = hi;
            hi *= 2.0;
        }
        Err(self.fail("could not enclose the eigenvalue from above"))
    }
}

fn check_mode(field: &StratificationField, omega: f64, n: usize, opts: &ModeOptions) -> Result<()> {
    if n == 0 || n > opts.max_mode {
        return Err(Error::config(format!("mode index {n} outside 1..={}", opts.max_mode)));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::config(format!("omega must be positive, got {omega}")));
    }
    if !(field.depth() > 0.0) {
        return Err(Error::config("layer depth must be positive"));
    }
    Ok(())
}

fn eigenvalue(
    column: &Column,
    omega: f64,
    x: f64,
    y: f64,
    n: usize,
    opts: &ModeOptions,
    guess: Option<f64>,
) -> Result<f64> {
    if omega >= column.n_max {
        return Err(Error::NoPropagatingMode {
            omega,
            n_max: column.n_max,
            x,
            y,
        });
    }
    Problem {
        column,
        omega,
        x,
        y,
        n,
        slope: opts.shooting_slope,
    }
    .eigenvalue(guess)
}

/// `K_n(ω, x, y)` without building the eigenfunction.
pub fn solve_k(field: &StratificationField, omega: f64, x: f64, y: f64, n: usize, opts: &ModeOptions) -> Result<f64> {
    check_mode(field, omega, n, opts)?;
    let column = Column::new(field, x, y, opts)?;
    eigenvalue(&column, omega, x, y, n, opts, None)
}

/// The `n`-th mode (1-based, increasing K) with `∫(N² − ω²) f² dz = 1` and
/// `f'(−h) > 0`.
pub fn solve_mode(
    field: &StratificationField,
    omega: f64,
    x: f64,
    y: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<ModeSolution> {
    check_mode(field, omega, n, opts)?;
    let column = Column::new(field, x, y, opts)?;
    let k = eigenvalue(&column, omega, x, y, n, opts, None)?;
    let (mut f, mut df) = column.trajectory(k, omega, opts.shooting_slope);
    let w2 = omega * omega;
    let weight: Vec<f64> = (0..f.len()).map(|i| column.n2[2 * i] - w2).collect();
    let integrand: Vec<f64> = f.iter().zip(&weight).map(|(v, w)| w * v * v).collect();
    let raw = simpson(&integrand, column.step());
    if !(raw > 0.0) {
        return Err(Error::ModeSolver {
            mode: n,
            omega,
            x,
            y,
            reason: format!("normalization integral {raw:e} is not positive"),
        });
    }
    let scale = opts.shooting_slope.signum() / raw.sqrt();
    f.iter_mut().for_each(|v| *v *= scale);
    df.iter_mut().for_each(|v| *v *= scale);
    let last = f.len() - 1;
    f[last] = 0.0;
    let lam = k * k / w2;
    let d2f: Vec<f64> = f.iter().zip(&weight).map(|(v, w)| -lam * w * v).collect();
    let integrand: Vec<f64> = f.iter().zip(&weight).map(|(v, w)| w * v * v).collect();
    let norm_integral = simpson(&integrand, column.step());
    let integrand_sign_change = weight.iter().any(|&w| w < 0.0) && weight.iter().any(|&w| w > 0.0);
    if integrand_sign_change {
        log::debug!("mode {n} at omega={omega}, ({x}, {y}): N² − ω² changes sign in the column");
    }
    Ok(ModeSolution {
        mode: n,
        omega,
        x,
        y,
        k,
        depth: column.depth,
        f,
        df,
        d2f,
        norm_integral,
        integrand_sign_change,
    })
}

/// `∂K_n/∂ω` by a centred difference with one Richardson refinement.
pub fn domega_derivative(
    field: &StratificationField,
    omega: f64,
    x: f64,
    y: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<f64> {
    k_and_derivative(field, omega, x, y, n, opts).map(|(_, d)| d)
}

/// `(K_n, ∂K_n/∂ω)` sharing one column evaluation.
pub fn k_and_derivative(
    field: &StratificationField,
    omega: f64,
    x: f64,
    y: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<(f64, f64)> {
    check_mode(field, omega, n, opts)?;
    let column = Column::new(field, x, y, opts)?;
    let k = eigenvalue(&column, omega, x, y, n, opts, None)?;
    let mut step = (1e-4 * omega).max(1e-6);
    let ceiling = column.n_max * (1.0 - 1e-9);
    while omega + step >= ceiling || omega - step <= 0.0 {
        step *= 0.5;
        if step < 1e-10 * omega.max(1e-300) || step < 1e-12 {
            return Err(Error::DerivativeFailure {
                omega,
                reason: format!(
                    "step underflow: omega is within {:e} of the band edge (max N = {})",
                    (column.n_max - omega).min(omega),
                    column.n_max
                ),
            });
        }
    }
    let solve = |w: f64| -> Result<f64> {
        eigenvalue(&column, w, x, y, n, opts, Some(k)).map_err(|e| Error::DerivativeFailure {
            omega,
            reason: e.to_string(),
        })
    };
    let central = |h: f64| -> Result<f64> { Ok((solve(omega + h)? - solve(omega - h)?) / (2.0 * h)) };
    let coarse = central(step)?;
    let fine = central(0.5 * step)?;
    Ok((k, (4.0 * fine - coarse) / 3.0))
}
