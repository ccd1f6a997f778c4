//! Small numerical building blocks shared by the solver modules.

use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 20-point Gauss–Legendre rule.
pub fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// Composite Simpson rule on uniformly spaced samples (odd sample count).
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples");
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * step / 3.0
}

/// Brent's method on a sign-changing bracket.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    None
}

/// Cubic Hermite basis on the unit interval: (h00, h10, h01, h11) and their
/// first derivatives with respect to `u`.
#[inline]
pub fn hermite_basis(u: f64) -> ([f64; 4], [f64; 4]) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        [
            2.0 * u3 - 3.0 * u2 + 1.0,
            u3 - 2.0 * u2 + u,
            -2.0 * u3 + 3.0 * u2,
            u3 - u2,
        ],
        [
            6.0 * u2 - 6.0 * u,
            3.0 * u2 - 4.0 * u + 1.0,
            -6.0 * u2 + 6.0 * u,
            3.0 * u2 - 2.0 * u,
        ],
    )
}

/// Linear operator mapping node values to the node slopes of the
/// interpolating cubic spline (not-a-knot ends for four or more nodes,
/// the interpolating parabola for three, the secant for two).
#[derive(Debug, Clone)]
pub struct SplineSlopes {
    n: usize,
    matrix: Vec<f64>,
}

impl SplineSlopes {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        assert!(n >= 2, "spline needs at least two nodes");
        let mut matrix = vec![0.0; n * n];
        // Column j is the slope response to the j-th unit data vector.
        let system = slope_system(nodes);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let slopes = system.solve(nodes, &e);
            for i in 0..n {
                matrix[i * n + j] = slopes[i];
            }
        }
        SplineSlopes { n, matrix }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Applies the operator to data sampled with a stride (so it can run
    /// along any axis of a flattened tensor).
    pub fn apply_strided(&self, data: &[f64], offset: usize, stride: usize, out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.matrix[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (j, m) in row.iter().enumerate() {
                acc += m * data[offset + j * stride];
            }
            out[offset + i * stride] = acc;
        }
    }
}

enum SlopeSystem {
    Secant,
    Parabola,
    NotAKnot(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SlopeSystem {
    fn solve(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        match self {
            SlopeSystem::Secant => {
                let s = (y[1] - y[0]) / (x[1] - x[0]);
                vec![s; 2]
            }
            SlopeSystem::Parabola => {
                let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
                let (d0, d1) = ((y[1] - y[0]) / h0, (y[2] - y[1]) / h1);
                let curv = (d1 - d0) / (h0 + h1);
                vec![d0 - curv * h0, d0 + curv * h0, d1 + curv * h1]
            }
            SlopeSystem::NotAKnot(lu) => {
                let rhs = slope_rhs(x, y);
                let sol = lu
                    .solve(&nalgebra::DVector::from_vec(rhs))
                    .expect("not-a-knot spline system is nonsingular");
                (0..n).map(|i| sol[i]).collect()
            }
        }
    }
}

fn slope_system(x: &[f64]) -> SlopeSystem {
    let n = x.len();
    match n {
        2 => SlopeSystem::Secant,
        3 => SlopeSystem::Parabola,
        _ => {
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let mut a = DMatrix::<f64>::zeros(n, n);
            a[(0, 0)] = h[1];
            a[(0, 1)] = h[0] + h[1];
            for i in 1..n - 1 {
                a[(i, i - 1)] = h[i];
                a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
                a[(i, i + 1)] = h[i - 1];
            }
            a[(n - 1, n - 2)] = h[n - 2] + h[n - 3];
            a[(n - 1, n - 1)] = h[n - 3];
            SlopeSystem::NotAKnot(a.lu())
        }
    }
}

fn slope_rhs(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut rhs = vec![0.0; n];
    rhs[0] = ((h[0] + 2.0 * (h[0] + h[1])) * h[1] * d[0] + h[0] * h[0] * d[1]) / (h[0] + h[1]);
    for i in 1..n - 1 {
        rhs[i] = 3.0 * (h[i] * d[i - 1] + h[i - 1] * d[i]);
    }
    let (hl, hm) = (h[n - 2], h[n - 3]);
    rhs[n - 1] = (hl * hl * d[n - 3] + (2.0 * (hm + hl) + hl) * hm * d[n - 2]) / (hm + hl);
    rhs
}

/// Index of the cell `[nodes[i], nodes[i+1]]` containing `v`, with the
/// normalized coordinate inside it. `None` outside the node range.
#[inline]
pub fn locate(nodes: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = nodes.len();
    if !(v >= nodes[0] && v <= nodes[n - 1]) {
        return None;
    }
    let i = match nodes.binary_search_by(|probe| probe.partial_cmp(&v).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => (i - 1).min(n - 2),
    };
    let u = (v - nodes[i]) / (nodes[i + 1] - nodes[i]);
    Some((i, u))
}
