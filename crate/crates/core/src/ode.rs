//! Dormand–Prince 5(4) with Hairer's fourth-order dense output, for small
//! fixed-size systems.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

/// Dense interpolant over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            let c = |k: usize| self.cont[k][i];
            *yi = c(0) + s * (c(1) + s1 * (c(2) + s * (c(3) + s1 * c(4))));
        }
        y
    }
}

#[derive(Debug)]
pub enum StepOutcome<E> {
    /// Integration reached `t_end`.
    Done,
    /// The right-hand side failed even for tiny steps; integration stopped
    /// at the last accepted point.
    RhsFailed(E),
    /// Step size underflow or step budget exhausted.
    Stalled(String),
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
/// `on_step` sees every accepted step with its dense interpolant and may
/// modify the new state (used for optional projections).
pub fn integrate<const N: usize, E, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
    mut on_step: S,
) -> ([f64; N], f64, StepOutcome<E>)
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    S: FnMut(&DenseStep<N>, &mut [f64; N]),
{
    let mut t = t0;
    let mut y = y0;
    if t_end == t0 {
        return (y, t, StepOutcome::Done);
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let mut k1 = match f(t, &y) {
        Ok(v) => v,
        Err(e) => return (y, t, StepOutcome::RhsFailed(e)),
    };
    let mut h = dir * initial_step(&y, &k1, span, tol);
    let mut steps = 0;
    let mut rejected_for_rhs = 0;
    let mut last_rhs_error: Option<E> = None;
    loop {
        if (t_end - t) * dir <= 0.0 {
            return (y, t, StepOutcome::Done);
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        steps += 1;
        if steps > tol.max_steps {
            return (y, t, StepOutcome::Stalled("step budget exhausted".into()));
        }
        if h.abs() < 1e-14 * t.abs().max(span) {
            return match last_rhs_error {
                Some(e) => (y, t, StepOutcome::RhsFailed(e)),
                None => (y, t, StepOutcome::Stalled(format!("step size underflow at t={t}"))),
            };
        }
        let attempt = stages(&mut f, t, &y, &k1, h);
        let (y_new, k7, err_vec, k) = match attempt {
            Ok(v) => v,
            Err(e) => {
                last_rhs_error = Some(e);
                rejected_for_rhs += 1;
                if rejected_for_rhs > 60 {
                    let e = last_rhs_error.take().expect("error recorded");
                    return (y, t, StepOutcome::RhsFailed(e));
                }
                h *= 0.25;
                continue;
            }
        };
        let mut err = 0.0;
        for i in 0..N {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (err_vec[i] / sc).powi(2);
        }
        err = (err / N as f64).sqrt();
        if err <= 1.0 {
            rejected_for_rhs = 0;
            last_rhs_error = None;
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] =
                    h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k7[i]);
            }
            let dense = DenseStep { t0: t, h, cont };
            let mut next = y_new;
            on_step(&dense, &mut next);
            let projected = next != y_new;
            t += h;
            if (t_end - t) * dir < 0.0 {
                t = t_end;
            }
            y = next;
            k1 = if projected {
                match f(t, &y) {
                    Ok(v) => v,
                    Err(e) => return (y, t, StepOutcome::RhsFailed(e)),
                }
            } else {
                k7
            };
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
}

type StageResult<const N: usize> = ([f64; N], [f64; N], [f64; N], [[f64; N]; 6]);

fn stages<const N: usize, E, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<StageResult<N>, E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let comb = |coef: &[(f64, &[f64; N])]| {
        let mut out = *y;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, k) in coef {
                acc += c * k[i];
            }
            *o += h * acc;
        }
        out
    };
    let k2 = f(t + C2 * h, &comb(&[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &comb(&[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(
        t + h,
        &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = comb(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y_new, k7, err, [*k1, k2, k3, k4, k5, k6]))
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], span: f64, tol: &Tolerances) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_and_dense_output() {
        let f = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2], ()> { Ok([y[1], -y[0]]) };
        let mut worst: f64 = 0.0;
        let (y, t, out) = integrate(f, 0.0, [0.0, 1.0], 10.0, &Tolerances::default(), |d, _| {
            for j in 0..=4 {
                let s = d.t0 + d.h * j as f64 / 4.0;
                worst = worst.max((d.eval(s)[0] - s.sin()).abs());
            }
        });
        assert!(matches!(out, StepOutcome::Done));
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        assert!(worst < 1e-8, "dense output error {worst:e}");
    }

    #[test]
    fn backward_integration_returns() {
        let f = |t: f64, y: &[f64; 1]| -> Result<[f64; 1], ()> { Ok([t * y[0]]) };
        let tol = Tolerances::default();
        let (y1, _, _) = integrate(f, 0.0, [1.0], 2.0, &tol, |_, _| {});
        assert!((y1[0] - 2f64.exp()).abs() < 1e-8 * 2f64.exp());
        let (y0, _, _) = integrate(f, 2.0, y1, 0.0, &tol, |_, _| {});
        assert!((y0[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rhs_failure_stops_near_the_boundary() {
        let f = |_t: f64, y: &[f64; 1]| -> Result<[f64; 1], &'static str> {
            if y[0] > 1.0 {
                Err("outside")
            } else {
                Ok([1.0])
            }
        };
        let (y, _, out) = integrate(f, 0.0, [0.0], 5.0, &Tolerances::default(), |_, _| {});
        assert!(matches!(out, StepOutcome::RhsFailed("outside")));
        assert!(y[0] <= 1.0 && y[0] > 0.999);
    }
}
