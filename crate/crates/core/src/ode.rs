//! Adaptive Dormand–Prince 5(4) integration for real first-order systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Steps shorter than this abort the integration.
    pub h_min: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 10_000_000,
            h_min: 1e-14,
        }
    }
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state; the step size carries over between calls to
/// [`Dopri5::advance`].
#[derive(Debug, Clone)]
pub struct Dopri5 {
    opts: OdeOptions,
    t: f64,
    h: f64,
    steps: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Dopri5 {
    pub fn new(t0: f64, dim: usize, opts: OdeOptions) -> Self {
        Self {
            opts,
            t: t0,
            h: 0.0,
            steps: 0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y_new: vec![0.0; dim],
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances `y` from the current time to `t_end`. A step whose result
    /// fails `valid` is retried with a shorter step.
    pub fn advance<F, V>(&mut self, f: &mut F, valid: &V, t_end: f64, y: &mut [f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        V: Fn(&[f64]) -> bool,
    {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        if self.h == 0.0 {
            f(self.t, y, &mut self.k[0]);
            self.h = dir * self.initial_step(y, span.abs());
        } else {
            f(self.t, y, &mut self.k[0]);
            self.h = dir * self.h.abs();
        }
        while (t_end - self.t) * dir > 0.0 {
            if self.steps >= self.opts.max_steps {
                return Err(Error::Integrator(format!("step limit reached at t = {}", self.t)));
            }
            let remaining = t_end - self.t;
            let last = self.h.abs() >= remaining.abs();
            let h = if last { remaining } else { self.h };
            let err = self.trial_step(f, y, h);
            let ok = err <= 1.0 && self.y_new.iter().all(|v| v.is_finite()) && valid(&self.y_new);
            if ok {
                self.steps += 1;
                self.t = if last { t_end } else { self.t + h };
                y.copy_from_slice(&self.y_new);
                // FSAL: the last stage is the derivative at the new point
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                let factor = if err.is_finite() && err > 1.0 {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.25
                };
                self.h = h * factor;
                if self.h.abs() < self.opts.h_min * self.t.abs().max(1.0) {
                    return Err(Error::Integrator(format!("step size underflow at t = {}", self.t)));
                }
            }
        }
        Ok(())
    }

    fn initial_step(&self, y: &[f64], span: f64) -> f64 {
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for (yi, fi) in y.iter().zip(&self.k[0]) {
            let sc = self.opts.atol + self.opts.rtol * yi.abs();
            d0 = d0.max(yi.abs() / sc);
            d1 = d1.max(fi.abs() / sc);
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span)
    }

    /// One Dormand–Prince step from (t, y) with k[0] = f(t, y); writes the
    /// fifth-order result to `y_new` and returns the scaled error norm.
    fn trial_step<F>(&mut self, f: &mut F, y: &[f64], h: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let t = self.t;
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, tmp, k6);
        let y_new = &mut self.y_new;
        for i in 0..n {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, y_new, k7);
        let mut err = 0.0f64;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = (e / sc).abs();
            if r.is_nan() {
                return f64::INFINITY;
            }
            err = err.max(r);
        }
        err
    }
}

/// Integrates y' = f(t, y) from `t0` and returns the state at each time in
/// `t_out` (which must be monotone away from `t0`).
pub fn solve<F>(mut f: F, t0: f64, y0: &[f64], t_out: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = Dopri5::new(t0, y0.len(), opts);
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(t_out.len());
    for &t in t_out {
        stepper.advance(&mut f, &|_: &[f64]| true, t, &mut y)?;
        out.push(y.clone());
    }
    Ok(out)
}
