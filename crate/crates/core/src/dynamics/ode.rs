//! Adaptive Dormand–Prince 5(4) integrator for real state vectors.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub atol: f64,
    pub rtol: f64,
    /// Smallest step allowed, relative to `max(1, |t|)`.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { atol: 1e-9, rtol: 1e-9, min_step: 1e-13, max_steps: 2_000_000 }
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1`, calling `on_step` after every
/// accepted step. Returns the final time and state; `on_step` may stop early.
pub fn integrate<F, C>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: Vec<f64>,
    opts: &Dopri5Options,
    mut on_step: C,
) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    C: FnMut(f64, &[f64]) -> ControlFlow<()>,
{
    let n = y0.len();
    let mut y = y0;
    let mut t = t0;
    if t1 <= t0 {
        return Ok((t, y));
    }
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(t, &y, &mut k[0]);
    let mut h = initial_step(&y, &k[0], t1 - t0, opts);
    let mut steps = 0;
    while t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integrator { time: t, reason: format!("more than {} steps", opts.max_steps) });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let stage = |tmp: &mut [f64], y: &[f64], k: &[Vec<f64>], coef: &[f64]| {
            for i in 0..n {
                let mut acc = 0.0;
                for (kj, c) in k.iter().zip(coef) {
                    acc += c * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
        };
        stage(&mut tmp, &y, &k[..1], &[A21]);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&mut tmp, &y, &k[..2], &[A31, A32]);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&mut tmp, &y, &k[..3], &[A41, A42, A43]);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&mut tmp, &y, &k[..4], &[A51, A52, A53, A54]);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&mut tmp, &y, &k[..5], &[A61, A62, A63, A64, A65]);
        f(t + h, &tmp, &mut k[5]);
        stage(&mut y_new, &y, &k[..6], &[B1, 0.0, B3, B4, B5, B6]);
        let t_new = if last { t1 } else { t + h };
        f(t_new, &y_new, &mut k[6]);

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integrator { time: t, reason: "non-finite error estimate".into() });
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            if on_step(t, &y).is_break() {
                break;
            }
            h *= factor;
        } else {
            h *= factor.min(1.0);
        }
        if h < opts.min_step * t.abs().max(1.0) {
            return Err(Error::Integrator {
                time: t,
                reason: format!("step {h:e} below floor at tolerance {:e}/{:e}", opts.atol, opts.rtol),
            });
        }
    }
    Ok((t, y))
}

fn initial_step(y: &[f64], dy: &[f64], span: f64, opts: &Dopri5Options) -> f64 {
    let n = y.len() as f64;
    let norm = |v: &[f64]| {
        (v.iter().zip(y).map(|(v, y)| (v / (opts.atol + opts.rtol * y.abs())).powi(2)).sum::<f64>() / n).sqrt()
    };
    let (d0, d1) = (norm(y), norm(dy));
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span)
}
