//! Bessel functions of orders 0 and 1.
//!
//! The exponentially scaled modified functions `e^{-x}·I_n(x)` are the main
//! entry points: optical depths of 100 already push `I_0(d)` past the range
//! where products of unscaled values stay finite.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{invalid, Error, Result};

/// Above this argument the unscaled `I_n` overflows.
pub const UNSCALED_LIMIT: f64 = 700.0;

const SERIES_LIMIT_I: f64 = 25.0;
const SERIES_LIMIT_J: f64 = 2.0;
const MILLER_LIMIT_J: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselResult {
    pub value: f64,
    /// Whether `value` carries the `e^{-x}` factor.
    pub scaled: bool,
}

/// `J_n(x)` for `n ∈ {0, 1}`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("Bessel argument must be finite, got {x}")));
    }
    match n {
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        _ => Err(Error::UnsupportedOrder(n)),
    }
}

/// `e^{-x}·I_n(x)` for `n ∈ {0, 1}` and `x ≥ 0`.
pub fn bessel_i_scaled(n: u32, x: f64) -> Result<f64> {
    check_modified_argument(x)?;
    match n {
        0 => Ok(i0e(x)),
        1 => Ok(i1e(x)),
        _ => Err(Error::UnsupportedOrder(n)),
    }
}

/// `I_n(x)`, scaled or not. Unscaled values are refused beyond [`UNSCALED_LIMIT`].
pub fn modified_bessel_i(n: u32, x: f64, scaled: bool) -> Result<BesselResult> {
    let value = bessel_i_scaled(n, x)?;
    if scaled {
        return Ok(BesselResult { value, scaled });
    }
    if x > UNSCALED_LIMIT {
        return Err(Error::NumericalFailure(format!(
            "I_{n}({x}) overflows double precision; use the scaled form"
        )));
    }
    Ok(BesselResult { value: value * x.exp(), scaled })
}

fn check_modified_argument(x: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(invalid(format!("modified Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `e^{-|x|}·I_0(x)`.
pub fn i0e(x: f64) -> f64 {
    scaled_modified(0, x.abs())
}

/// `e^{-|x|}·I_1(x)`.
pub fn i1e(x: f64) -> f64 {
    let v = scaled_modified(1, x.abs());
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn scaled_modified(n: u32, x: f64) -> f64 {
    if x <= SERIES_LIMIT_I {
        // (x/2)^n / n! · Σ (x²/4)^k / (k! (k+n)!/n!), all terms positive
        let q = 0.25 * x * x;
        let mut term = if n == 0 { 1.0 } else { 0.5 * x };
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + n as f64));
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        // e^{-x} I_n(x) ~ (2πx)^{-1/2} Σ (-1)^k a_k(n) / x^k
        let mu = 4.0 * (n * n) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0f64;
        loop {
            k += 1.0;
            let next = -term * (mu - (2.0 * k - 1.0).powi(2)) / (8.0 * k * x);
            if next.abs() >= term.abs() || next == 0.0 {
                break;
            }
            sum += next;
            term = next;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// `J_0(x)`.
pub fn j0(x: f64) -> f64 {
    bessel_j01(x.abs()).0
}

/// `J_1(x)`.
pub fn j1(x: f64) -> f64 {
    let v = bessel_j01(x.abs()).1;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn bessel_j01(x: f64) -> (f64, f64) {
    if x < SERIES_LIMIT_J {
        (j_series(0, x), j_series(1, x))
    } else if x <= MILLER_LIMIT_J {
        j_miller(x)
    } else {
        (j_hankel(0, x), j_hankel(1, x))
    }
}

fn j_series(n: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if n == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
    }
    sum
}

/// Backward recurrence normalized with `J_0 + 2 Σ J_{2k} = 1`.
fn j_miller(x: f64) -> (f64, f64) {
    let start = 2 * ((1.3 * x + 30.0) / 2.0).ceil() as usize;
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut even_sum = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        let order = k - 1;
        if order == 1 {
            j1 = current;
        }
        if order > 0 && order % 2 == 0 {
            even_sum += current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            even_sum *= 1e-250;
            j1 *= 1e-250;
        }
    }
    let norm = current + 2.0 * even_sum;
    (current / norm, j1 / norm)
}

/// Hankel asymptotic expansion, accurate to ~e^{-2x} relative.
fn j_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0f64;
    let mut k = 0usize;
    loop {
        k += 1;
        let next = term * (mu - (2.0 * k as f64 - 1.0).powi(2)) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        term = next;
        // a_k/x^k enters P with sign (-1)^{k/2} for even k, Q with (-1)^{(k-1)/2} for odd k
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k.is_multiple_of(2) {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    // χ = x - (n/2 + 1/4)π
    let (s, c) = x.sin_cos();
    let (cos_chi, sin_chi) = if n == 0 {
        (FRAC_1_SQRT_2 * (c + s), FRAC_1_SQRT_2 * (s - c))
    } else {
        (FRAC_1_SQRT_2 * (s - c), -FRAC_1_SQRT_2 * (c + s))
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}
