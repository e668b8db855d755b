//! Complete-retrieval kernel, efficiency functional and optimal spin shapes.
//!
//! For backward retrieval the number of emitted photons from a normalized
//! spin wave is
//!
//! ```text
//! η = ∫₀¹∫₀¹ S*(x₁) k(x₁, x₂) S(x₂) dx₁ dx₂,
//! k(x₁, x₂) = (d/2) exp(-d(x₁+x₂)/2) I₀(d √(x₁x₂)),
//! ```
//!
//! where `x` is the distance from the exit face measured in units of `L`.
//! In the stored frame the backward exit sits at `x = 0`, so the kernel acts
//! on the stored amplitudes directly; forward retrieval sees the mirrored
//! wave.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::SpatialGrid;
use crate::pulse::Direction;
use crate::specfun::{i0e, i1e};
use crate::spin::SpinWave;

/// Residual tolerance `‖Av - λv‖ ≤ tol·λ` for the power iteration.
pub const EIGEN_TOLERANCE: f64 = 1e-12;
pub const EIGEN_MAX_ITERATIONS: usize = 100_000;

/// `k(x₁, x₂)` in scaled form, exactly symmetric in its arguments.
pub fn kernel_value(d: f64, x1: f64, x2: f64) -> Result<f64> {
    check_depth(d)?;
    for x in [x1, x2] {
        if !(0.0..=1.0).contains(&x) {
            return Err(invalid(format!("kernel position {x} outside [0, 1]")));
        }
    }
    Ok(kernel_entry(d, x1, x2))
}

#[inline]
fn kernel_entry(d: f64, x1: f64, x2: f64) -> f64 {
    // e^{-d(x1+x2)/2} I0(d√(x1x2)) = i0e(d√(x1x2)) e^{-d(√x1-√x2)²/2}
    let gap = x1.sqrt() - x2.sqrt();
    0.5 * d * i0e(d * (x1 * x2).sqrt()) * (-0.5 * d * gap * gap).exp()
}

fn check_depth(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(format!("optical depth must be positive and finite, got {d}")));
    }
    Ok(())
}

/// Kernel sampled on a quadrature grid, `K_ij = k(x_i, x_j)`.
#[derive(Debug, Clone)]
pub struct RetrievalKernel {
    d: f64,
    grid: Arc<SpatialGrid>,
    matrix: Vec<f64>,
}

pub fn build_kernel(d: f64, grid: &Arc<SpatialGrid>) -> Result<RetrievalKernel> {
    RetrievalKernel::build(d, Arc::clone(grid))
}

impl RetrievalKernel {
    pub fn build(d: f64, grid: Arc<SpatialGrid>) -> Result<Self> {
        check_depth(d)?;
        let n = grid.len();
        let x = grid.nodes();
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel_entry(d, x[i], x[j]);
                matrix[i * n + j] = v;
                matrix[j * n + i] = v;
            }
        }
        Ok(Self { d, grid, matrix })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.len() + j]
    }

    /// Row-major `n×n` kernel samples.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Row-major `W^{1/2} K W^{1/2}`.
    pub fn weighted_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let sw: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut out = self.matrix.clone();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] *= sw[i] * sw[j];
            }
        }
        out
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.len();
        for (row, o) in self.matrix.chunks_exact(n).zip(out.iter_mut()) {
            *o = row.iter().zip(u).map(|(k, u)| k * u).sum();
        }
    }

    /// Retrieval efficiency of a normalized spin wave.
    pub fn efficiency(&self, spin: &SpinWave, direction: Direction) -> Result<f64> {
        if spin.grid() != &self.grid && **spin.grid() != *self.grid {
            return Err(Error::IncompatibleGrids);
        }
        if !spin.is_normalized() {
            return Err(invalid(format!(
                "spin wave must be normalized (norm {})",
                spin.norm_sq()
            )));
        }
        let oriented;
        let spin = match direction {
            Direction::Backward => spin,
            Direction::Forward => {
                oriented = spin.reverse()?;
                &oriented
            }
        };
        Ok(self.quadratic_form(spin.amplitudes()))
    }

    /// `Re Σ_ij w_i w_j S̄_i K_ij S_j` without normalization checks.
    fn quadratic_form(&self, amplitudes: &[Complex64]) -> f64 {
        let n = self.len();
        let w = self.grid.weights();
        let mut re: Vec<f64> = Vec::with_capacity(n);
        let mut im: Vec<f64> = Vec::with_capacity(n);
        for (a, w) in amplitudes.iter().zip(w) {
            re.push(a.re * w);
            im.push(a.im * w);
        }
        let mut kre = vec![0.0; n];
        self.apply(&re, &mut kre);
        let mut total: f64 = re.iter().zip(&kre).map(|(a, b)| a * b).sum();
        if im.iter().any(|&v| v != 0.0) {
            let mut kim = vec![0.0; n];
            self.apply(&im, &mut kim);
            total += im.iter().zip(&kim).map(|(a, b)| a * b).sum::<f64>();
        }
        total
    }

    /// Largest eigenpair of `W^{1/2} K W^{1/2}` by power iteration.
    ///
    /// Returns `η*` and the optimal spin wave, normalized with non-negative
    /// mean amplitude, such that its backward efficiency equals `η*`.
    pub fn optimal_spin_wave(&self) -> Result<(f64, SpinWave)> {
        let n = self.len();
        let sw: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut v = sw.clone();
        normalize(&mut v);
        let mut scratch = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut converged = None;
        for _ in 0..EIGEN_MAX_ITERATIONS {
            for i in 0..n {
                scratch[i] = sw[i] * v[i];
            }
            self.apply(&scratch, &mut y);
            y.iter_mut().zip(&sw).for_each(|(y, s)| *y *= s);
            let lambda: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
            let residual = v
                .iter()
                .zip(&y)
                .map(|(v, y)| (y - lambda * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= EIGEN_TOLERANCE * lambda.abs() {
                converged = Some(lambda);
                break;
            }
            std::mem::swap(&mut v, &mut y);
            normalize(&mut v);
        }
        let lambda = converged.ok_or_else(|| {
            Error::NumericalFailure(format!(
                "power iteration did not converge in {EIGEN_MAX_ITERATIONS} iterations"
            ))
        })?;
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        let amplitudes = v.iter().zip(&sw).map(|(v, s)| Complex64::new(v / s, 0.0)).collect();
        let spin = SpinWave::from_amplitudes(Arc::clone(&self.grid), amplitudes)?.normalized()?;
        Ok((lambda, spin))
    }

    /// Exponential shape `exp(-αL·x/2)` with the highest backward efficiency,
    /// found by golden-section search over `αL ∈ [0, 4d]`.
    pub fn best_fit_exponential(&self) -> Result<BestFit> {
        let eta = |alpha_l: f64| -> Result<f64> {
            let spin = SpinWave::exponential(Arc::clone(&self.grid), alpha_l)?;
            Ok(self.quadratic_form(spin.amplitudes()))
        };
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (0.0, 4.0 * self.d);
        let mut c = hi - ratio * (hi - lo);
        let mut e = lo + ratio * (hi - lo);
        let mut fc = eta(c)?;
        let mut fe = eta(e)?;
        for _ in 0..500 {
            if hi - lo <= 1e-7 * (1.0 + hi) {
                break;
            }
            if fc >= fe {
                hi = e;
                e = c;
                fe = fc;
                c = hi - ratio * (hi - lo);
                fc = eta(c)?;
            } else {
                lo = c;
                c = e;
                fc = fe;
                e = lo + ratio * (hi - lo);
                fe = eta(e)?;
            }
        }
        let mid = 0.5 * (lo + hi);
        let candidates = [(mid, eta(mid)?), (c, fc), (e, fe)];
        let (alpha_l, efficiency) = candidates
            .into_iter()
            .fold((0.0, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best });
        Ok(BestFit { alpha_l, efficiency })
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
}

/// Best exponential spin shape for a given optical depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestFit {
    pub alpha_l: f64,
    pub efficiency: f64,
}

pub fn optimal_spin_wave(d: f64, grid: &Arc<SpatialGrid>) -> Result<(f64, SpinWave)> {
    build_kernel(d, grid)?.optimal_spin_wave()
}

pub fn best_fit_exponential(d: f64, grid: &Arc<SpatialGrid>) -> Result<BestFit> {
    build_kernel(d, grid)?.best_fit_exponential()
}

/// Closed-form efficiency of a flat spin wave, `1 - e^{-d}(I₀(d) + I₁(d))`.
/// Non-positive depths give zero.
pub fn flat_efficiency_analytic(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    1.0 - (i0e(d) + i1e(d))
}

/// Dimensionless write duration `γ_eg·τ_W ≈ 1/(1 + d/2)`.
pub fn tau_w_approx(d: f64) -> f64 {
    1.0 / (1.0 + 0.5 * d)
}

/// Spatial decay `αL = 2d·γτ/(1 + γτ)` left by a rising exponential write
/// pulse of dimensionless duration `gamma_tau`.
pub fn alpha_from_write(d: f64, gamma_tau: f64) -> f64 {
    if gamma_tau.is_infinite() {
        return 2.0 * d;
    }
    2.0 * d * gamma_tau / (1.0 + gamma_tau)
}

/// Efficiencies of the spin shapes compared at one optical depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub d: f64,
    pub eta_star: f64,
    /// Backward retrieval of the wave written with `τ_W^approx`.
    pub eta_res: f64,
    /// Forward retrieval of the same wave.
    pub eta_fwd: f64,
    pub eta_offres: f64,
    pub alpha_l_used: f64,
    pub tau_w_used: f64,
    /// Efficiency-maximizing exponential, for comparison with `eta_res`.
    pub best_fit: BestFit,
}

pub fn efficiency_report(d: f64, grid: &Arc<SpatialGrid>) -> Result<EfficiencyReport> {
    let kernel = build_kernel(d, grid)?;
    let tau_w_used = tau_w_approx(d);
    let alpha_l_used = alpha_from_write(d, tau_w_used);
    let spin = SpinWave::exponential(Arc::clone(grid), alpha_l_used)?;
    let (eta_star, _) = kernel.optimal_spin_wave()?;
    Ok(EfficiencyReport {
        d,
        eta_star,
        eta_res: kernel.efficiency(&spin, Direction::Backward)?,
        eta_fwd: kernel.efficiency(&spin, Direction::Forward)?,
        eta_offres: flat_efficiency_analytic(d),
        alpha_l_used,
        tau_w_used,
        best_fit: kernel.best_fit_exponential()?,
    })
}
