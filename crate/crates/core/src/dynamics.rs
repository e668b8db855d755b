//! Time-domain readout: method-of-lines integration of the coupled
//! polarization/spin equations, the analytic fast and slow readout fields,
//! and photon-budget bookkeeping.
//!
//! Everything here is dimensionless: times are `γ_eg·t`, Rabi frequencies
//! `Ω/γ_eg`. The signal field is eliminated adiabatically along the sample
//! (no retardation), so at each node it is a partial integral of `P` from the
//! entry face, and the output field is `E_out = i√d Σ_j w_j P_j`.

pub mod ode;

use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;

use crate::ensemble::AtomicEnsemble;
use crate::error::{invalid, Result};
use crate::grid::{gauss_legendre, SpatialGrid};
use crate::pulse::{Direction, PulseShape, PulseSpec};
use crate::specfun::{i0e, j0};
use crate::spin::SpinWave;

pub use ode::Dopri5Options;

/// Snapshot of the medium during a readout.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub grid: Arc<SpatialGrid>,
    pub polarization: Vec<Complex64>,
    pub spin: Vec<Complex64>,
    /// Output field at each accepted step.
    pub e_out: Vec<Complex64>,
    pub emitted: f64,
    pub sponte_loss: f64,
    pub time: f64,
}

impl SimulationState {
    pub fn from_spin(spin: &SpinWave) -> Self {
        Self {
            grid: Arc::clone(spin.grid()),
            polarization: vec![Complex64::new(0.0, 0.0); spin.len()],
            spin: spin.amplitudes().to_vec(),
            e_out: Vec::new(),
            emitted: 0.0,
            sponte_loss: 0.0,
            time: 0.0,
        }
    }

    /// Excitation still in the medium, `Σw|P|² + Σw|S|²`.
    pub fn remaining(&self) -> f64 {
        let w = self.grid.weights();
        self.polarization
            .iter()
            .zip(&self.spin)
            .zip(w)
            .map(|((p, s), w)| w * (p.norm_sqr() + s.norm_sqr()))
            .sum()
    }

    /// `emitted + loss + remaining`; equals the initial excitation.
    pub fn budget(&self) -> f64 {
        self.emitted + self.sponte_loss + self.remaining()
    }
}

/// Per-step output of [`simulate_read`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionRecord {
    pub times: Vec<f64>,
    /// `|E_out|²` per unit dimensionless time.
    pub flux: Vec<f64>,
    pub emitted: Vec<f64>,
    pub loss: Vec<f64>,
    pub residual: Vec<f64>,
    /// `|initial - emitted - loss - residual|` per step.
    pub budget_error: Vec<f64>,
    pub initial: f64,
    /// Photons emitted by the end of the run.
    pub efficiency: f64,
    pub final_residual: f64,
    pub max_budget_error: f64,
    pub final_state: SimulationState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub t_end: f64,
    /// Absolute and relative integrator tolerance.
    pub tol: f64,
    /// Stop once the excitation left after the read pulse drops below this.
    pub stop_excitation: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { t_end: 50.0, tol: 1e-9, stop_excitation: 1e-6 }
    }
}

struct Medium<'a> {
    d: f64,
    detuning: f64,
    gamma_0: f64,
    weights: &'a [f64],
    direction: Direction,
}

impl Medium<'_> {
    /// Right-hand side for the state `[Re P, Im P, Re S, Im S, emitted, loss]`.
    fn rhs(&self, omega: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.weights.len();
        let (pr, rest) = y.split_at(n);
        let (pi, rest) = rest.split_at(n);
        let (sr, rest) = rest.split_at(n);
        let si = &rest[..n];
        let (dpr, drest) = dy.split_at_mut(n);
        let (dpi, drest) = drest.split_at_mut(n);
        let (dsr, drest) = drest.split_at_mut(n);
        let (dsi, tally) = drest.split_at_mut(n);
        let w = self.weights;
        // field at node i: ∫ P from the entry face up to x_i
        let mut acc = (0.0, 0.0);
        let mut visit = |i: usize| {
            let (hr, hi) = (0.5 * w[i] * pr[i], 0.5 * w[i] * pi[i]);
            let (cr, ci) = (acc.0 + hr, acc.1 + hi);
            acc.0 += 2.0 * hr;
            acc.1 += 2.0 * hi;
            dpr[i] = -pr[i] + self.detuning * pi[i] - self.d * cr - omega * si[i];
            dpi[i] = -pi[i] - self.detuning * pr[i] - self.d * ci + omega * sr[i];
            dsr[i] = -omega * pi[i] - self.gamma_0 * sr[i];
            dsi[i] = omega * pr[i] - self.gamma_0 * si[i];
        };
        match self.direction {
            Direction::Backward => (0..n).rev().for_each(&mut visit),
            Direction::Forward => (0..n).for_each(&mut visit),
        }
        let (er, ei) = acc;
        let mut lost = 0.0;
        for i in 0..n {
            lost += w[i]
                * (2.0 * (pr[i] * pr[i] + pi[i] * pi[i]) + 2.0 * self.gamma_0 * (sr[i] * sr[i] + si[i] * si[i]));
        }
        tally[0] = self.d * (er * er + ei * ei);
        tally[1] = lost;
    }

    fn output_field(&self, y: &[f64]) -> Complex64 {
        let n = self.weights.len();
        let (re, im) = self
            .weights
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(a, b), (i, w)| (a + w * y[i], b + w * y[n + i]));
        Complex64::new(0.0, self.d.sqrt()) * Complex64::new(re, im)
    }
}

/// Integrates the readout of `spin0` driven by `read`.
///
/// Square pulses are followed by free decay with the control off; sampled
/// pulses drive the whole run. The run ends at `t_end` or, once the pulse is
/// over, when the remaining excitation drops below `stop_excitation`.
/// `read.direction` selects the exit face (backward: `x = 0`).
pub fn simulate_read(
    ensemble: &AtomicEnsemble,
    spin0: &SpinWave,
    read: &PulseSpec,
    options: &SimulationOptions,
) -> Result<EmissionRecord> {
    ensemble.validate()?;
    if !spin0.is_normalized() {
        return Err(invalid(format!("initial spin wave must be normalized (norm {})", spin0.norm_sq())));
    }
    if !(options.t_end > 0.0 && options.t_end.is_finite()) {
        return Err(invalid(format!("t_end must be positive, got {}", options.t_end)));
    }
    if !(options.tol > 0.0 && options.tol < 1.0) {
        return Err(invalid(format!("tolerance must lie in (0, 1), got {}", options.tol)));
    }
    let g = ensemble.gamma_eg;
    let grid = Arc::clone(spin0.grid());
    let n = grid.len();
    let medium = Medium {
        d: ensemble.d,
        detuning: read.detuning / g,
        gamma_0: ensemble.gamma_0 / g,
        weights: grid.weights(),
        direction: read.direction,
    };
    // (start, end, Rabi frequency as a function of dimensionless time)
    type Drive<'a> = Box<dyn Fn(f64) -> f64 + 'a>;
    let pulse_end = (read.duration * g).min(options.t_end);
    let phases: Vec<(f64, f64, Drive)> = match &read.shape {
        PulseShape::ReadSquare => {
            let omega = read.omega_max / g;
            vec![(0.0, pulse_end, Box::new(move |_| omega)), (pulse_end, options.t_end, Box::new(|_| 0.0))]
        }
        PulseShape::Custom(samples) => {
            vec![(0.0, options.t_end, Box::new(move |t: f64| samples.value_at(t / g) / g))]
        }
        PulseShape::WriteRisingExponential => {
            return Err(invalid("simulate_read needs a square or sampled read pulse"));
        }
    };

    let mut y = vec![0.0; 4 * n + 2];
    for (i, s) in spin0.amplitudes().iter().enumerate() {
        y[2 * n + i] = s.re;
        y[3 * n + i] = s.im;
    }
    let remaining = |y: &[f64]| -> f64 {
        (0..n)
            .map(|i| medium.weights[i] * (y[i].powi(2) + y[n + i].powi(2) + y[2 * n + i].powi(2) + y[3 * n + i].powi(2)))
            .sum()
    };
    let initial = remaining(&y);
    let mut record = Recorder::default();
    record.push(0.0, &y, &medium, remaining(&y), initial);
    let opts = Dopri5Options { atol: options.tol, rtol: options.tol, ..Default::default() };
    let mut t = 0.0;
    for (start, end, drive) in &phases {
        if end <= start {
            continue;
        }
        let pulse_over = *start >= pulse_end || matches!(read.shape, PulseShape::Custom(_));
        let mut stop = false;
        let (t_done, y_done) = ode::integrate(
            |t, y, dy| medium.rhs(drive(t), y, dy),
            *start,
            *end,
            std::mem::take(&mut y),
            &opts,
            |t, y| {
                let left = remaining(y);
                record.push(t, y, &medium, left, initial);
                if pulse_over && t >= pulse_end && left < options.stop_excitation {
                    stop = true;
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        )?;
        t = t_done;
        y = y_done;
        if stop {
            break;
        }
    }

    let final_residual = remaining(&y);
    let final_state = SimulationState {
        grid,
        polarization: (0..n).map(|i| Complex64::new(y[i], y[n + i])).collect(),
        spin: (0..n).map(|i| Complex64::new(y[2 * n + i], y[3 * n + i])).collect(),
        e_out: record.e_out,
        emitted: y[4 * n],
        sponte_loss: y[4 * n + 1],
        time: t,
    };
    let max_budget_error = record.budget_error.iter().cloned().fold(0.0, f64::max);
    Ok(EmissionRecord {
        times: record.times,
        flux: record.flux,
        emitted: record.emitted,
        loss: record.loss,
        residual: record.residual,
        budget_error: record.budget_error,
        initial,
        efficiency: y[4 * n],
        final_residual,
        max_budget_error,
        final_state,
    })
}

#[derive(Default)]
struct Recorder {
    times: Vec<f64>,
    flux: Vec<f64>,
    emitted: Vec<f64>,
    loss: Vec<f64>,
    residual: Vec<f64>,
    budget_error: Vec<f64>,
    e_out: Vec<Complex64>,
}

impl Recorder {
    fn push(&mut self, t: f64, y: &[f64], medium: &Medium, left: f64, initial: f64) {
        let n = medium.weights.len();
        let e = medium.output_field(y);
        let (emitted, loss) = (y[4 * n], y[4 * n + 1]);
        self.times.push(t);
        self.flux.push(e.norm_sqr());
        self.emitted.push(emitted);
        self.loss.push(loss);
        self.residual.push(left);
        self.budget_error.push((initial - emitted - loss - left).abs());
        self.e_out.push(e);
    }
}

/// Output field after an instantaneous lossless transfer `P = iS`,
/// `E(t) = -√d e^{-t} Σ_i w_i J₀(2√(d t x_i)) S_i`, at the backward exit.
pub fn fast_retrieval_field(ensemble: &AtomicEnsemble, spin0: &SpinWave, t: f64) -> Result<Complex64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be >= 0, got {t}")));
    }
    let d = ensemble.d;
    let grid = spin0.grid();
    let sum: Complex64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(spin0.amplitudes())
        .map(|((x, w), s)| s * (w * j0(2.0 * (d * t * x).sqrt())))
        .sum();
    Ok(-d.sqrt() * (-t).exp() * sum)
}

/// `∫₀^∞ |E_fast(t)|² dt`, integrated in `s = √t` over `[0, 5]`.
pub fn fast_retrieval_efficiency(ensemble: &AtomicEnsemble, spin0: &SpinWave) -> Result<f64> {
    panel_integral(0.0, 5.0, 100, |s| {
        let e = fast_retrieval_field(ensemble, spin0, s * s)?;
        Ok(2.0 * s * e.norm_sqr())
    })
}

/// Output field in the weak-readout regime,
/// `E(t) = -√(dκ) e^{-κt} Σ_i w_i e^{-d x_i} I₀(2√(κ t d x_i)) S_i` with
/// `κ = (Ω_R/γ_eg)²`, at the backward exit. `omega_r` is in rad/s.
pub fn slow_retrieval_field(ensemble: &AtomicEnsemble, spin0: &SpinWave, omega_r: f64, t: f64) -> Result<Complex64> {
    let kappa = slow_rate(ensemble, omega_r)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be >= 0, got {t}")));
    }
    Ok((ensemble.d * kappa).sqrt() * slow_profile(ensemble.d, spin0, (kappa * t).sqrt()))
}

fn slow_rate(ensemble: &AtomicEnsemble, omega_r: f64) -> Result<f64> {
    if !(omega_r > 0.0 && omega_r.is_finite()) {
        return Err(invalid(format!("read Rabi frequency must be positive, got {omega_r}")));
    }
    let ratio = omega_r / ensemble.gamma_eg;
    if 2.0 * ratio > 0.1 {
        log::warn!("slow readout needs 2 Omega_R << gamma_eg, got 2 Omega_R / gamma_eg = {:.3}", 2.0 * ratio);
    }
    Ok(ratio * ratio)
}

/// `-Σ w e^{-σ - d x} I₀(2√(σ d x)) S` at `σ = s²`, in overflow-free form.
fn slow_profile(d: f64, spin0: &SpinWave, s: f64) -> Complex64 {
    let grid = spin0.grid();
    let sum: Complex64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(spin0.amplitudes())
        .map(|((x, w), a)| {
            let r = (d * x).sqrt();
            let gap = s - r;
            a * (w * i0e(2.0 * s * r) * (-gap * gap).exp())
        })
        .sum();
    -sum
}

/// `∫₀^∞ |E_slow(t)|² dt`. Independent of `omega_r`, which only rescales time.
pub fn slow_retrieval_efficiency(ensemble: &AtomicEnsemble, spin0: &SpinWave, omega_r: f64) -> Result<f64> {
    slow_rate(ensemble, omega_r)?;
    let d = ensemble.d;
    let top = d.sqrt() + 7.0;
    let panels = (top / 0.25).ceil() as usize;
    panel_integral(0.0, top, panels, |s| Ok(2.0 * s * d * slow_profile(d, spin0, s).norm_sqr()))
}

fn panel_integral(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(8);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (u, w) in nodes.iter().zip(&weights) {
            total += 0.5 * h * w * f(mid + 0.5 * h * u)?;
        }
    }
    Ok(total)
}

/// Fraction of the spin excitation lost to polarization damping during a
/// square π-pulse of Rabi frequency `omega_r` (rad/s),
/// `1 - exp(-γ_eg(1+d)π/(4Ω_R))`.
pub fn pi_pulse_transfer_loss(ensemble: &AtomicEnsemble, omega_r: f64) -> Result<f64> {
    if !(omega_r >= 0.0) {
        return Err(invalid(format!("read Rabi frequency must be >= 0, got {omega_r}")));
    }
    if omega_r == 0.0 {
        return Ok(1.0);
    }
    let exponent = ensemble.gamma_eg * (1.0 + ensemble.d) * std::f64::consts::PI / (4.0 * omega_r);
    Ok(-(-exponent).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, QuadratureRule};
    use crate::kernel::{build_kernel, optimal_spin_wave};
    use crate::Error;
    use proptest::prelude::*;

    fn gl(n: usize) -> Arc<SpatialGrid> {
        Arc::new(make_grid(n, QuadratureRule::GaussLegendre).unwrap())
    }

    fn strong_pi(d: f64, factor: f64, direction: Direction) -> PulseSpec {
        PulseSpec::read_pi_pulse(factor * (1.0 + d) / 2.0, direction).unwrap()
    }

    fn kernel_eta(d: f64, spin: &SpinWave) -> f64 {
        build_kernel(d, spin.grid()).unwrap().efficiency(spin, Direction::Backward).unwrap()
    }

    #[test]
    fn heralded_exponential_at_d20() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(128), 10.0 / 3.0).unwrap();
        let read = PulseSpec::read_pi_pulse(100.0 * 21.0, Direction::Backward).unwrap();
        let opts = SimulationOptions { t_end: 10.0, ..Default::default() };
        let rec = simulate_read(&ens, &spin, &read, &opts).unwrap();
        assert!((rec.efficiency - 0.892).abs() < 3e-3, "{}", rec.efficiency);
        assert!(rec.max_budget_error < 1e-6);
        assert!(rec.final_residual < 1e-5);
    }

    #[test]
    fn flat_wave_at_d1() {
        let ens = AtomicEnsemble::dimensionless(1.0).unwrap();
        let spin = SpinWave::flat(gl(64));
        let rec = simulate_read(&ens, &spin, &strong_pi(1.0, 100.0, Direction::Backward), &Default::default()).unwrap();
        assert!((rec.efficiency - 0.3263).abs() < 3e-3, "{}", rec.efficiency);
    }

    #[test]
    fn no_drive_keeps_the_spin() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(32), 2.0).unwrap();
        let read = PulseSpec::read_pi_pulse(0.0, Direction::Backward).unwrap();
        let rec = simulate_read(&ens, &spin, &read, &Default::default()).unwrap();
        assert_eq!(rec.efficiency, 0.0);
        assert_eq!(rec.final_state.spin, spin.amplitudes());
        assert_eq!(rec.max_budget_error, 0.0);
    }

    #[test]
    fn matches_kernel_in_fast_limit() {
        for (d, spin) in [
            (1.0, SpinWave::flat(gl(64))),
            (20.0, optimal_spin_wave(20.0, &gl(64)).unwrap().1),
        ] {
            let ens = AtomicEnsemble::dimensionless(d).unwrap();
            let rec = simulate_read(&ens, &spin, &strong_pi(d, 100.0, Direction::Backward), &Default::default()).unwrap();
            let eta = kernel_eta(d, &spin);
            assert!(((rec.efficiency - eta) / eta).abs() < 1e-2, "d={d}: {} vs {eta}", rec.efficiency);
            assert!(rec.max_budget_error < 1e-6);
        }
    }

    #[test]
    fn efficiency_grows_with_read_strength() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(64), 10.0 / 3.0).unwrap();
        let etas: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 100.0]
            .iter()
            .map(|&f| simulate_read(&ens, &spin, &strong_pi(20.0, f, Direction::Backward), &Default::default()).unwrap().efficiency)
            .collect();
        assert!(etas.windows(2).all(|p| p[1] >= p[0]), "{etas:?}");
        assert!(etas[4] <= kernel_eta(20.0, &spin) + 1e-4);
    }

    #[test]
    fn forward_equals_backward_on_mirror() {
        let ens = AtomicEnsemble::dimensionless(10.0).unwrap();
        let spin = SpinWave::exponential(gl(48), 4.0).unwrap();
        let fwd = simulate_read(&ens, &spin, &strong_pi(10.0, 30.0, Direction::Forward), &Default::default()).unwrap();
        let back =
            simulate_read(&ens, &spin.reverse().unwrap(), &strong_pi(10.0, 30.0, Direction::Backward), &Default::default())
                .unwrap();
        assert!((fwd.efficiency - back.efficiency).abs() < 1e-8);
        let k = build_kernel(10.0, spin.grid()).unwrap();
        assert!((fwd.efficiency - k.efficiency(&spin, Direction::Forward).unwrap()).abs() < 1e-2);
    }

    #[test]
    fn detuned_readout_conserves_budget() {
        let ens = AtomicEnsemble::dimensionless(5.0).unwrap();
        let spin = SpinWave::flat(gl(32));
        let read = strong_pi(5.0, 30.0, Direction::Backward).with_detuning(2.0).unwrap();
        let rec = simulate_read(&ens, &spin, &read, &Default::default()).unwrap();
        assert!(rec.max_budget_error < 1e-6);
        assert!(rec.efficiency > 0.0 && rec.efficiency < 1.0);
    }

    #[test]
    fn simulate_rejects_bad_input() {
        let ens = AtomicEnsemble::dimensionless(5.0).unwrap();
        let loose = SpinWave::flat(gl(16)).scaled(Complex64::new(1.5, 0.0));
        let read = strong_pi(5.0, 10.0, Direction::Backward);
        assert!(matches!(simulate_read(&ens, &loose, &read, &Default::default()), Err(Error::InvalidArgument(_))));
        let spin = SpinWave::flat(gl(16));
        let write = PulseSpec::write_exponential(1.0, 0.1).unwrap();
        assert!(simulate_read(&ens, &spin, &write, &Default::default()).is_err());
        let tiny = SimulationOptions { tol: 1e-30, ..Default::default() };
        assert!(matches!(simulate_read(&ens, &spin, &read, &tiny), Err(Error::Integrator { .. })));
    }

    #[test]
    fn fast_field_basics() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(64), 3.0).unwrap();
        let mean: Complex64 = spin.grid().weights().iter().zip(spin.amplitudes()).map(|(w, s)| s * w).sum();
        let e0 = fast_retrieval_field(&ens, &spin, 0.0).unwrap();
        assert!((e0 + 20f64.sqrt() * mean).norm() < 1e-14);
        let zero = spin.clone().scaled(Complex64::new(0.0, 0.0));
        assert_eq!(fast_retrieval_field(&ens, &zero, 1.3).unwrap(), Complex64::new(0.0, 0.0));
        assert!(fast_retrieval_field(&ens, &spin, -1.0).is_err());
    }

    #[test]
    fn analytic_routes_match_table_value() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(512), 10.0 / 3.0).unwrap();
        let fast = fast_retrieval_efficiency(&ens, &spin).unwrap();
        let slow = slow_retrieval_efficiency(&ens, &spin, 0.01).unwrap();
        assert!((fast - 0.8921).abs() < 1e-3, "{fast}");
        assert!((slow - 0.8921).abs() < 1e-3, "{slow}");
        let eta = kernel_eta(20.0, &spin);
        assert!((fast - eta).abs() < 1e-9 && (slow - eta).abs() < 1e-9);
    }

    #[test]
    fn slow_field_properties() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(64), 2.0).unwrap();
        let a = slow_retrieval_efficiency(&ens, &spin, 0.01).unwrap();
        let b = slow_retrieval_efficiency(&ens, &spin, 0.03).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(slow_retrieval_field(&ens, &spin, 0.01, 1e9).unwrap().norm() < 1e-12);
        assert!(slow_retrieval_field(&ens, &spin, 0.0, 1.0).is_err());
    }

    #[test]
    fn pi_pulse_loss() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let loss = pi_pulse_transfer_loss(&ens, 100.0 * 21.0 / 2.0).unwrap();
        assert!(loss < 0.016 && (loss - (1.0 - (-21.0 * std::f64::consts::PI / 4200.0).exp())).abs() < 1e-15);
        assert!(pi_pulse_transfer_loss(&ens, 1e15).unwrap() < 1e-13);
        assert_eq!(pi_pulse_transfer_loss(&ens, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn simulated_loss_within_transfer_bound() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let spin = SpinWave::exponential(gl(64), 10.0 / 3.0).unwrap();
        let omega = 100.0 * 21.0 / 2.0;
        let rec = simulate_read(&ens, &spin, &PulseSpec::read_pi_pulse(omega, Direction::Backward).unwrap(), &Default::default())
            .unwrap();
        let eta = kernel_eta(20.0, &spin);
        assert!(((rec.efficiency - eta) / eta).abs() < 1e-2);
    }

    fn random_wave(grid: Arc<SpatialGrid>, coeffs: &[(f64, f64)]) -> SpinWave {
        let amps = grid
            .nodes()
            .iter()
            .map(|&x| {
                coeffs.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (k, (re, im))| {
                    acc + Complex64::new(*re, *im) * (std::f64::consts::PI * k as f64 * x).cos()
                })
            })
            .collect();
        SpinWave::from_amplitudes(grid, amps).unwrap().normalized().unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn analytic_routes_agree_with_kernel(
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
            deep in proptest::bool::ANY,
        ) {
            prop_assume!(coeffs.iter().any(|(a, b)| a.abs() + b.abs() > 0.1));
            let d = if deep { 20.0 } else { 1.0 };
            let ens = AtomicEnsemble::dimensionless(d).unwrap();
            let spin = random_wave(gl(128), &coeffs);
            let eta = kernel_eta(d, &spin);
            let fast = fast_retrieval_efficiency(&ens, &spin).unwrap();
            let slow = slow_retrieval_efficiency(&ens, &spin, 0.01).unwrap();
            prop_assert!((fast - eta).abs() < 1e-3, "{} vs {}", fast, eta);
            prop_assert!((slow - eta).abs() < 1e-3, "{} vs {}", slow, eta);
            prop_assert!((fast - slow).abs() < 1e-3);
        }

        #[test]
        fn budget_holds_for_random_waves(coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)) {
            prop_assume!(coeffs.iter().any(|(a, b)| a.abs() + b.abs() > 0.1));
            let ens = AtomicEnsemble::dimensionless(5.0).unwrap();
            let spin = random_wave(gl(32), &coeffs);
            let rec = simulate_read(&ens, &spin, &strong_pi(5.0, 30.0, Direction::Backward), &Default::default()).unwrap();
            prop_assert!(rec.max_budget_error <= 10.0 * 1e-9, "{}", rec.max_budget_error);
            prop_assert!((0.0..=1.0).contains(&rec.efficiency));
        }
    }
}
