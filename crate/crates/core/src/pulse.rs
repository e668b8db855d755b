//! Control-field descriptions for the write and read steps.

use crate::error::{invalid, Result};

/// Propagation direction of the read control field relative to the write field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Counter-propagating read; the photon leaves through the write-entry face `z = 0`.
    Backward,
    /// Co-propagating read; the photon leaves through `z = L`.
    Forward,
}

/// Rabi frequency samples `Ω(t_k)` (rad/s) at times `t_k` (s).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    times: Vec<f64>,
    rabi: Vec<f64>,
}

impl SampledPulse {
    pub fn new(times: Vec<f64>, rabi: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != rabi.len() {
            return Err(invalid("sampled pulse needs at least two (t, Ω) pairs"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("pulse sample times must be strictly increasing"));
        }
        if rabi.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(invalid("pulse samples must be finite"));
        }
        Ok(Self { times, rabi })
    }

    /// Samples `f` on a uniform grid of `n` points over `[t_start, t_end]`.
    pub fn from_fn(t_start: f64, t_end: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || t_end <= t_start {
            return Err(invalid("need n >= 2 and t_end > t_start"));
        }
        let h = (t_end - t_start) / (n - 1) as f64;
        let times: Vec<f64> = (0..n).map(|i| t_start + h * i as f64).collect();
        let rabi = times.iter().map(|&t| f(t)).collect();
        Self::new(times, rabi)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rabi(&self) -> &[f64] {
        &self.rabi
    }

    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Local cubic (four-point Lagrange) interpolation; zero outside the samples.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return 0.0;
        }
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        if n < 4 {
            let (t0, t1) = (self.times[k], self.times[k + 1]);
            let u = (t - t0) / (t1 - t0);
            return self.rabi[k] * (1.0 - u) + self.rabi[k + 1] * u;
        }
        let start = k.saturating_sub(1).min(n - 4);
        let ts = &self.times[start..start + 4];
        let ys = &self.rabi[start..start + 4];
        let mut acc = 0.0;
        for i in 0..4 {
            let mut l = 1.0;
            for j in 0..4 {
                if i != j {
                    l *= (t - ts[j]) / (ts[i] - ts[j]);
                }
            }
            acc += ys[i] * l;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// `Ω(t) = Ω_max·exp(t/τ)` for `t ≤ 0`, switched off at `t = 0`.
    WriteRisingExponential,
    /// Constant `Ω_max` over `[0, duration]`.
    ReadSquare,
    Custom(SampledPulse),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Peak Rabi frequency, rad/s.
    pub omega_max: f64,
    /// Write time constant `τ_W` or read length `τ_R`, seconds.
    pub duration: f64,
    /// Detuning Δ, rad/s.
    pub detuning: f64,
    pub direction: Direction,
}

impl PulseSpec {
    pub fn write_exponential(omega_max: f64, tau_w: f64) -> Result<Self> {
        Self {
            shape: PulseShape::WriteRisingExponential,
            omega_max,
            duration: tau_w,
            detuning: 0.0,
            direction: Direction::Forward,
        }
        .validated()
    }

    /// Square read pulse of arbitrary length.
    pub fn read_square(omega_r: f64, tau_r: f64, direction: Direction) -> Result<Self> {
        Self { shape: PulseShape::ReadSquare, omega_max: omega_r, duration: tau_r, detuning: 0.0, direction }
            .validated()
    }

    /// Square π-pulse, `2·Ω_R·τ_R = π`. A zero Rabi frequency gives a unit-length idle pulse.
    pub fn read_pi_pulse(omega_r: f64, direction: Direction) -> Result<Self> {
        let tau = if omega_r > 0.0 { std::f64::consts::PI / (2.0 * omega_r) } else { 1.0 };
        Self::read_square(omega_r, tau, direction)
    }

    /// Sampled pulse; `omega_max` is taken from the samples.
    pub fn custom(samples: SampledPulse, duration: f64, direction: Direction) -> Result<Self> {
        let omega_max = samples.rabi().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self { shape: PulseShape::Custom(samples), omega_max, duration, detuning: 0.0, direction }.validated()
    }

    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        self.detuning = detuning;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.omega_max >= 0.0 && self.omega_max.is_finite()) {
            return Err(invalid(format!("omega_max must be >= 0, got {}", self.omega_max)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid(format!("pulse duration must be > 0, got {}", self.duration)));
        }
        if !self.detuning.is_finite() {
            return Err(invalid("detuning must be finite"));
        }
        Ok(self)
    }
}
