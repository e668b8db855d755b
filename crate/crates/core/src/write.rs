//! Resonant write process: prepared coherence, write-photon flux and number,
//! the heralded spin-wave shape and the validity-regime checks.
//!
//! Unlike the retrieval code this module works in physical units: rates in
//! rad/s, times in seconds, as stored in [`AtomicEnsemble`] and [`PulseSpec`].

use std::sync::Arc;

use crate::ensemble::AtomicEnsemble;
use crate::error::{invalid, Error, Result};
use crate::grid::{gauss_legendre, SpatialGrid};
use crate::pulse::{PulseShape, PulseSpec};
use crate::specfun::{i0e, j0};
use crate::spin::SpinWave;
use crate::units::SPEED_OF_LIGHT;

/// Coherence left in the medium by a rising exponential write pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WritePreparation {
    /// `|θ₀| = Ω_W^max τ_W / (1 + γ_eg τ_W)`.
    pub theta0_mag: f64,
    pub alpha_l: f64,
    /// Mean excited-state population, `|θ₀|²(1 - e^{-αL})/αL`.
    pub excited_fraction: f64,
}

impl WritePreparation {
    /// Modulus of the prepared coherence at `x = z/L`.
    pub fn coherence_modulus(&self, x: f64) -> f64 {
        self.theta0_mag * (-0.5 * self.alpha_l * x).exp()
    }
}

/// `(1 - e^{-u})/u`, equal to 1 at `u = 0`.
pub fn exp_bracket(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - 0.5 * u
    } else {
        -(-u).exp_m1() / u
    }
}

pub fn prepare_coherence_exponential(
    ensemble: &AtomicEnsemble,
    pulse: &PulseSpec,
) -> Result<WritePreparation> {
    ensemble.validate()?;
    if pulse.shape != PulseShape::WriteRisingExponential {
        return Err(invalid("write preparation needs a rising exponential pulse"));
    }
    let gamma_tau = ensemble.gamma_eg * pulse.duration;
    let theta0_mag = pulse.omega_max * pulse.duration / (1.0 + gamma_tau);
    let alpha_l = 2.0 * ensemble.d * gamma_tau / (1.0 + gamma_tau);
    Ok(WritePreparation {
        theta0_mag,
        alpha_l,
        excited_fraction: theta0_mag * theta0_mag * exp_bracket(alpha_l),
    })
}

/// Coherence envelope `|σ_ge(x, t)|` for an arbitrary sampled write pulse,
/// from the convolution
/// `∫_{-∞}^t e^{-γ(t-t')} J₀(2√(γ d (t-t') x)) Ω(t') dt'`.
///
/// `t` is in seconds on the pulse's own time axis. The samples must resolve
/// the pulse: steps larger than `duration/20` are rejected.
pub fn coherence_profile_general(
    ensemble: &AtomicEnsemble,
    pulse: &PulseSpec,
    x: f64,
    t: f64,
) -> Result<f64> {
    ensemble.validate()?;
    let PulseShape::Custom(samples) = &pulse.shape else {
        return Err(invalid("coherence_profile_general needs a sampled pulse"));
    };
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("position {x} outside [0, 1]")));
    }
    let limit = pulse.duration / 20.0;
    let step = samples.max_step();
    if step > limit {
        return Err(Error::Resolution { step, limit });
    }
    let gamma = ensemble.gamma_eg;
    let coupling = gamma * ensemble.d * x;
    let (gt, gw) = gauss_legendre(8);
    let times = samples.times();
    let end = t.min(times[times.len() - 1]);
    let mut acc = 0.0;
    for pair in times.windows(2) {
        let (a, b) = (pair[0], pair[1].min(end));
        if b <= a {
            break;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (u, w) in gt.iter().zip(&gw) {
            let s = mid + half * u;
            let lag = t - s;
            acc += half * w * (-gamma * lag).exp() * j0(2.0 * (coupling * lag).sqrt()) * samples.value_at(s);
        }
    }
    Ok(acc.abs())
}

/// Mean number of write photons emitted in the detection window `tau_d` (s).
pub fn write_photon_number(ensemble: &AtomicEnsemble, prep: &WritePreparation, tau_d: f64) -> Result<f64> {
    if !(tau_d > 0.0 && tau_d.is_finite()) {
        return Err(invalid(format!("detection window must be positive, got {tau_d}")));
    }
    Ok(initial_flux(ensemble, prep) * tau_d)
}

fn initial_flux(ensemble: &AtomicEnsemble, prep: &WritePreparation) -> f64 {
    ensemble.d_bar * ensemble.gamma_es * prep.theta0_mag.powi(2) * exp_bracket(prep.alpha_l)
}

const FLUX_NODES: usize = 128;
const NOISE_NODES: usize = 32;

/// Write-photon flux (photons/s) at the output face at time `t` (s) after
/// the preparation.
///
/// The coherent part is
/// `d̄γ_es|θ₀|² ∫₀¹ e^{-2γ_es t} I₀(2√(M(x) e^{-αL x} t))² e^{-αL x} dx` with
/// `M(x) = d̄γ_es|θ₀|²(1-e^{-αL(1-x)})/αL`. The Langevin contribution refills
/// the emitting population at rate `2γ_es`, which adds
/// `2γ_es ∫₀ᵗ coherent(s) ds`.
pub fn write_flux(
    ensemble: &AtomicEnsemble,
    prep: &WritePreparation,
    t: f64,
    include_noise_term: bool,
) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be >= 0, got {t}")));
    }
    let (xt, xw) = gauss_legendre(FLUX_NODES);
    let coherent = |t: f64| coherent_flux(ensemble, prep, t, &xt, &xw);
    let mut flux = coherent(t);
    if include_noise_term && t > 0.0 {
        let (st, sw) = gauss_legendre(NOISE_NODES);
        let integral: f64 =
            st.iter().zip(&sw).map(|(u, w)| 0.5 * t * w * coherent(0.5 * t * (1.0 + u))).sum();
        flux += 2.0 * ensemble.gamma_es * integral;
    }
    Ok(flux)
}

fn coherent_flux(ensemble: &AtomicEnsemble, prep: &WritePreparation, t: f64, xt: &[f64], xw: &[f64]) -> f64 {
    let rate = ensemble.d_bar * ensemble.gamma_es * prep.theta0_mag.powi(2);
    if rate == 0.0 {
        return 0.0;
    }
    let al = prep.alpha_l;
    let integral: f64 = xt
        .iter()
        .zip(xw)
        .map(|(u, w)| {
            let x = 0.5 * (1.0 + u);
            let m = rate * (1.0 - x) * exp_bracket(al * (1.0 - x));
            let y = 2.0 * (m * (-al * x).exp() * t).sqrt();
            let e = i0e(y);
            0.5 * w * e * e * (2.0 * y - 2.0 * ensemble.gamma_es * t - al * x).exp()
        })
        .sum();
    rate * integral
}

/// Coherent write flux integrated over the detection window, compared with
/// the constant-flux photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WriteFluxSummary {
    pub photon_number: f64,
    /// `∫₀^{τ_d}` of the coherent flux.
    pub integrated_flux: f64,
    pub flux_start: f64,
    pub flux_end: f64,
    /// `1 - min/max` of the coherent flux over the window.
    pub variation: f64,
}

impl WriteFluxSummary {
    /// `|integrated_flux - photon_number| / photon_number`.
    pub fn relative_mismatch(&self) -> f64 {
        if self.photon_number == 0.0 {
            return 0.0;
        }
        (self.integrated_flux - self.photon_number).abs() / self.photon_number
    }
}

pub fn write_flux_summary(ensemble: &AtomicEnsemble, prep: &WritePreparation, tau_d: f64) -> Result<WriteFluxSummary> {
    let photon_number = write_photon_number(ensemble, prep, tau_d)?;
    let (xt, xw) = gauss_legendre(FLUX_NODES);
    let coherent = |t: f64| coherent_flux(ensemble, prep, t, &xt, &xw);
    let (st, sw) = gauss_legendre(NOISE_NODES);
    let integrated_flux = st.iter().zip(&sw).map(|(u, w)| 0.5 * tau_d * w * coherent(0.5 * tau_d * (1.0 + u))).sum();
    let samples: Vec<f64> = (0..=64).map(|k| coherent(tau_d * k as f64 / 64.0)).collect();
    let max = samples.iter().cloned().fold(0.0, f64::max);
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = if max > 0.0 { 1.0 - min / max } else { 0.0 };
    Ok(WriteFluxSummary {
        photon_number,
        integrated_flux,
        flux_start: samples[0],
        flux_end: samples[64],
        variation,
    })
}

/// Normalized spin wave heralded by a write photon, `∝ e^{-αL x/2}`.
pub fn heralded_spin_wave(prep: &WritePreparation, grid: Arc<SpatialGrid>) -> Result<SpinWave> {
    SpinWave::exponential(grid, prep.alpha_l)
}

pub const DEFAULT_STRICTNESS: f64 = 10.0;

/// One `left ≫ right` inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCondition {
    pub name: &'static str,
    pub expression: &'static str,
    pub left: f64,
    pub right: f64,
    /// `left/right`; infinite when `right` vanishes.
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub strictness: f64,
    pub conditions: Vec<RegimeCondition>,
}

impl RegimeReport {
    pub fn all_satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCondition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Checks the weak-write, short-window, fast-read and phase-matching
/// conditions. `≫` means a ratio of at least `strictness`.
pub fn validate_regimes(
    ensemble: &AtomicEnsemble,
    write: &PulseSpec,
    tau_d: f64,
    read: &PulseSpec,
    strictness: f64,
) -> Result<RegimeReport> {
    if !(strictness > 0.0 && strictness.is_finite()) {
        return Err(invalid(format!("strictness must be positive, got {strictness}")));
    }
    let prep = prepare_coherence_exponential(ensemble, write)?;
    if !(tau_d > 0.0 && tau_d.is_finite()) {
        return Err(invalid(format!("detection window must be positive, got {tau_d}")));
    }
    let g = ensemble.gamma_eg;
    let depletion = initial_flux(ensemble, &prep);
    let raw = [
        ("weak_write", "1 >> Omega_W^max tau_W", 1.0, write.omega_max * write.duration),
        ("short_write", "1/gamma_eg >> tau_W", 1.0 / g, write.duration),
        ("window_gamma_es", "1/(2 gamma_es) >> tau_d", 0.5 / ensemble.gamma_es, tau_d),
        ("window_gamma_eg", "1/(2 gamma_eg) >> tau_d", 0.5 / g, tau_d),
        (
            "window_depletion",
            "1/(d_bar gamma_es |theta0|^2 (1-exp(-alpha L))/(alpha L)) >> tau_d",
            1.0 / depletion,
            tau_d,
        ),
        ("read_strength", "2 Omega_R >> gamma_eg (1+d)", 2.0 * read.omega_max, g * (1.0 + ensemble.d)),
        ("read_duration", "2 >> gamma_eg (1+d) tau_R", 2.0, g * (1.0 + ensemble.d) * read.duration),
        (
            "phase_matching",
            "1 >> |omega_e - omega_s| L / c",
            1.0,
            ensemble.ground_splitting * ensemble.length / SPEED_OF_LIGHT,
        ),
    ];
    let conditions = raw
        .into_iter()
        .map(|(name, expression, left, right)| {
            let margin = if right > 0.0 { left / right } else { f64::INFINITY };
            RegimeCondition {
                name,
                expression,
                left,
                right,
                margin,
                satisfied: margin * (1.0 + 1e-12) >= strictness,
            }
        })
        .collect();
    Ok(RegimeReport { strictness, conditions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, QuadratureRule};
    use crate::kernel::{build_kernel, tau_w_approx};
    use crate::pulse::{Direction, SampledPulse};
    use crate::units::mhz_to_rad_per_s;
    use proptest::prelude::*;

    fn rb87() -> (AtomicEnsemble, PulseSpec, f64) {
        let g_eg = mhz_to_rad_per_s(6.067) / 12.0;
        let g_es = mhz_to_rad_per_s(6.067) / 8.0;
        let ens = AtomicEnsemble::new(20.0, 20.0, g_eg, g_es, 1e-3).unwrap();
        let tau_w = tau_w_approx(20.0) / g_eg;
        let write = PulseSpec::write_exponential(0.01 / tau_w, tau_w).unwrap();
        (ens, write, 1e-7)
    }

    /// Exponential pulse sampled on `[-40τ, 0]` at `τ/50`.
    fn sampled_exponential(omega: f64, tau: f64) -> PulseSpec {
        let n = 40 * 50 + 1;
        let samples = SampledPulse::from_fn(-40.0 * tau, 0.0, n, |t| omega * (t / tau).exp()).unwrap();
        PulseSpec::custom(samples, tau, Direction::Forward).unwrap()
    }

    #[test]
    fn preparation_examples() {
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let p = prepare_coherence_exponential(&ens, &PulseSpec::write_exponential(0.01 / 0.09, 0.09).unwrap()).unwrap();
        assert!((p.theta0_mag - 0.01 / 1.09).abs() < 1e-15);
        assert!((p.alpha_l - 40.0 * 0.09 / 1.09).abs() < 1e-13);
        assert!((p.alpha_l - 3.3028).abs() < 1e-4);
        assert!(p.excited_fraction <= p.theta0_mag.powi(2) && p.excited_fraction > 0.0);
        let short = prepare_coherence_exponential(&ens, &PulseSpec::write_exponential(0.01 / 1e-9, 1e-9).unwrap()).unwrap();
        assert!(short.alpha_l < 1e-7);
        assert!((short.theta0_mag - 0.01).abs() < 1e-10);
        let read = PulseSpec::read_pi_pulse(1.0, Direction::Backward).unwrap();
        assert!(prepare_coherence_exponential(&ens, &read).is_err());
    }

    #[test]
    fn exp_bracket_limits() {
        assert_eq!(exp_bracket(0.0), 1.0);
        assert!((exp_bracket(1e-9) - (1.0 - 5e-10)).abs() < 1e-16);
        assert!((exp_bracket(2.0) - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_reproduces_closed_form() {
        let ens = AtomicEnsemble::dimensionless(5.0).unwrap();
        for tau in [0.05, 0.3, 1.0] {
            let pulse = sampled_exponential(0.01 / tau, tau);
            let prep = prepare_coherence_exponential(&ens, &PulseSpec::write_exponential(0.01 / tau, tau).unwrap()).unwrap();
            for x in [0.0, 0.25, 0.5, 1.0] {
                let num = coherence_profile_general(&ens, &pulse, x, 0.0).unwrap();
                let exact = prep.coherence_modulus(x);
                assert!(((num - exact) / exact).abs() < 1e-6, "tau={tau} x={x}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn convolution_limits_and_errors() {
        let ens = AtomicEnsemble::dimensionless(3.0).unwrap();
        let flat = SampledPulse::from_fn(0.0, 40.0, 4001, |_| 0.02).unwrap();
        let pulse = PulseSpec::custom(flat, 1.0, Direction::Forward).unwrap();
        let entry = coherence_profile_general(&ens, &pulse, 0.0, 40.0).unwrap();
        assert!((entry - 0.02).abs() < 1e-9);
        let zero = SampledPulse::from_fn(0.0, 1.0, 101, |_| 0.0).unwrap();
        let pulse = PulseSpec::custom(zero, 1.0, Direction::Forward).unwrap();
        assert_eq!(coherence_profile_general(&ens, &pulse, 0.7, 1.0).unwrap(), 0.0);
        let coarse = SampledPulse::from_fn(0.0, 1.0, 11, |_| 1.0).unwrap();
        let pulse = PulseSpec::custom(coarse, 1.0, Direction::Forward).unwrap();
        assert!(matches!(coherence_profile_general(&ens, &pulse, 0.5, 1.0), Err(Error::Resolution { .. })));
    }

    #[test]
    fn rb87_photon_number() {
        let (ens, write, tau_d) = rb87();
        let prep = prepare_coherence_exponential(&ens, &write).unwrap();
        let n_w = write_photon_number(&ens, &prep, tau_d).unwrap();
        // 20·(2π·6.067e6/8)·1e-7·(0.01·11/12)²·(1-e^{-10/3})/(10/3)
        let g_es = 2.0 * std::f64::consts::PI * 6.067e6 / 8.0;
        let theta = 0.01 / (1.0 + 1.0 / 11.0);
        let al: f64 = 10.0 / 3.0;
        let want = 20.0 * g_es * 1e-7 * theta * theta * (1.0 - (-al).exp()) / al;
        assert!(((n_w - want) / want).abs() < 1e-12);
        assert!((1.5e-4..=2.5e-4).contains(&n_w), "{n_w}");
        assert!(write_photon_number(&ens, &prep, 0.0).is_err());
        let dark = WritePreparation { theta0_mag: 0.0, ..prep };
        assert_eq!(write_photon_number(&ens, &dark, tau_d).unwrap(), 0.0);
        let flat = WritePreparation { alpha_l: 0.0, ..prep };
        let n_flat = write_photon_number(&ens, &flat, tau_d).unwrap();
        assert!((n_flat - 20.0 * ens.gamma_es * tau_d * theta * theta).abs() < 1e-18);
    }

    #[test]
    fn flux_at_time_zero_matches_photon_rate() {
        let (ens, write, tau_d) = rb87();
        let prep = prepare_coherence_exponential(&ens, &write).unwrap();
        let n_w = write_photon_number(&ens, &prep, tau_d).unwrap();
        let f0 = write_flux(&ens, &prep, 0.0, false).unwrap();
        assert!(((f0 - n_w / tau_d) / f0).abs() < 1e-12);
        assert_eq!(write_flux(&ens, &prep, 0.0, true).unwrap(), f0);
        assert!(write_flux(&ens, &prep, -1.0, false).is_err());
        let dark = WritePreparation { theta0_mag: 0.0, ..prep };
        assert_eq!(write_flux(&ens, &dark, 5e-8, true).unwrap(), 0.0);
    }

    #[test]
    fn rb87_flux_summary() {
        let (ens, write, tau_d) = rb87();
        let prep = prepare_coherence_exponential(&ens, &write).unwrap();
        let s = write_flux_summary(&ens, &prep, tau_d).unwrap();
        // coherent flux decays as e^{-2γ_es t} to leading order
        let decay = 1.0 - (-2.0 * ens.gamma_es * tau_d).exp();
        assert!((s.variation - decay).abs() < 1e-2, "{s:?}");
        assert!(s.relative_mismatch() <= s.variation, "{s:?}");
    }

    #[test]
    fn noise_term_restores_constant_flux() {
        let (ens, write, tau_d) = rb87();
        let prep = prepare_coherence_exponential(&ens, &write).unwrap();
        let f0 = write_flux(&ens, &prep, 0.0, true).unwrap();
        for k in 1..=4 {
            let t = tau_d * k as f64 / 4.0;
            let total = write_flux(&ens, &prep, t, true).unwrap();
            assert!(total >= write_flux(&ens, &prep, t, false).unwrap());
            assert!(((total - f0) / f0).abs() < 1e-2);
        }
    }

    #[test]
    fn heralded_shape_delegates() {
        let grid = Arc::new(make_grid(128, QuadratureRule::GaussLegendre).unwrap());
        let prep = WritePreparation { theta0_mag: 0.01, alpha_l: 3.3028, excited_fraction: 0.0 };
        let s = heralded_spin_wave(&prep, grid.clone()).unwrap();
        assert_eq!(s, SpinWave::exponential(grid.clone(), 3.3028).unwrap());
        let flat = WritePreparation { alpha_l: 0.0, ..prep };
        assert_eq!(heralded_spin_wave(&flat, grid.clone()).unwrap(), SpinWave::flat(grid));
    }

    #[test]
    fn heralded_wave_efficiency_at_d20() {
        let grid = Arc::new(make_grid(512, QuadratureRule::GaussLegendre).unwrap());
        let ens = AtomicEnsemble::dimensionless(20.0).unwrap();
        let tau = tau_w_approx(20.0);
        let prep = prepare_coherence_exponential(&ens, &PulseSpec::write_exponential(0.01 / tau, tau).unwrap()).unwrap();
        let spin = heralded_spin_wave(&prep, grid.clone()).unwrap();
        let eta = build_kernel(20.0, &grid).unwrap().efficiency(&spin, Direction::Backward).unwrap();
        assert!((eta - 0.8921).abs() < 1e-3);
    }

    #[test]
    fn rb87_regimes() {
        let (ens, write, tau_d) = rb87();
        let threshold = ens.gamma_eg * 21.0 / 2.0;
        let read = PulseSpec::read_pi_pulse(10.0 * threshold, Direction::Backward).unwrap();
        let r = validate_regimes(&ens, &write, tau_d, &read, DEFAULT_STRICTNESS).unwrap();
        let weak = r.get("weak_write").unwrap();
        assert!(weak.satisfied && (weak.margin - 100.0).abs() < 1e-9);
        let strong = r.get("read_strength").unwrap();
        assert!(strong.satisfied && (strong.margin - 10.0).abs() < 1e-9);
        let window = r.get("window_gamma_es").unwrap();
        assert!(!window.satisfied && (window.margin - 1.05).abs() < 0.01);
        assert!(!r.all_satisfied());
        assert!(r.conditions.iter().all(|c| c.margin > 0.0));
        // with the rounded 5.3 MHz threshold the margin is just short of 10
        let rounded = PulseSpec::read_pi_pulse(10.0 * mhz_to_rad_per_s(5.3), Direction::Backward).unwrap();
        let m = validate_regimes(&ens, &write, tau_d, &rounded, 10.0).unwrap();
        let rs = m.get("read_strength").unwrap();
        assert!((rs.margin - 9.984).abs() < 1e-3 && !rs.satisfied);
        let ps = ens.with_ground_splitting(mhz_to_rad_per_s(6834.682)).unwrap();
        let pm = validate_regimes(&ps, &write, tau_d, &read, 10.0).unwrap();
        let phase = pm.get("phase_matching").unwrap();
        let want = SPEED_OF_LIGHT / (mhz_to_rad_per_s(6834.682) * 1e-3);
        assert!((phase.margin - want).abs() < 1e-9 * want);
        assert_eq!(phase.satisfied, want >= 10.0);
        assert!(r.get("phase_matching").unwrap().margin.is_infinite());
    }

    proptest! {
        #[test]
        fn heralded_shape_ignores_write_strength(tau in 0.01f64..2.0, d in 0.1f64..50.0) {
            let grid = Arc::new(make_grid(64, QuadratureRule::GaussLegendre).unwrap());
            let ens = AtomicEnsemble::dimensionless(d).unwrap();
            let waves: Vec<SpinWave> = [0.001, 0.01]
                .iter()
                .map(|s| {
                    let prep = prepare_coherence_exponential(&ens, &PulseSpec::write_exponential(s / tau, tau).unwrap()).unwrap();
                    heralded_spin_wave(&prep, grid.clone()).unwrap()
                })
                .collect();
            prop_assert_eq!(&waves[0], &waves[1]);
        }

        #[test]
        fn noise_term_is_non_negative(frac in 0.0f64..1.0) {
            let (ens, write, tau_d) = rb87();
            let prep = prepare_coherence_exponential(&ens, &write).unwrap();
            let t = frac * tau_d;
            prop_assert!(write_flux(&ens, &prep, t, true).unwrap() >= write_flux(&ens, &prep, t, false).unwrap());
        }

        #[test]
        fn spin_count_equals_photon_count(strength in 0.001f64..0.02, d in 1.0f64..40.0) {
            // short window: 2γ_es τ_d = 1e-3
            let ens = AtomicEnsemble::dimensionless(d).unwrap();
            let tau = tau_w_approx(d);
            let write = PulseSpec::write_exponential(strength / tau, tau).unwrap();
            let prep = prepare_coherence_exponential(&ens, &write).unwrap();
            let s = write_flux_summary(&ens, &prep, 5e-4).unwrap();
            prop_assert!(s.relative_mismatch() < 1e-3, "{:?}", s);
        }

        #[test]
        fn convolution_matches_closed_form_random(x in 0.0f64..1.0, tau in 0.05f64..1.0) {
            let ens = AtomicEnsemble::dimensionless(5.0).unwrap();
            let pulse = sampled_exponential(0.01 / tau, tau);
            let prep = prepare_coherence_exponential(&ens, &PulseSpec::write_exponential(0.01 / tau, tau).unwrap()).unwrap();
            let num = coherence_profile_general(&ens, &pulse, x, 0.0).unwrap();
            let exact = prep.coherence_modulus(x);
            prop_assert!(((num - exact) / exact).abs() < 1e-6, "{} vs {}", num, exact);
        }
    }
}
