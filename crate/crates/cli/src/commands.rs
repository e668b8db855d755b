//! Computations behind each subcommand. Rendering lives in `output`.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use spinwave::dynamics::{pi_pulse_transfer_loss, simulate_read, EmissionRecord, SimulationOptions};
use spinwave::kernel::{alpha_from_write, build_kernel, efficiency_report, tau_w_approx};
use spinwave::units::rad_per_s_to_mhz;
use spinwave::write::{
    prepare_coherence_exponential, validate_regimes, write_flux_summary, write_photon_number, RegimeReport,
};
use spinwave::{make_grid, AtomicEnsemble, Direction, PulseSpec, QuadratureRule, SpatialGrid, SpinWave};

use crate::config::{RunConfig, SpinSource};
use crate::error::CliError;
use crate::presets::PhysicalParams;

pub fn gauss_grid(n: usize) -> Result<Arc<SpatialGrid>, CliError> {
    Ok(Arc::new(make_grid(n, QuadratureRule::GaussLegendre)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyRow {
    pub d: f64,
    pub eta_fwd: f64,
    pub eta_offres: f64,
    pub eta_res: f64,
    pub eta_star: f64,
    pub alpha_l: f64,
    pub best_fit_alpha_l: f64,
    pub best_fit_eta: f64,
}

/// One row per depth, evaluated in parallel and returned in input order.
pub fn efficiency_rows(depths: &[f64], grid_points: usize) -> Result<Vec<EfficiencyRow>, CliError> {
    let grid = gauss_grid(grid_points)?;
    depths
        .par_iter()
        .map(|&d| {
            let r = efficiency_report(d, &grid)?;
            Ok(EfficiencyRow {
                d,
                eta_fwd: r.eta_fwd,
                eta_offres: r.eta_offres,
                eta_res: r.eta_res,
                eta_star: r.eta_star,
                alpha_l: r.alpha_l_used,
                best_fit_alpha_l: r.best_fit.alpha_l,
                best_fit_eta: r.best_fit.efficiency,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSet {
    pub d: f64,
    pub eta_star: f64,
    pub best_fit_alpha_l: f64,
    pub best_fit_eta: f64,
    /// `|Σ w S_opt S_exp|²`.
    pub overlap: f64,
    pub x: Vec<f64>,
    pub s_opt: Vec<f64>,
    pub s_exp: Vec<f64>,
}

pub fn shape_sets(depths: &[f64], grid_points: usize) -> Result<Vec<ShapeSet>, CliError> {
    let grid = gauss_grid(grid_points)?;
    depths
        .par_iter()
        .map(|&d| {
            let kernel = build_kernel(d, &grid)?;
            let (eta_star, opt) = kernel.optimal_spin_wave()?;
            let fit = kernel.best_fit_exponential()?;
            let exp = SpinWave::exponential(Arc::clone(&grid), fit.alpha_l)?;
            Ok(ShapeSet {
                d,
                eta_star,
                best_fit_alpha_l: fit.alpha_l,
                best_fit_eta: fit.efficiency,
                overlap: opt.overlap(&exp)?,
                x: grid.nodes().to_vec(),
                s_opt: opt.amplitudes().iter().map(|a| a.re).collect(),
                s_exp: exp.amplitudes().iter().map(|a| a.re).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeEntry {
    pub name: &'static str,
    pub expression: &'static str,
    pub left: f64,
    pub right: f64,
    /// `null` in JSON when the right-hand side vanishes.
    pub margin: Option<f64>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub d: f64,
    pub d_bar: f64,
    pub gamma_eg_rad_per_s: f64,
    pub gamma_es_rad_per_s: f64,
    pub tau_w_s: f64,
    pub tau_w_ns: f64,
    pub alpha_l: f64,
    pub theta0: f64,
    pub excited_fraction: f64,
    pub tau_d_s: f64,
    pub n_w: f64,
    pub write_flux_integrated: f64,
    pub write_flux_variation: f64,
    pub omega_r_threshold_rad_per_s: f64,
    /// Threshold as a linear frequency, i.e. `Ω/(2π)` in MHz.
    pub omega_r_threshold_mhz: f64,
    pub omega_r_rad_per_s: f64,
    pub omega_r_mhz: f64,
    pub pi_pulse_transfer_loss: f64,
    pub eta_res: f64,
    pub eta_fwd: f64,
    pub eta_star: f64,
    pub strictness: f64,
    pub all_regimes_satisfied: bool,
    pub regimes: Vec<RegimeEntry>,
}

pub fn feasibility(params: &PhysicalParams, config: &RunConfig) -> Result<FeasibilityReport, CliError> {
    let ens: AtomicEnsemble = params.ensemble()?;
    let gamma_tau = tau_w_approx(params.d);
    let tau_w = gamma_tau / params.gamma_eg;
    let write = PulseSpec::write_exponential(params.write_area / tau_w, tau_w)?;
    let prep = prepare_coherence_exponential(&ens, &write)?;
    let n_w = write_photon_number(&ens, &prep, params.tau_d)?;
    let flux = write_flux_summary(&ens, &prep, params.tau_d)?;

    let threshold = params.gamma_eg * (1.0 + params.d) / 2.0;
    let omega_r = match config.read.omega_r_mhz {
        Some(mhz) => spinwave::units::mhz_to_rad_per_s(mhz),
        None => config.read.omega_r_factor * threshold,
    };
    let read = PulseSpec::read_pi_pulse(omega_r, Direction::Backward)?;
    let regimes: RegimeReport = validate_regimes(&ens, &write, params.tau_d, &read, config.strictness)?;

    let grid = gauss_grid(config.grid)?;
    let kernel = build_kernel(params.d, &grid)?;
    let spin = SpinWave::exponential(Arc::clone(&grid), alpha_from_write(params.d, gamma_tau))?;
    let (eta_star, _) = kernel.optimal_spin_wave()?;

    Ok(FeasibilityReport {
        d: params.d,
        d_bar: params.d_bar,
        gamma_eg_rad_per_s: params.gamma_eg,
        gamma_es_rad_per_s: params.gamma_es,
        tau_w_s: tau_w,
        tau_w_ns: tau_w * 1e9,
        alpha_l: prep.alpha_l,
        theta0: prep.theta0_mag,
        excited_fraction: prep.excited_fraction,
        tau_d_s: params.tau_d,
        n_w,
        write_flux_integrated: flux.integrated_flux,
        write_flux_variation: flux.variation,
        omega_r_threshold_rad_per_s: threshold,
        omega_r_threshold_mhz: rad_per_s_to_mhz(threshold),
        omega_r_rad_per_s: omega_r,
        omega_r_mhz: rad_per_s_to_mhz(omega_r),
        pi_pulse_transfer_loss: pi_pulse_transfer_loss(&ens, omega_r)?,
        eta_res: kernel.efficiency(&spin, Direction::Backward)?,
        eta_fwd: kernel.efficiency(&spin, Direction::Forward)?,
        eta_star,
        strictness: regimes.strictness,
        all_regimes_satisfied: regimes.all_satisfied(),
        regimes: regimes
            .conditions
            .into_iter()
            .map(|c| RegimeEntry {
                name: c.name,
                expression: c.expression,
                left: c.left,
                right: c.right,
                margin: c.margin.is_finite().then_some(c.margin),
                satisfied: c.satisfied,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub d: f64,
    pub grid: usize,
    pub spin: String,
    pub direction: &'static str,
    /// `Ω_R/γ_eg`.
    pub omega_r: f64,
    pub omega_r_factor: f64,
    pub tau_r: f64,
    pub detuning: f64,
    pub t_end: f64,
    pub tol: f64,
    pub efficiency: f64,
    pub kernel_efficiency: f64,
    pub pi_pulse_transfer_loss: f64,
    pub final_time: f64,
    pub final_residual: f64,
    pub final_loss: f64,
    /// Largest `|initial - emitted - loss - residual|` over accepted steps.
    pub budget_residual: f64,
    pub steps: usize,
}

pub struct Simulation {
    pub summary: SimulationSummary,
    pub record: EmissionRecord,
}

pub fn simulate(config: &RunConfig) -> Result<Simulation, CliError> {
    let s = &config.simulate;
    let d = config.depths[0];
    let grid = gauss_grid(config.grid)?;
    let spin = load_spin(&s.spin, d, &grid)?;
    let ens = AtomicEnsemble::dimensionless(d)?;
    let omega = s.omega_r_factor * (1.0 + d) / 2.0;
    let read = PulseSpec::read_pi_pulse(omega, s.direction)?.with_detuning(s.detuning)?;
    let options = SimulationOptions { t_end: s.t_end, tol: s.tol, ..Default::default() };
    let record = simulate_read(&ens, &spin, &read, &options)?;
    let kernel = build_kernel(d, &grid)?;
    let summary = SimulationSummary {
        d,
        grid: config.grid,
        spin: s.spin.to_string(),
        direction: match s.direction {
            Direction::Backward => "backward",
            Direction::Forward => "forward",
        },
        omega_r: omega,
        omega_r_factor: s.omega_r_factor,
        tau_r: read.duration,
        detuning: s.detuning,
        t_end: s.t_end,
        tol: s.tol,
        efficiency: record.efficiency,
        kernel_efficiency: kernel.efficiency(&spin, s.direction)?,
        pi_pulse_transfer_loss: pi_pulse_transfer_loss(&ens, omega)?,
        final_time: record.final_state.time,
        final_residual: record.final_residual,
        final_loss: record.final_state.sponte_loss,
        budget_residual: record.max_budget_error,
        steps: record.times.len() - 1,
    };
    Ok(Simulation { summary, record })
}

fn load_spin(source: &SpinSource, d: f64, grid: &Arc<SpatialGrid>) -> Result<SpinWave, CliError> {
    Ok(match source {
        SpinSource::Flat => SpinWave::flat(Arc::clone(grid)),
        SpinSource::Exponential(a) => SpinWave::exponential(Arc::clone(grid), *a)?,
        SpinSource::Optimal => build_kernel(d, grid)?.optimal_spin_wave()?.1,
        SpinSource::File(path) => spin_from_file(path, grid)?,
    })
}

/// Reads `x,re[,im]` samples with a header row and interpolates them
/// linearly onto `grid`, clamping outside the sampled range.
pub fn spin_from_file(path: &Path, grid: &Arc<SpatialGrid>) -> Result<SpinWave, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |why: String| CliError::config(format!("{}: {why}", path.display()));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> =
        reader.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_ascii_lowercase).collect();
    let complex = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x", "re"] => false,
        ["x", "re", "im"] => true,
        _ => return Err(bad(format!("expected header x,re or x,re,im, got {}", header.join(",")))),
    };
    let mut samples: Vec<(f64, Complex64)> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("row {}: column {} is not a finite number", line + 2, i + 1)))
        };
        let x = num(0)?;
        let im = if complex { num(2)? } else { 0.0 };
        samples.push((x, Complex64::new(num(1)?, im)));
    }
    if samples.len() < 2 {
        return Err(bad("need at least two samples".into()));
    }
    if samples.windows(2).any(|p| p[1].0 <= p[0].0) || samples.iter().any(|s| !(0.0..=1.0).contains(&s.0)) {
        return Err(bad("x must be strictly increasing within [0, 1]".into()));
    }
    let amps = grid
        .nodes()
        .iter()
        .map(|&x| {
            let k = samples.partition_point(|s| s.0 <= x);
            match k {
                0 => samples[0].1,
                k if k == samples.len() => samples[k - 1].1,
                k => {
                    let ((x0, a0), (x1, a1)) = (samples[k - 1], samples[k]);
                    a0 + (a1 - a0) * ((x - x0) / (x1 - x0))
                }
            }
        })
        .collect();
    SpinWave::from_amplitudes(Arc::clone(grid), amps)?
        .normalized()
        .map_err(|_| bad("spin wave is identically zero".into()))
}
