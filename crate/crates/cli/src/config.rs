//! Command-line flags, the optional JSON config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use spinwave::Direction;

use crate::error::CliError;
use crate::presets::{preset, PhysicalParams};

#[derive(Parser, Debug)]
#[command(name = "spinwave", version, about = "Spin-wave retrieval efficiencies for Raman single-photon sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Efficiency table for the forward, off-resonant, resonant and optimal spin waves
    Table,
    /// Optimal and best-fit exponential spin shapes
    Shapes,
    /// Efficiencies over a log-spaced sweep of optical depths
    Curve,
    /// Write/read budget for a physical ensemble
    Feasibility(FeasibilityArgs),
    /// Time-domain readout simulation
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Table => "table",
            Self::Shapes => "shapes",
            Self::Curve => "curve",
            Self::Feasibility(_) => "feasibility",
            Self::Simulate(_) => "simulate",
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Optical depths, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub d: Option<Vec<f64>>,

    /// Log-spaced sweep `min:max:points`
    #[arg(long = "d-sweep", global = true)]
    pub d_sweep: Option<String>,

    /// Number of spatial quadrature points
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Named parameter set (rb87)
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// Output file; standard output if omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Ratio required for "much greater than" in regime checks
    #[arg(long, global = true)]
    pub strictness: Option<f64>,

    /// JSON file with defaults for any of the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FeasibilityArgs {
    /// γ_eg as linear frequency, MHz (multiplied by 2π internally)
    #[arg(long)]
    pub gamma_eg_mhz: Option<f64>,
    /// γ_es as linear frequency, MHz
    #[arg(long)]
    pub gamma_es_mhz: Option<f64>,
    #[arg(long)]
    pub d_bar: Option<f64>,
    /// Write pulse area Ω_W^max·τ_W
    #[arg(long)]
    pub write_area: Option<f64>,
    /// Detection window, μs
    #[arg(long)]
    pub tau_d_us: Option<f64>,
    #[arg(long)]
    pub length_mm: Option<f64>,
    /// Ground-state splitting, MHz
    #[arg(long)]
    pub ground_splitting_mhz: Option<f64>,
    /// Read Rabi frequency in units of the threshold γ_eg(1+d)/2 [default: 10]
    #[arg(long)]
    pub omega_r_factor: Option<f64>,
    /// Read Rabi frequency as linear frequency, MHz; overrides the factor
    #[arg(long)]
    pub omega_r_mhz: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    /// flat | exp:<alphaL> | optimal | file:<path> [default: optimal]
    #[arg(long)]
    pub spin: Option<String>,
    /// Read Rabi frequency in units of γ_eg(1+d)/2 [default: 100]
    #[arg(long)]
    pub omega_r_factor: Option<f64>,
    /// Dimensionless end time γ_eg·t [default: 50]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Integrator tolerance [default: 1e-9]
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Detuning Δ/γ_eg [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub detuning: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Backward,
    Forward,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Forward => Direction::Forward,
        }
    }
}

/// Contents of `--config`. Keys mirror the flags in snake case.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub d: Option<Vec<f64>>,
    pub d_sweep: Option<String>,
    pub grid: Option<usize>,
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub strictness: Option<f64>,
    pub gamma_eg_mhz: Option<f64>,
    pub gamma_es_mhz: Option<f64>,
    pub d_bar: Option<f64>,
    pub write_area: Option<f64>,
    pub tau_d_us: Option<f64>,
    pub length_mm: Option<f64>,
    pub ground_splitting_mhz: Option<f64>,
    pub omega_r_factor: Option<f64>,
    pub omega_r_mhz: Option<f64>,
    pub spin: Option<String>,
    pub t_end: Option<f64>,
    pub tol: Option<f64>,
    pub direction: Option<DirectionArg>,
    pub detuning: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

pub const TABLE_DEPTHS: [f64; 5] = [0.1, 1.0, 10.0, 20.0, 100.0];
pub const SHAPE_DEPTHS: [f64; 4] = [1.0, 10.0, 20.0, 100.0];
pub const DEFAULT_SWEEP: &str = "0.1:100:31";
pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_SIM_GRID: usize = 128;
pub const MIN_GRID: usize = 16;

/// Fully resolved configuration for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub depths: Vec<f64>,
    pub grid: usize,
    pub strictness: f64,
    pub physical: Option<PhysicalParams>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub read: ReadSettings,
    pub simulate: SimulateSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadSettings {
    pub omega_r_factor: f64,
    /// Linear MHz, if given.
    pub omega_r_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSettings {
    pub spin: SpinSource,
    pub omega_r_factor: f64,
    pub t_end: f64,
    pub tol: f64,
    pub direction: Direction,
    pub detuning: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpinSource {
    Flat,
    Exponential(f64),
    Optimal,
    File(PathBuf),
}

impl std::str::FromStr for SpinSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::config(format!("bad spin source '{s}' (flat | exp:<alphaL> | optimal | file:<path>)"));
        match s {
            "flat" => Ok(Self::Flat),
            "optimal" => Ok(Self::Optimal),
            _ => {
                if let Some(a) = s.strip_prefix("exp:") {
                    let a: f64 = a.parse().map_err(|_| bad())?;
                    if !(a >= 0.0 && a.is_finite()) {
                        return Err(bad());
                    }
                    Ok(Self::Exponential(a))
                } else if let Some(p) = s.strip_prefix("file:") {
                    if p.is_empty() {
                        return Err(bad());
                    }
                    Ok(Self::File(PathBuf::from(p)))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl std::fmt::Display for SpinSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Flat => write!(f, "flat"),
            Self::Exponential(a) => write!(f, "exp:{a}"),
            Self::Optimal => write!(f, "optimal"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Log-spaced depths from `min:max:points`, endpoints included exactly.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::config(format!("bad --d-sweep '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected min:max:points"));
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| bad("min is not a number"))?;
    let max: f64 = parts[1].trim().parse().map_err(|_| bad("max is not a number"))?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad("points is not an integer"))?;
    if !(min > 0.0 && max.is_finite() && max > min) {
        return Err(bad("need 0 < min < max"));
    }
    if points < 2 {
        return Err(bad("need at least 2 points"));
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => min,
            k if k == points - 1 => max,
            // snapped to 12 significant digits so decades print cleanly
            k => format!("{:.11e}", (lo + step * k as f64).exp()).parse().unwrap_or(f64::NAN),
        })
        .collect())
}

impl RunConfig {
    /// Merges flags over the config file and fills defaults.
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let name = cli.command.name();
        if let Some(cmd) = &file.command {
            if cmd != name {
                return Err(CliError::config(format!("config file is for '{cmd}', not '{name}'")));
            }
        }
        let c = &cli.common;
        let preset_name = c.preset.clone().or(file.preset.clone());
        let base = preset_name.as_deref().map(preset).transpose()?;

        let d_list = c.d.clone().or(file.d.clone());
        let sweep = c.d_sweep.clone().or(file.d_sweep.clone());
        let depths = match (&d_list, &sweep) {
            (Some(_), Some(_)) => return Err(CliError::config("give either --d or --d-sweep, not both")),
            (Some(d), None) => d.clone(),
            (None, Some(s)) => parse_sweep(s)?,
            (None, None) => match (&cli.command, base) {
                (Command::Curve, _) => parse_sweep(DEFAULT_SWEEP)?,
                (_, Some(p)) => vec![p.d],
                (Command::Shapes, None) => SHAPE_DEPTHS.to_vec(),
                (Command::Simulate(_), None) => vec![20.0],
                _ => TABLE_DEPTHS.to_vec(),
            },
        };
        if depths.is_empty() {
            return Err(CliError::config("optical depth list is empty"));
        }
        if let Some(bad) = depths.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(CliError::config(format!("optical depths must be positive, got {bad}")));
        }

        let default_grid = if matches!(cli.command, Command::Simulate(_)) { DEFAULT_SIM_GRID } else { DEFAULT_GRID };
        let grid = c.grid.or(file.grid).unwrap_or(default_grid);
        if grid < MIN_GRID {
            return Err(CliError::config(format!("grid must have at least {MIN_GRID} points, got {grid}")));
        }
        let strictness = c.strictness.or(file.strictness).unwrap_or(spinwave::write::DEFAULT_STRICTNESS);
        if !(strictness > 0.0 && strictness.is_finite()) {
            return Err(CliError::config(format!("strictness must be positive, got {strictness}")));
        }
        let format = c.format.or(file.format).unwrap_or(match cli.command {
            Command::Feasibility(_) => Format::Json,
            _ => Format::Csv,
        });
        if matches!(cli.command, Command::Feasibility(_)) && format == Format::Csv {
            return Err(CliError::config("feasibility reports are JSON only"));
        }

        let (physical, read) = match &cli.command {
            Command::Feasibility(a) => {
                let p = physical_params(a, &file, base, &depths)?;
                let read = ReadSettings {
                    omega_r_factor: positive("omega_r_factor", a.omega_r_factor.or(file.omega_r_factor).unwrap_or(10.0))?,
                    omega_r_mhz: a.omega_r_mhz.or(file.omega_r_mhz).map(|v| positive("omega_r_mhz", v)).transpose()?,
                };
                (Some(p), read)
            }
            _ => (base, ReadSettings { omega_r_factor: 10.0, omega_r_mhz: None }),
        };

        let sim = match &cli.command {
            Command::Simulate(a) => a.clone(),
            _ => SimulateArgs::default(),
        };
        let spin = sim.spin.or(file.spin.clone()).map(|s| s.parse()).transpose()?.unwrap_or(SpinSource::Optimal);
        let tol = sim.tol.or(file.tol).unwrap_or(1e-9);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::config(format!("tol must lie in (0, 1), got {tol}")));
        }
        let detuning = sim.detuning.or(file.detuning).unwrap_or(0.0);
        if !detuning.is_finite() {
            return Err(CliError::config("detuning must be finite"));
        }
        let simulate = SimulateSettings {
            spin,
            omega_r_factor: non_negative("omega_r_factor", sim.omega_r_factor.or(file.omega_r_factor).unwrap_or(100.0))?,
            t_end: positive("t_end", sim.t_end.or(file.t_end).unwrap_or(50.0))?,
            tol,
            direction: sim.direction.or(file.direction).unwrap_or(DirectionArg::Backward).into(),
            detuning,
        };
        if matches!(cli.command, Command::Simulate(_)) && depths.len() != 1 {
            return Err(CliError::config("simulate takes a single optical depth"));
        }

        Ok(Self {
            command: name,
            depths,
            grid,
            strictness,
            physical,
            out: c.out.clone().or(file.out),
            format,
            read,
            simulate,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be >= 0, got {v}")))
    }
}

fn physical_params(
    a: &FeasibilityArgs,
    file: &FileConfig,
    base: Option<PhysicalParams>,
    depths: &[f64],
) -> Result<PhysicalParams, CliError> {
    use spinwave::units::mhz_to_rad_per_s;
    let need = |name: &str, flag: Option<f64>, file: Option<f64>, base: Option<f64>| -> Result<f64, CliError> {
        match flag.or(file) {
            Some(v) => positive(name, v),
            None => base.ok_or_else(|| CliError::config(format!("{name} is required without --preset"))),
        }
    };
    if depths.len() != 1 {
        return Err(CliError::config("feasibility takes a single optical depth"));
    }
    let d = depths[0];
    let splitting = match a.ground_splitting_mhz.or(file.ground_splitting_mhz) {
        Some(v) => non_negative("ground_splitting_mhz", v).map(mhz_to_rad_per_s)?,
        None => base.map_or(0.0, |b| b.ground_splitting),
    };
    Ok(PhysicalParams {
        d,
        d_bar: need("d_bar", a.d_bar, file.d_bar, base.map(|b| b.d_bar).or(Some(d)))?,
        gamma_eg: need("gamma_eg_mhz", a.gamma_eg_mhz.map(mhz_to_rad_per_s), file.gamma_eg_mhz.map(mhz_to_rad_per_s), base.map(|b| b.gamma_eg))?,
        gamma_es: need("gamma_es_mhz", a.gamma_es_mhz.map(mhz_to_rad_per_s), file.gamma_es_mhz.map(mhz_to_rad_per_s), base.map(|b| b.gamma_es))?,
        write_area: need("write_area", a.write_area, file.write_area, base.map(|b| b.write_area))?,
        tau_d: need("tau_d_us", a.tau_d_us.map(|v| v * 1e-6), file.tau_d_us.map(|v| v * 1e-6), base.map(|b| b.tau_d))?,
        length: need("length_mm", a.length_mm.map(|v| v * 1e-3), file.length_mm.map(|v| v * 1e-3), base.map(|b| b.length))?,
        ground_splitting: splitting,
    })
}
