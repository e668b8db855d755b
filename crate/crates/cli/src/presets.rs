//! Named physical parameter sets.

use spinwave::units::mhz_to_rad_per_s;
use spinwave::AtomicEnsemble;

use crate::error::CliError;

/// Physical parameters for the feasibility report. Rates in rad/s, times in
/// seconds, lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub d: f64,
    pub d_bar: f64,
    pub gamma_eg: f64,
    pub gamma_es: f64,
    /// Write pulse area `Ω_W^max τ_W`.
    pub write_area: f64,
    pub tau_d: f64,
    pub length: f64,
    pub ground_splitting: f64,
}

/// Rubidium-87 D-line values. The sample length is an assumption (1 mm) used
/// only by the phase-matching check.
pub mod rb87 {
    /// Natural linewidth, MHz (linear).
    pub const LINEWIDTH_MHZ: f64 = 6.067;
    pub const GAMMA_EG_MHZ: f64 = LINEWIDTH_MHZ / 12.0;
    pub const GAMMA_ES_MHZ: f64 = LINEWIDTH_MHZ / 8.0;
    pub const D: f64 = 20.0;
    pub const D_BAR: f64 = 20.0;
    pub const WRITE_AREA: f64 = 0.01;
    pub const TAU_D: f64 = 0.1e-6;
    pub const LENGTH: f64 = 1e-3;
    /// Ground-state hyperfine splitting, MHz.
    pub const GROUND_SPLITTING_MHZ: f64 = 6_834.682_610_904;
}

pub fn preset(name: &str) -> Result<PhysicalParams, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "rb87" => Ok(PhysicalParams {
            d: rb87::D,
            d_bar: rb87::D_BAR,
            gamma_eg: mhz_to_rad_per_s(rb87::GAMMA_EG_MHZ),
            gamma_es: mhz_to_rad_per_s(rb87::GAMMA_ES_MHZ),
            write_area: rb87::WRITE_AREA,
            tau_d: rb87::TAU_D,
            length: rb87::LENGTH,
            ground_splitting: mhz_to_rad_per_s(rb87::GROUND_SPLITTING_MHZ),
        }),
        other => Err(CliError::config(format!("unknown preset '{other}' (available: rb87)"))),
    }
}

impl PhysicalParams {
    pub fn ensemble(&self) -> Result<AtomicEnsemble, CliError> {
        Ok(AtomicEnsemble::new(self.d, self.d_bar, self.gamma_eg, self.gamma_es, self.length)?
            .with_ground_splitting(self.ground_splitting)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rb87_rates() {
        let p = preset("rb87").unwrap();
        assert!((p.gamma_eg - 2.0 * std::f64::consts::PI * 6.067e6 / 12.0).abs() < 1e-6);
        assert!((p.gamma_es / p.gamma_eg - 1.5).abs() < 1e-15);
        assert_eq!(preset("RB87").unwrap(), p);
        assert!(matches!(preset("cs133"), Err(CliError::Config(_))));
    }
}
