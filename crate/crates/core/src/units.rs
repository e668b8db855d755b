//! Conversions between laboratory units and the dimensionless internal scale.

use std::f64::consts::TAU;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Linear frequency in MHz to angular frequency in rad/s (`2π·f·10⁶`).
pub fn mhz_to_rad_per_s(mhz: f64) -> f64 {
    TAU * mhz * 1e6
}

/// Angular frequency in rad/s to linear frequency in MHz.
pub fn rad_per_s_to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e6)
}

/// Physical time (s) to `γ·t`.
pub fn to_dimensionless_time(t: f64, gamma: f64) -> f64 {
    gamma * t
}

/// `γ·t` back to seconds.
pub fn to_seconds(t_dimless: f64, gamma: f64) -> f64 {
    t_dimless / gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mhz_round_trip() {
        let w = mhz_to_rad_per_s(6.067);
        assert!((w - 38_120_085.26).abs() < 1e-2);
        assert!((rad_per_s_to_mhz(w) - 6.067).abs() < 1e-12);
    }

    #[test]
    fn time_scaling() {
        assert_eq!(to_dimensionless_time(2e-9, 5e8), 1.0);
        assert_eq!(to_seconds(1.0, 5e8), 2e-9);
    }
}
