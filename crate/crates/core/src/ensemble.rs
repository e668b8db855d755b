use crate::error::{invalid, Result};

/// Optical depths and decay rates of the atomic medium.
///
/// Rates are angular (rad/s). `length` and `ground_splitting` only enter the
/// phase-matching check; every efficiency depends on `d` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicEnsemble {
    /// Optical depth of the |e⟩–|g⟩ transition.
    pub d: f64,
    /// Optical depth of the |e⟩–|s⟩ transition.
    pub d_bar: f64,
    pub gamma_eg: f64,
    pub gamma_es: f64,
    /// Spin-wave (|g⟩–|s⟩) decay rate. Retrieval is modelled with this set to zero.
    pub gamma_0: f64,
    /// Sample length, meters.
    pub length: f64,
    /// |g⟩–|s⟩ splitting (rad/s), zero for degenerate ground states.
    pub ground_splitting: f64,
}

impl AtomicEnsemble {
    pub fn new(d: f64, d_bar: f64, gamma_eg: f64, gamma_es: f64, length: f64) -> Result<Self> {
        let e = Self { d, d_bar, gamma_eg, gamma_es, gamma_0: 0.0, length, ground_splitting: 0.0 };
        e.validate()?;
        Ok(e)
    }

    /// Ensemble in natural units: `γ_eg = γ_es = 1`, `L = 1`, `d̄ = d`.
    pub fn dimensionless(d: f64) -> Result<Self> {
        Self::new(d, d, 1.0, 1.0, 1.0)
    }

    pub fn with_gamma_0(mut self, gamma_0: f64) -> Result<Self> {
        self.gamma_0 = gamma_0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_ground_splitting(mut self, splitting: f64) -> Result<Self> {
        self.ground_splitting = splitting;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d", self.d),
            ("d_bar", self.d_bar),
            ("gamma_eg", self.gamma_eg),
            ("gamma_es", self.gamma_es),
            ("length", self.length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.gamma_0 >= 0.0 && self.gamma_0.is_finite()) {
            return Err(invalid(format!("gamma_0 must be non-negative, got {}", self.gamma_0)));
        }
        if !(self.ground_splitting >= 0.0 && self.ground_splitting.is_finite()) {
            return Err(invalid("ground_splitting must be non-negative"));
        }
        Ok(())
    }
}
