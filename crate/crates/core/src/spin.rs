//! Spin-wave amplitudes sampled on a quadrature grid.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::SpatialGrid;

/// Tolerance on `Σ w_i |S_i|² = 1` for a spin wave to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Complex spin amplitude `S(x_i)` in the stored frame (write enters at
/// `x = 0`, backward retrieval exits at `x = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWave {
    grid: Arc<SpatialGrid>,
    amplitude: Vec<Complex64>,
}

impl SpinWave {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(grid: Arc<SpatialGrid>, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(invalid(format!(
                "{} amplitudes for a {}-point grid",
                amplitude.len(),
                grid.len()
            )));
        }
        if amplitude.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(invalid("spin amplitudes must be finite"));
        }
        Ok(Self { grid, amplitude })
    }

    /// Real profile `f(x)` sampled on the grid and normalized.
    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let amps = grid.nodes().iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        Self::from_amplitudes(grid, amps)?.normalized()
    }

    /// `S(x) = 1`, normalized because the weights sum to one.
    pub fn flat(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.len();
        Self { grid, amplitude: vec![Complex64::new(1.0, 0.0); n] }
    }

    /// `S(x) ∝ exp(-αL·x/2)`, normalized.
    pub fn exponential(grid: Arc<SpatialGrid>, alpha_l: f64) -> Result<Self> {
        if !(alpha_l >= 0.0 && alpha_l.is_finite()) {
            return Err(invalid(format!("alpha_L must be >= 0, got {alpha_l}")));
        }
        if alpha_l == 0.0 {
            return Ok(Self::flat(grid));
        }
        Self::from_fn(grid, |x| (-0.5 * alpha_l * x).exp())
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    /// `Σ w_i |S_i|²`, the stored excitation number.
    pub fn norm_sq(&self) -> f64 {
        self.grid.weights().iter().zip(&self.amplitude).map(|(w, a)| w * a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sq();
        if !(norm > 0.0) {
            return Err(invalid("cannot normalize a zero spin wave"));
        }
        let scale = norm.sqrt().recip();
        self.amplitude.iter_mut().for_each(|a| *a *= scale);
        Ok(self)
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.amplitude.iter_mut().for_each(|a| *a *= factor);
        self
    }

    /// Mirror image about the sample centre: the amplitude at `x_i` becomes the
    /// one previously at `1 - x_i`.
    pub fn reverse(&self) -> Result<Self> {
        self.grid.require_symmetric()?;
        let amplitude = self.amplitude.iter().rev().copied().collect();
        Ok(Self { grid: Arc::clone(&self.grid), amplitude })
    }

    /// `|Σ w_i S̄_i T_i|²` between two waves on the same grid.
    pub fn overlap(&self, other: &SpinWave) -> Result<f64> {
        if self.grid != other.grid {
            return Err(crate::Error::IncompatibleGrids);
        }
        let inner: Complex64 = self
            .grid
            .weights()
            .iter()
            .zip(self.amplitude.iter().zip(&other.amplitude))
            .map(|(w, (a, b))| a.conj() * b * w)
            .sum();
        Ok(inner.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, QuadratureRule};
    use proptest::prelude::*;

    fn gl(n: usize) -> Arc<SpatialGrid> {
        Arc::new(make_grid(n, QuadratureRule::GaussLegendre).unwrap())
    }

    #[test]
    fn flat_wave() {
        let g = Arc::new(make_grid(2, QuadratureRule::Midpoint).unwrap());
        let s = SpinWave::flat(g);
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0); 2]);
        assert_eq!(s.norm_sq(), 1.0);
        assert!(SpinWave::flat(gl(64)).is_normalized());
    }

    #[test]
    fn exponential_zero_is_flat() {
        let g = gl(32);
        assert_eq!(SpinWave::exponential(g.clone(), 0.0).unwrap(), SpinWave::flat(g));
    }

    #[test]
    fn exponential_normalization_and_ratio() {
        let s = SpinWave::exponential(gl(512), 10.0 / 3.0).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-10);

        let g = Arc::new(SpatialGrid::custom(vec![1e-9, 0.5, 1.0 - 1e-9], vec![0.25, 0.5, 0.25]).unwrap());
        let s = SpinWave::exponential(g, 2.0).unwrap();
        let ratio = s.amplitudes()[2].re / s.amplitudes()[0].re;
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-8);
        assert!(SpinWave::exponential(gl(8), -1.0).is_err());
    }

    #[test]
    fn reverse_flat_and_exponential() {
        let g = gl(64);
        let flat = SpinWave::flat(g.clone());
        assert_eq!(flat.reverse().unwrap(), flat);
        let e = SpinWave::exponential(g, 2.0).unwrap();
        let r = e.reverse().unwrap();
        assert!(r.amplitudes().windows(2).all(|p| p[1].re > p[0].re));
        assert_eq!(r.reverse().unwrap(), e);
    }

    #[test]
    fn reverse_requires_symmetric_grid() {
        let g = Arc::new(SpatialGrid::custom(vec![0.1, 0.5], vec![0.3, 0.7]).unwrap());
        let s = SpinWave::flat(g);
        assert!(matches!(s.reverse(), Err(crate::Error::UnsupportedGrid(_))));
    }

    #[test]
    fn amplitude_count_must_match_grid() {
        assert!(SpinWave::from_amplitudes(gl(4), vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    proptest! {
        #[test]
        fn exponential_always_normalized(alpha in 0.0f64..50.0, n in 2usize..200) {
            let s = SpinWave::exponential(gl(n), alpha).unwrap();
            prop_assert!(s.is_normalized());
        }

        #[test]
        fn reverse_is_an_involution(re in proptest::collection::vec(-5.0f64..5.0, 16),
                                    im in proptest::collection::vec(-5.0f64..5.0, 16)) {
            let amps = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let s = SpinWave::from_amplitudes(gl(16), amps).unwrap();
            prop_assert_eq!(s.reverse().unwrap().reverse().unwrap(), s);
        }
    }
}
