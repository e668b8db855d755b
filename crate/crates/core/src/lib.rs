//! Spin-wave shaping and retrieval efficiencies for heralded single photons
//! emitted by Λ-type atomic ensembles.
//!
//! All numerics run in dimensionless units: positions are `x = z/L`, times
//! are `γ_eg·t` and Rabi frequencies are `Ω/γ_eg`. Physical units only show
//! up in [`AtomicEnsemble`], [`PulseSpec`] and the helpers in [`units`].
//!
//! Spin waves are stored in a single frame: `amplitude[i]` is the spin
//! amplitude at `z = x_i·L`, the write control field enters at `z = 0`, and
//! backward retrieval emits through the same `z = 0` face. Forward retrieval
//! exits at `z = L`.

// `!(x > 0.0)` style checks are kept so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
mod error;
pub mod grid;
pub mod kernel;
pub mod pulse;
pub mod specfun;
pub mod spin;
pub mod units;
pub mod write;

pub use ensemble::AtomicEnsemble;
pub use error::{Error, Result};
pub use grid::{make_grid, QuadratureRule, SpatialGrid};
pub use kernel::{EfficiencyReport, RetrievalKernel};
pub use pulse::{Direction, PulseShape, PulseSpec, SampledPulse};
pub use spin::SpinWave;
