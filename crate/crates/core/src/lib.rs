//! Kinetic simulation and wave-pattern analysis for the bipolar
//! Vlasov-Poisson-Boltzmann system in one space and three velocity dimensions.
//!
//! The state is the pair `F1 = (FA + FB)/2`, `F2 = (FA - FB)/2` on an
//! `(x, v1, v2, v3)` tensor grid, evolved by
//!
//! ```text
//! F1_t + v1 F1_x + Π_x ∂_{v1} F2 = 2 Q(F1, F1)
//! F2_t + v1 F2_x + Π_x ∂_{v1} F1 = 2 Q(F2, F1)
//! Π_xx = 2 ∫ F2 dv
//! ```
//!
//! with the gas constant fixed to `R = 2/3`.

pub mod collision;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod field_poisson;
pub mod kinetic_solver;
pub mod maxwellian_projection;
pub mod phase_space;
pub mod wave_patterns;

pub use error::{Result, VpbError};
pub use maxwellian_projection::{ChiBasis, FluidState, GlobalReference};
pub use phase_space::{DistributionField, RawMoments, SpaceGrid, VelocityGrid};

/// Gas constant of the monatomic gas after renormalization.
pub const GAS_CONSTANT: f64 = 2.0 / 3.0;
