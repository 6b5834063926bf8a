//! Statistics of a single-electron laser whose electron jumps back to the
//! upper level through a constant-potential battery.
//!
//! The jump process is an ordinary renewal process. Its waiting-time density,
//! Laplace transforms and spectral density are available in closed form
//! ([`analytics`]), the underlying two-level amplitudes are in [`dynamics`]
//! together with an adaptive Runge–Kutta integrator used as an independent
//! check, Monte Carlo estimators live in [`renewal`], and [`design`] maps the
//! rate-level description onto a physical quantum well and resonator.
//!
//! Everything except [`design`] is unit-agnostic: any consistent time unit
//! works. [`design`] is strictly SI.

pub mod analytics;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod params;
pub mod quadrature;
pub mod renewal;
pub mod validation;

pub use analytics::{ClosedLoopNoise, OperatingPoint, SpectralCurve, SpectralKind};
pub use design::{CavityDesign, SteadyRoot, SteadyState};
pub use dynamics::{AmplitudeState, AmplitudeTrajectory, TwoLevelSystem};
pub use error::{Error, Result};
pub use grid::{FrequencyGrid, GridSpacing};
pub use params::{DampingRegime, Derived, PhysicalConstants, RateParams};
pub use renewal::{EventLaw, EventTrajectory, FanoEstimate, WaitingTimeSampler};

/// Version tag written into every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;
