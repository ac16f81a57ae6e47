//! Model of a cavity-based squeezed-vacuum light source and its homodyne
//! detection and control chain.
//!
//! The crate is organized around shot-noise-normalized quadrature variances
//! (vacuum = 1, 0 dB):
//!
//! - [`quadrature`] — variance algebra: dB conversion, loss channels,
//!   readout projection, phase-jitter averaging
//! - [`cavity`] — linear resonator optics: finesse, FSR, linewidth, complex
//!   Airy response, birefringent co-resonance offsets
//! - [`opo`] — sub-threshold parametric oscillator: gain and
//!   squeezing/anti-squeezing spectra
//! - [`control`] — locking error signals (PDH, pump phase, LO phase) and
//!   residual-jitter propagation
//! - [`detection`] — balanced homodyne efficiency, dark-noise bookkeeping,
//!   spectrum synthesis
//! - [`budget`] — loss-budget inference from measured levels and projection
//!   of the injected squeezing
//!
//! All operations are pure functions over immutable values and safe to call
//! concurrently.

// negated comparisons like `!(x > 0.0)` are deliberate NaN guards in input
// validation throughout the crate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod cavity;
pub mod control;
pub mod detection;
pub mod error;
pub mod opo;
pub mod quadrature;

pub use budget::{
    equivalent_power_factor, fit_eta_r, fit_eta_x, forward_levels, project_detector,
    project_injected, FitModel, FitResult, LossBudget,
};
pub use cavity::{CavityMode, CavityParams, CavityResponse, Segment, SPEED_OF_LIGHT};
pub use control::{
    lo_phase_error, lo_phase_sweep, loop_suppression, pdh_error, pdh_sweep, pump_phase_error,
    pump_phase_sweep, residual_jitter, DemodHarmonic, ErrorSignalTrace, LoopConfig,
    PhaseNoiseModel,
};
pub use detection::{
    add_dark_noise, correct_apparent_level, synthesize_spectrum, HomodyneParams, MainsSpec,
    SpectrumSet, SpectrumTrace, MAINS_FREQUENCIES_HZ,
};
pub use error::{Error, Result};
pub use opo::{parametric_gain, pump_amplitude_for_gain, GainBranch, OpoParams};
pub use quadrature::{
    compose_efficiencies, variance_to_db, DecibelLevel, Efficiency, QuadraturePair,
};
