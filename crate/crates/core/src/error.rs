//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors for the squeezer model.
///
/// Variants are grouped by the module that raises them; all are physics- or
/// validation-level conditions, never I/O.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // quadrature algebra
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("decibel level must be finite, got {0}")]
    NonFiniteDecibel(f64),
    #[error("efficiency must lie in [0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("cannot compose an empty efficiency chain")]
    EmptyEfficiencyChain,
    #[error("phase jitter must be non-negative, got {0} rad")]
    NegativePhaseJitter(f64),

    // cavity optics
    #[error("power reflectivity {name} must lie in (0, 1], got {value}")]
    InvalidReflectivity { name: &'static str, value: f64 },
    #[error("round-trip loss must lie in [0, 1), got {0}")]
    InvalidRoundTripLoss(f64),
    #[error("at least one mirror must be partially transmissive")]
    NoTransmissiveMirror,
    #[error("cavity needs at least one path segment")]
    EmptySegments,
    #[error("segment must have length > 0 and index >= 1, got ({length_m} m, n={index})")]
    InvalidSegment { length_m: f64, index: f64 },
    #[error("round-trip amplitude reaches unity; finesse diverges")]
    LosslessPerfectCavity,
    #[error("path difference {delta_m} m exceeds the one-way optical path {path_m} m")]
    PathDifferenceTooLarge { delta_m: f64, path_m: f64 },
    #[error("wavelength must be positive, got {0} m")]
    InvalidWavelength(f64),

    // OPO
    #[error("normalized pump amplitude must satisfy 0 <= x < 1, got {0} (above threshold)")]
    AboveThreshold(f64),
    #[error("cavity decay rate must be positive, got {0} rad/s")]
    InvalidDecayRate(f64),
    #[error("pump and threshold power must be non-negative/positive, got P={power_w} W, P_th={threshold_w} W")]
    InvalidPumpPower { power_w: f64, threshold_w: f64 },
    #[error("gain must be >= 1 to invert, got {0}")]
    GainBelowUnity(f64),
    #[error("band upper edge {f_hi} Hz exceeds validity limit {limit} Hz")]
    BandOutsideValidity { f_hi: f64, limit: f64 },

    // control loops
    #[error("loop config field {field} is out of range: {value}")]
    InvalidLoopConfig { field: &'static str, value: f64 },
    #[error("modulation index must lie in (0, 1], got {0}")]
    InvalidModulationIndex(f64),
    #[error("error signal carries no phase discrimination")]
    NoDiscrimination,
    #[error("phase-noise model is not integrable over the band (non-finite at {frequency} Hz)")]
    NonIntegrableNoise { frequency: f64 },
    #[error("frequency band [{lo}, {hi}] Hz is invalid")]
    InvalidBand { lo: f64, hi: f64 },

    // detection chain
    #[error("local oscillator power must be positive, got {0} W")]
    InvalidLoPower(f64),
    #[error("points per decade must be >= 1")]
    InvalidPointsPerDecade,
    #[error("apparent level {apparent_db} dB lies at or below the dark-noise floor for {clearance_db} dB clearance")]
    DarkNoiseExceedsSignal { apparent_db: f64, clearance_db: f64 },

    // budget inference
    #[error("expected squeezed level < 0 dB < anti-squeezed level, got ({sq_db}, {anti_db})")]
    InvalidLevelPair { sq_db: f64, anti_db: f64 },
    #[error("measured pair is purer than the uncertainty bound allows (variance product {product} < 1)")]
    NonphysicalPair { product: f64 },
    #[error("measured pair implies a non-positive efficiency ({eta})")]
    DegeneratePair { eta: f64 },
    #[error("vacuum input leaves the fit underdetermined")]
    UnderdeterminedFit,
    #[error("BHD efficiency {eta_bhd} cannot be smaller than the fitted total {eta_total}")]
    InconsistentBudget { eta_bhd: f64, eta_total: f64 },
    #[error("improvement must be >= 0 dB, got {0}")]
    NegativeImprovement(f64),
}
