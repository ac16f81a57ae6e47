//! Quadrature-variance algebra.
//!
//! All variances are linear and shot-noise normalized: the vacuum state has
//! variance 1 in every quadrature (0 dB). Decibels appear only at the I/O
//! boundary; internal arithmetic stays in linear shot units.

use crate::error::{Error, Result};

/// Relative slack on the uncertainty product `v_sq * v_anti >= 1`,
/// a pure floating-point guard.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Power efficiency of a passive channel, in `[0, 1]`.
///
/// A loss `l` enters as `Efficiency::new(1.0 - l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency(f64);

impl Efficiency {
    /// Lossless channel.
    pub const ONE: Efficiency = Efficiency(1.0);

    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::EfficiencyOutOfRange(eta));
        }
        Ok(Efficiency(eta))
    }

    pub fn eta(self) -> f64 {
        self.0
    }

    /// Power loss `1 - eta`.
    pub fn loss(self) -> f64 {
        1.0 - self.0
    }
}

impl std::ops::Mul for Efficiency {
    type Output = Efficiency;

    fn mul(self, rhs: Efficiency) -> Efficiency {
        // product of values in [0,1] stays in [0,1]
        Efficiency(self.0 * rhs.0)
    }
}

/// Serial composition of power efficiencies: the product of all entries.
/// Order-independent; an empty chain has no defined throughput.
pub fn compose_efficiencies(chain: &[Efficiency]) -> Result<Efficiency> {
    if chain.is_empty() {
        return Err(Error::EmptyEfficiencyChain);
    }
    Ok(chain.iter().copied().fold(Efficiency::ONE, |acc, e| acc * e))
}

/// Relative noise power in dB, `10 * log10` of a linear variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecibelLevel(f64);

impl DecibelLevel {
    pub fn new(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::NonFiniteDecibel(db));
        }
        Ok(DecibelLevel(db))
    }

    pub fn db(self) -> f64 {
        self.0
    }

    /// Back to linear variance: `10^(db/10)`.
    pub fn variance(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }
}

/// `10 * log10(v)`; the inverse of [`DecibelLevel::variance`].
pub fn variance_to_db(v: f64) -> Result<DecibelLevel> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::NonPositiveVariance(v));
    }
    DecibelLevel::new(10.0 * v.log10())
}

/// Squeezed/anti-squeezed quadrature variances at one Fourier frequency.
///
/// The constructor normalizes the canonical ordering `v_sq <= v_anti`.
/// Every operation in this crate preserves `v_sq * v_anti >= 1` (up to
/// [`UNCERTAINTY_TOL`]) for states it produces; externally supplied pairs
/// are only checked for positivity, since measured levels may be rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePair {
    v_sq: f64,
    v_anti: f64,
    frequency_hz: Option<f64>,
}

impl QuadraturePair {
    pub fn new(v_sq: f64, v_anti: f64) -> Result<Self> {
        if !(v_sq > 0.0) || !v_sq.is_finite() {
            return Err(Error::NonPositiveVariance(v_sq));
        }
        if !(v_anti > 0.0) || !v_anti.is_finite() {
            return Err(Error::NonPositiveVariance(v_anti));
        }
        let (v_sq, v_anti) = if v_sq <= v_anti {
            (v_sq, v_anti)
        } else {
            (v_anti, v_sq)
        };
        Ok(QuadraturePair {
            v_sq,
            v_anti,
            frequency_hz: None,
        })
    }

    /// Vacuum (shot-noise) state.
    pub fn vacuum() -> Self {
        QuadraturePair {
            v_sq: 1.0,
            v_anti: 1.0,
            frequency_hz: None,
        }
    }

    /// Pure minimum-uncertainty state with squeezing factor `r`:
    /// variances `e^(-2r)` and `e^(+2r)`.
    pub fn pure(r: f64) -> Result<Self> {
        QuadraturePair::new((-2.0 * r).exp(), (2.0 * r).exp())
    }

    /// Tags the pair with the Fourier frequency it belongs to.
    pub fn at_frequency(mut self, f_hz: f64) -> Self {
        self.frequency_hz = Some(f_hz);
        self
    }

    pub fn v_sq(&self) -> f64 {
        self.v_sq
    }

    pub fn v_anti(&self) -> f64 {
        self.v_anti
    }

    pub fn frequency_hz(&self) -> Option<f64> {
        self.frequency_hz
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.v_sq * self.v_anti
    }

    /// Beam-splitter loss channel: each variance maps to
    /// `eta * v + (1 - eta)`, the open port contributing vacuum.
    pub fn apply_loss(&self, e: Efficiency) -> QuadraturePair {
        let eta = e.eta();
        QuadraturePair {
            v_sq: eta * self.v_sq + (1.0 - eta),
            v_anti: eta * self.v_anti + (1.0 - eta),
            frequency_hz: self.frequency_hz,
        }
    }

    /// Noise variance read out at quadrature angle `theta` from the squeezed
    /// axis: `v_sq cos^2(theta) + v_anti sin^2(theta)`.
    pub fn project(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.v_sq * c * c + self.v_anti * s * s
    }

    /// Averages the readout over a zero-mean Gaussian phase of standard
    /// deviation `theta_rms` about each quadrature.
    ///
    /// With `w = exp(-2 sigma^2)` the exact Gaussian expectations of
    /// `cos^2`/`sin^2` give
    /// `v'_sq = v_sq (1+w)/2 + v_anti (1-w)/2` and symmetrically for
    /// `v'_anti`; degradation is monotone in `theta_rms`.
    pub fn apply_phase_jitter(&self, theta_rms: f64) -> Result<QuadraturePair> {
        if !(theta_rms >= 0.0) {
            return Err(Error::NegativePhaseJitter(theta_rms));
        }
        let w = (-2.0 * theta_rms * theta_rms).exp();
        let up = 0.5 * (1.0 + w);
        let down = 0.5 * (1.0 - w);
        Ok(QuadraturePair {
            v_sq: self.v_sq * up + self.v_anti * down,
            v_anti: self.v_anti * up + self.v_sq * down,
            frequency_hz: self.frequency_hz,
        })
    }

    /// Both levels in dB, `(squeezed, anti_squeezed)`.
    pub fn to_db(&self) -> (DecibelLevel, DecibelLevel) {
        // variances are positive by construction
        (
            variance_to_db(self.v_sq).expect("positive variance"),
            variance_to_db(self.v_anti).expect("positive variance"),
        )
    }
}
