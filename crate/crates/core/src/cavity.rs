//! Linear two-mirror resonator physics: finesse, free spectral range,
//! linewidth, complex Airy response, and birefringent co-resonance offsets.
//!
//! The model is plane-wave and single longitudinal mode. A cavity is a
//! coupler (`r1`), an end face (`r2`), a lumped round-trip power loss, and an
//! ordered list of path segments defining the one-way optical path.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Resonator topology; decides the round-trip path length entering the FSR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavityMode {
    /// Linear cavity: light traverses the one-way path twice per round trip.
    StandingWave,
    /// Ring cavity: the listed segments already form the full round trip.
    TravelingWave,
}

/// One stretch of intra-cavity path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub length_m: f64,
    pub refractive_index: f64,
}

impl Segment {
    pub fn new(length_m: f64, refractive_index: f64) -> Result<Self> {
        if !(length_m > 0.0) || !(refractive_index >= 1.0) || !refractive_index.is_finite() {
            return Err(Error::InvalidSegment {
                length_m,
                index: refractive_index,
            });
        }
        Ok(Segment {
            length_m,
            refractive_index,
        })
    }

    pub fn optical_length(&self) -> f64 {
        self.length_m * self.refractive_index
    }
}

/// Mirror reflectivities, intra-cavity loss and geometry of a resonator.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    r1: f64,
    r2: f64,
    round_trip_loss: f64,
    segments: Vec<Segment>,
    mode: CavityMode,
}

impl CavityParams {
    pub fn new(
        r1: f64,
        r2: f64,
        round_trip_loss: f64,
        segments: Vec<Segment>,
        mode: CavityMode,
    ) -> Result<Self> {
        if !(r1 > 0.0 && r1 <= 1.0) {
            return Err(Error::InvalidReflectivity {
                name: "r1",
                value: r1,
            });
        }
        if !(r2 > 0.0 && r2 <= 1.0) {
            return Err(Error::InvalidReflectivity {
                name: "r2",
                value: r2,
            });
        }
        if r1 == 1.0 && r2 == 1.0 {
            return Err(Error::NoTransmissiveMirror);
        }
        if !(0.0..1.0).contains(&round_trip_loss) {
            return Err(Error::InvalidRoundTripLoss(round_trip_loss));
        }
        if segments.is_empty() {
            return Err(Error::EmptySegments);
        }
        for s in &segments {
            Segment::new(s.length_m, s.refractive_index)?;
        }
        Ok(CavityParams {
            r1,
            r2,
            round_trip_loss,
            segments,
            mode,
        })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn round_trip_loss(&self) -> f64 {
        self.round_trip_loss
    }

    pub fn mode(&self) -> CavityMode {
        self.mode
    }

    /// Sum of `n_i * L_i` over the listed segments, in m.
    pub fn one_way_optical_path(&self) -> f64 {
        self.segments.iter().map(Segment::optical_length).sum()
    }

    /// Effective round-trip amplitude `rho = sqrt(r1 r2 (1 - loss))`.
    pub fn round_trip_amplitude(&self) -> f64 {
        (self.r1 * self.r2 * (1.0 - self.round_trip_loss)).sqrt()
    }

    /// `F = pi sqrt(rho) / (1 - rho)`.
    pub fn finesse(&self) -> Result<f64> {
        let rho = self.round_trip_amplitude();
        if rho >= 1.0 {
            return Err(Error::LosslessPerfectCavity);
        }
        Ok(std::f64::consts::PI * rho.sqrt() / (1.0 - rho))
    }

    /// Free spectral range: `c / (2 L_opt)` standing-wave,
    /// `c / L_opt` traveling-wave.
    pub fn fsr(&self) -> f64 {
        let path = self.one_way_optical_path();
        match self.mode {
            CavityMode::StandingWave => SPEED_OF_LIGHT / (2.0 * path),
            CavityMode::TravelingWave => SPEED_OF_LIGHT / path,
        }
    }

    /// Full width at half maximum of the resonance, `FSR / F`.
    pub fn linewidth_fwhm(&self) -> Result<f64> {
        Ok(self.fsr() / self.finesse()?)
    }

    /// Complex Airy reflection/transmission at the given detuning from
    /// resonance. Periodic in the FSR.
    pub fn response(&self, detuning_hz: f64) -> CavityResponse {
        let rho1 = self.r1.sqrt();
        let rho2 = self.r2.sqrt();
        let survive = 1.0 - self.round_trip_loss;
        let a = survive.sqrt();
        let phi = 2.0 * std::f64::consts::PI * detuning_hz / self.fsr();
        let e_rt = Complex64::from_polar(1.0, phi);
        let denom = Complex64::new(1.0, 0.0) - rho1 * rho2 * a * e_rt;
        let reflection = (rho2 * a * e_rt - rho1) / denom;
        // one-way propagation: half the round-trip phase, quarter-power loss
        let e_half = Complex64::from_polar(1.0, 0.5 * phi);
        let t_amp = ((1.0 - self.r1) * (1.0 - self.r2)).sqrt() * survive.powf(0.25);
        let transmission = t_amp * e_half / denom;
        let circulating = (1.0 - self.r1).sqrt() / denom;
        CavityResponse {
            detuning_hz,
            reflection,
            transmission,
            circulating,
        }
    }

    /// Frequency shift a second field needs to co-resonate when its one-way
    /// optical path differs by `delta_optical_path_m` (e.g. through crystal
    /// birefringence). Folded to the principal interval `(-FSR/2, FSR/2]`.
    pub fn co_resonance_offset(
        &self,
        delta_optical_path_m: f64,
        wavelength_m: f64,
    ) -> Result<f64> {
        if !(wavelength_m > 0.0) {
            return Err(Error::InvalidWavelength(wavelength_m));
        }
        let path = self.one_way_optical_path();
        if delta_optical_path_m.abs() >= path {
            return Err(Error::PathDifferenceTooLarge {
                delta_m: delta_optical_path_m,
                path_m: path,
            });
        }
        let fsr = self.fsr();
        let raw = -(delta_optical_path_m / wavelength_m) * 2.0 * fsr;
        Ok(fold_to_principal(raw, fsr))
    }

    /// One-way path difference reproducing a measured co-resonance offset;
    /// the smallest-magnitude representative in `(-lambda/4, lambda/4]`.
    pub fn path_difference_for_offset(&self, offset_hz: f64, wavelength_m: f64) -> Result<f64> {
        if !(wavelength_m > 0.0) {
            return Err(Error::InvalidWavelength(wavelength_m));
        }
        let fsr = self.fsr();
        let raw = -offset_hz / (2.0 * fsr) * wavelength_m;
        Ok(fold_to_principal(raw, 0.5 * wavelength_m))
    }

    /// Fraction of a round trip, in rad, that a frequency offset advances the
    /// intra-cavity phase: `2 pi f / FSR`.
    pub fn round_trip_phase(&self, offset_hz: f64) -> f64 {
        2.0 * std::f64::consts::PI * offset_hz / self.fsr()
    }
}

/// Maps `x` into `(-period/2, period/2]`.
fn fold_to_principal(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r > 0.5 * period {
        r - period
    } else {
        r
    }
}

/// Complex field response of the cavity at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityResponse {
    pub detuning_hz: f64,
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// Intra-cavity field just behind the coupler, per unit input.
    pub circulating: Complex64,
}

impl CavityResponse {
    /// `1 - |r|^2 - |t|^2`; zero exactly when the round trip is lossless.
    pub fn absorbed_fraction(&self) -> f64 {
        1.0 - self.reflection.norm_sqr() - self.transmission.norm_sqr()
    }

    /// Intra-cavity power build-up per unit input power.
    pub fn circulating_power_gain(&self) -> f64 {
        self.circulating.norm_sqr()
    }
}
