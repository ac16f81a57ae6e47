//! Error-signal generation for the length, pump-phase and LO-phase locks,
//! plus closed-loop residual-noise propagation into an RMS phase jitter.
//!
//! Error signals are in normalized units: traces are scaled to peak 1 and
//! sign-fixed so the slope through the lock point is positive.

use num_complex::Complex64;

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::opo::OpoParams;

/// Demodulation harmonic of the offset/modulation frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemodHarmonic {
    Fundamental,
    Second,
}

impl DemodHarmonic {
    pub fn from_index(n: u32) -> Result<Self> {
        match n {
            1 => Ok(DemodHarmonic::Fundamental),
            2 => Ok(DemodHarmonic::Second),
            _ => Err(Error::InvalidLoopConfig {
                field: "demod_harmonic",
                value: n as f64,
            }),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            DemodHarmonic::Fundamental => 1,
            DemodHarmonic::Second => 2,
        }
    }
}

/// One feedback loop: servo shape plus RF modulation/demodulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    unity_gain_frequency_hz: f64,
    filter_slope: u32,
    modulation_frequency_hz: f64,
    demod_harmonic: DemodHarmonic,
    demod_phase_rad: f64,
}

impl LoopConfig {
    pub fn new(
        unity_gain_frequency_hz: f64,
        filter_slope: u32,
        modulation_frequency_hz: f64,
        demod_harmonic: DemodHarmonic,
        demod_phase_rad: f64,
    ) -> Result<Self> {
        if !(unity_gain_frequency_hz > 0.0) || !unity_gain_frequency_hz.is_finite() {
            return Err(Error::InvalidLoopConfig {
                field: "unity_gain_frequency_hz",
                value: unity_gain_frequency_hz,
            });
        }
        if filter_slope < 1 {
            return Err(Error::InvalidLoopConfig {
                field: "filter_slope",
                value: filter_slope as f64,
            });
        }
        if !(modulation_frequency_hz > 0.0) || !modulation_frequency_hz.is_finite() {
            return Err(Error::InvalidLoopConfig {
                field: "modulation_frequency_hz",
                value: modulation_frequency_hz,
            });
        }
        Ok(LoopConfig {
            unity_gain_frequency_hz,
            filter_slope,
            modulation_frequency_hz,
            demod_harmonic,
            demod_phase_rad,
        })
    }

    pub fn unity_gain_frequency_hz(&self) -> f64 {
        self.unity_gain_frequency_hz
    }

    pub fn filter_slope(&self) -> u32 {
        self.filter_slope
    }

    pub fn modulation_frequency_hz(&self) -> f64 {
        self.modulation_frequency_hz
    }

    pub fn demod_harmonic(&self) -> DemodHarmonic {
        self.demod_harmonic
    }

    pub fn demod_phase_rad(&self) -> f64 {
        self.demod_phase_rad
    }
}

/// A swept error signal; `samples` pairs the sweep variable (detuning in Hz
/// or phase in rad) with the error value. Positive slope through the lock
/// point, peak normalized to 1 unless the trace is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSignalTrace {
    pub label: String,
    pub samples: Vec<(f64, f64)>,
}

impl ErrorSignalTrace {
    /// Zero crossings with strictly positive local slope.
    pub fn positive_slope_zero_crossings(&self) -> usize {
        self.samples
            .windows(2)
            .filter(|w| w[0].1 < 0.0 && w[1].1 >= 0.0)
            .count()
    }

    /// All sign changes of the error value along the sweep.
    pub fn zero_crossings(&self) -> usize {
        self.samples
            .windows(2)
            .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
            .count()
    }

    pub fn peak(&self) -> f64 {
        self.samples
            .iter()
            .map(|(_, e)| e.abs())
            .fold(0.0, f64::max)
    }
}

/// Pound-Drever-Hall reflection error signal at one detuning.
///
/// `Im{F(d) F*(d+Om) - F*(d) F(d-Om)}` with `F` the complex cavity
/// reflection, scaled by the modulation index; sign chosen so the slope
/// through resonance is positive in the fast-modulation regime
/// (`mod_freq >> FWHM`). Odd in the detuning and periodic in the FSR.
pub fn pdh_error(
    cavity: &CavityParams,
    detuning_hz: f64,
    mod_freq_hz: f64,
    mod_index: f64,
) -> Result<f64> {
    if !(mod_index > 0.0 && mod_index <= 1.0) {
        return Err(Error::InvalidModulationIndex(mod_index));
    }
    let f0 = cavity.response(detuning_hz).reflection;
    let f_plus = cavity.response(detuning_hz + mod_freq_hz).reflection;
    let f_minus = cavity.response(detuning_hz - mod_freq_hz).reflection;
    let beat = f0 * f_plus.conj() - f0.conj() * f_minus;
    Ok(-mod_index * beat.im)
}

/// Pump-phase error from the coherent control sideband.
///
/// A single sideband at `+ccb_offset` enters the resonator; the parametric
/// interaction creates an idler at the mirror frequency, and the reflected
/// beat at twice the offset, demodulated at the second harmonic, gives
/// `error ~ x sin(2 pump_phase + const)`. `pump_phase` is expressed at the
/// fundamental scale (the squeezing-angle convention), so the signal is
/// pi-periodic. Demodulating at the fundamental yields exactly zero: the
/// reflected field has no component there.
pub fn pump_phase_error(
    opo: &OpoParams,
    ccb_offset_hz: f64,
    pump_phase_rad: f64,
    harmonic: DemodHarmonic,
    demod_phase_rad: f64,
) -> f64 {
    if harmonic == DemodHarmonic::Fundamental {
        return 0.0;
    }
    let beat = reflected_sideband_beat(opo, ccb_offset_hz, pump_phase_rad);
    (beat * Complex64::from_polar(1.0, demod_phase_rad)).im
}

/// Coefficient of the `2*Omega` beat in the reflected power for a unit
/// single-sideband input. Units of the cavity decay rate drop out.
fn reflected_sideband_beat(opo: &OpoParams, ccb_offset_hz: f64, pump_phase_rad: f64) -> Complex64 {
    let s = 2.0 * std::f64::consts::PI * ccb_offset_hz / opo.gamma();
    let eps = Complex64::from_polar(opo.x(), 2.0 * pump_phase_rad);
    let lorentz = Complex64::new(1.0, s);
    let denom = lorentz * lorentz - opo.x() * opo.x();
    let coupling = (2.0 * opo.eta_esc().eta()).sqrt();
    // intra-cavity signal and conjugated idler for unit input
    let a_plus = coupling * lorentz / denom;
    let a_minus_conj = coupling * eps.conj() / denom;
    // input-output: reflected signal keeps the promptly reflected input
    let b_plus = coupling * a_plus - 1.0;
    let b_minus_conj = coupling * a_minus_conj;
    b_plus * b_minus_conj
}

/// Homodyne LO-phase error from demodulating the subtracted photocurrents at
/// the control-beam offset: `amplitude * sin(lo_phase - lock_phase + demod_phase)`.
/// Shifting the demodulation phase moves the lock point by the same angle,
/// selecting the squeezed or the anti-squeezed readout quadrature.
pub fn lo_phase_error(
    ccb_amplitude: f64,
    lo_phase_rad: f64,
    lock_phase_rad: f64,
    demod_phase_rad: f64,
) -> Result<f64> {
    if !(ccb_amplitude > 0.0) {
        return Err(Error::NoDiscrimination);
    }
    Ok(ccb_amplitude * (lo_phase_rad - lock_phase_rad + demod_phase_rad).sin())
}

/// Closed-loop noise suppression `|1 / (1 + G(f))|` for a pure
/// integrator-chain servo `G(f) = (UGF/f)^slope * exp(-i pi slope / 2)`.
pub fn loop_suppression(loop_cfg: &LoopConfig, f_hz: f64) -> Result<f64> {
    if !(f_hz > 0.0) {
        return Err(Error::InvalidBand { lo: f_hz, hi: f_hz });
    }
    let slope = loop_cfg.filter_slope;
    let mag = (loop_cfg.unity_gain_frequency_hz / f_hz).powi(slope as i32);
    let phase = -std::f64::consts::FRAC_PI_2 * slope as f64;
    let g = Complex64::from_polar(mag, phase);
    Ok((Complex64::new(1.0, 0.0) + g).norm().recip())
}

/// Points per decade of the deterministic log-grid Simpson rule used by
/// [`residual_jitter`].
pub const JITTER_QUAD_POINTS_PER_DECADE: usize = 512;

/// RMS phase jitter left after the loop suppresses the free-running phase
/// noise `S(f)` (amplitude spectral density in rad/sqrt(Hz)) over the band:
///
/// `theta_rms = sqrt( integral (supp(f) * S(f))^2 df )`
///
/// `None` for the loop means free-running (suppression 1). Integration is
/// composite Simpson on a log-spaced grid with
/// [`JITTER_QUAD_POINTS_PER_DECADE`] intervals per decade (at least 64
/// intervals, count rounded up to even), deterministic for given inputs.
pub fn residual_jitter<F>(noise: F, loop_cfg: Option<&LoopConfig>, band: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (f_lo, f_hi) = band;
    if !(f_lo > 0.0) || !(f_hi > f_lo) || !f_hi.is_finite() {
        return Err(Error::InvalidBand { lo: f_lo, hi: f_hi });
    }
    let decades = (f_hi / f_lo).log10();
    let mut n = ((decades * JITTER_QUAD_POINTS_PER_DECADE as f64).ceil() as usize).max(64);
    if n % 2 == 1 {
        n += 1;
    }
    let log_lo = f_lo.ln();
    let step = (f_hi.ln() - log_lo) / n as f64;
    // substitute f = e^u: integrand becomes (supp*S)^2 * f
    let eval = |i: usize| -> Result<f64> {
        let f = (log_lo + step * i as f64).exp();
        let supp = match loop_cfg {
            Some(l) => loop_suppression(l, f)?,
            None => 1.0,
        };
        let amp = supp * noise(f);
        let v = amp * amp * f;
        if !v.is_finite() {
            return Err(Error::NonIntegrableNoise { frequency: f });
        }
        Ok(v)
    };
    let mut acc = eval(0)? + eval(n)?;
    for i in 1..n {
        acc += eval(i)? * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let integral = acc * step / 3.0;
    Ok(integral.max(0.0).sqrt())
}

/// Synthetic free-running phase-noise models for demos and configs; the
/// shipped defaults are illustrative, not measured spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseNoiseModel {
    /// Flat amplitude spectral density, rad/sqrt(Hz).
    White { level: f64 },
    /// White floor with a 1/f corner: `level * sqrt(1 + corner/f)`.
    WhiteWithFlickerCorner { level: f64, corner_hz: f64 },
}

impl PhaseNoiseModel {
    pub fn amplitude_density(&self, f_hz: f64) -> f64 {
        match *self {
            PhaseNoiseModel::White { level } => level,
            PhaseNoiseModel::WhiteWithFlickerCorner { level, corner_hz } => {
                level * (1.0 + corner_hz / f_hz).sqrt()
            }
        }
    }
}

/// Swept PDH trace over a symmetric detuning range, sign-fixed and
/// peak-normalized.
pub fn pdh_sweep(
    cavity: &CavityParams,
    mod_freq_hz: f64,
    mod_index: f64,
    detuning_range_hz: (f64, f64),
    points: usize,
) -> Result<ErrorSignalTrace> {
    let samples = sweep(detuning_range_hz, points, |d| {
        pdh_error(cavity, d, mod_freq_hz, mod_index)
    })?;
    Ok(finalize_trace("pdh", samples, true))
}

/// Swept pump-phase trace over a full turn of the pump phase.
///
/// A pump at threshold fraction zero produces no idler and therefore no
/// discrimination; that is reported as an error rather than a flat file.
/// Demodulation at the fundamental is allowed and yields the (flat zero)
/// trace it physically produces.
pub fn pump_phase_sweep(
    opo: &OpoParams,
    ccb_offset_hz: f64,
    harmonic: DemodHarmonic,
    demod_phase_rad: f64,
    points: usize,
) -> Result<ErrorSignalTrace> {
    if opo.x() == 0.0 {
        return Err(Error::NoDiscrimination);
    }
    let samples = sweep((0.0, 2.0 * std::f64::consts::PI), points, |phi| {
        Ok(pump_phase_error(opo, ccb_offset_hz, phi, harmonic, demod_phase_rad))
    })?;
    Ok(finalize_trace("pump-phase", samples, false))
}

/// Swept LO-phase trace over a full turn.
pub fn lo_phase_sweep(
    ccb_amplitude: f64,
    lock_phase_rad: f64,
    demod_phase_rad: f64,
    points: usize,
) -> Result<ErrorSignalTrace> {
    let samples = sweep((0.0, 2.0 * std::f64::consts::PI), points, |phi| {
        lo_phase_error(ccb_amplitude, phi, lock_phase_rad, demod_phase_rad)
    })?;
    Ok(finalize_trace("lo-phase", samples, false))
}

fn sweep<F>(range: (f64, f64), points: usize, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = points.max(2);
    let (lo, hi) = range;
    (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            Ok((x, f(x)?))
        })
        .collect()
}

/// Peak-normalizes and, when requested, flips the sign so the zero crossing
/// nearest the sweep center has positive slope.
fn finalize_trace(label: &str, mut samples: Vec<(f64, f64)>, fix_center_slope: bool) -> ErrorSignalTrace {
    let peak = samples.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    if peak > 0.0 {
        if fix_center_slope {
            let center = 0.5 * (samples[0].0 + samples[samples.len() - 1].0);
            let mut best = (f64::INFINITY, 0.0);
            for w in samples.windows(2) {
                if (w[0].1 < 0.0) != (w[1].1 < 0.0) || w[0].1 == 0.0 {
                    let x = 0.5 * (w[0].0 + w[1].0);
                    let slope = w[1].1 - w[0].1;
                    let dist = (x - center).abs();
                    if dist < best.0 {
                        best = (dist, slope);
                    }
                }
            }
            if best.1 < 0.0 {
                for s in &mut samples {
                    s.1 = -s.1;
                }
            }
        }
        for s in &mut samples {
            s.1 /= peak;
        }
    }
    ErrorSignalTrace {
        label: label.to_string(),
        samples,
    }
}
