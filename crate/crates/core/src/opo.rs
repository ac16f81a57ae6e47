//! Sub-threshold optical parametric oscillator: classical parametric gain
//! and the frequency-dependent squeezing spectrum at the resonator output.
//!
//! The pump enters only through the normalized amplitude
//! `x = sqrt(P / P_threshold)`; the cavity enters through the amplitude decay
//! rate `gamma = pi * FWHM`. Single mode, no pump depletion, pump assumed
//! perfectly phase matched and non-resonant.

use crate::error::{Error, Result};
use crate::quadrature::{Efficiency, QuadraturePair};

/// Which classical gain branch of the parametric interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainBranch {
    /// Seed in phase with the pump: `G = 1 / (1 - x)^2`.
    Amplification,
    /// Seed in quadrature: `G = 1 / (1 + x)^2`.
    Deamplification,
}

/// Classical parametric (de-)amplification factor at zero Fourier frequency.
pub fn parametric_gain(x: f64, branch: GainBranch) -> Result<f64> {
    validate_x(x)?;
    Ok(match branch {
        GainBranch::Amplification => 1.0 / ((1.0 - x) * (1.0 - x)),
        GainBranch::Deamplification => 1.0 / ((1.0 + x) * (1.0 + x)),
    })
}

/// Inverse of the amplification branch: the `x` producing gain `g`.
pub fn pump_amplitude_for_gain(g: f64) -> Result<f64> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::GainBelowUnity(g));
    }
    Ok(1.0 - 1.0 / g.sqrt())
}

fn validate_x(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::AboveThreshold(x));
    }
    Ok(())
}

/// Operating point of the parametric oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoParams {
    x: f64,
    gamma: f64,
    eta_esc: Efficiency,
}

impl OpoParams {
    /// `x` in `[0, 1)`, `gamma` in rad/s (`pi * FWHM`), escape efficiency in `[0, 1]`.
    pub fn new(x: f64, gamma: f64, eta_esc: Efficiency) -> Result<Self> {
        validate_x(x)?;
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidDecayRate(gamma));
        }
        Ok(OpoParams { x, gamma, eta_esc })
    }

    /// Builds the operating point from pump and threshold power,
    /// `x = sqrt(P / P_th)`.
    pub fn from_pump_power(
        power_w: f64,
        threshold_w: f64,
        gamma: f64,
        eta_esc: Efficiency,
    ) -> Result<Self> {
        if !(power_w >= 0.0) || !(threshold_w > 0.0) {
            return Err(Error::InvalidPumpPower {
                power_w,
                threshold_w,
            });
        }
        OpoParams::new((power_w / threshold_w).sqrt(), gamma, eta_esc)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta_esc(&self) -> Efficiency {
        self.eta_esc
    }

    /// Output quadrature variances at Fourier angular frequency `omega`:
    ///
    /// `v_-+(omega) = 1 -+ eta_esc * 4x / ((1 +- x)^2 + (omega/gamma)^2)`
    pub fn squeezing_spectrum(&self, omega: f64) -> QuadraturePair {
        let eta = self.eta_esc.eta();
        let s2 = (omega / self.gamma) * (omega / self.gamma);
        let one_plus = (1.0 + self.x) * (1.0 + self.x);
        let one_minus = (1.0 - self.x) * (1.0 - self.x);
        let v_sq = 1.0 - eta * 4.0 * self.x / (one_plus + s2);
        let v_anti = 1.0 + eta * 4.0 * self.x / (one_minus + s2);
        QuadraturePair::new(v_sq, v_anti)
            .expect("spectrum variances are positive for x < 1")
            .at_frequency(omega / (2.0 * std::f64::consts::PI))
    }

    /// Spectrum at a Fourier frequency given in Hz.
    pub fn spectrum_at(&self, f_hz: f64) -> QuadraturePair {
        self.squeezing_spectrum(2.0 * std::f64::consts::PI * f_hz)
    }

    /// Maximum relative deviation of the squeezed variance across the band.
    ///
    /// `v_sq` is monotone in `|omega|`, so the extremes sit at the band
    /// edges. Valid only well inside the cavity linewidth
    /// (`f_hi <= gamma / (2 pi * 10)`).
    pub fn audio_band_flatness(&self, band: (f64, f64)) -> Result<f64> {
        let (f_lo, f_hi) = band;
        if !(f_lo >= 0.0) || !(f_hi >= f_lo) {
            return Err(Error::InvalidBand { lo: f_lo, hi: f_hi });
        }
        let limit = self.gamma / (2.0 * std::f64::consts::PI * 10.0);
        if f_hi > limit {
            return Err(Error::BandOutsideValidity { f_hi, limit });
        }
        let v_lo = self.spectrum_at(f_lo).v_sq();
        let v_hi = self.spectrum_at(f_hi).v_sq();
        Ok((v_hi - v_lo).abs() / v_lo.min(v_hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geo_gamma() -> f64 {
        // 52 MHz FWHM of the squeezing resonator
        std::f64::consts::PI * 51.94e6
    }

    #[test]
    fn gain_examples() {
        assert_eq!(parametric_gain(0.0, GainBranch::Amplification).unwrap(), 1.0);
        assert_eq!(parametric_gain(0.5, GainBranch::Amplification).unwrap(), 4.0);
        assert_relative_eq!(
            parametric_gain(0.5, GainBranch::Deamplification).unwrap(),
            1.0 / 2.25,
            max_relative = 1e-15
        );
        assert!(parametric_gain(1.0, GainBranch::Amplification).is_err());
        assert!(parametric_gain(-0.1, GainBranch::Amplification).is_err());
    }

    #[test]
    fn gain_inversion_round_trip() {
        let x = pump_amplitude_for_gain(10.0).unwrap();
        assert_relative_eq!(x, 1.0 - 1.0 / 10f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(x, 0.6838, epsilon = 1e-4);
        let g = parametric_gain(x, GainBranch::Amplification).unwrap();
        assert_relative_eq!(g, 10.0, max_relative = 1e-12);
        assert!(pump_amplitude_for_gain(0.5).is_err());
    }

    #[test]
    fn pump_power_mapping() {
        let p = OpoParams::from_pump_power(8.75e-3, 35e-3, geo_gamma(), Efficiency::ONE).unwrap();
        assert_relative_eq!(p.x(), 0.5, max_relative = 1e-15);
        assert!(OpoParams::from_pump_power(40e-3, 35e-3, geo_gamma(), Efficiency::ONE).is_err());
        assert!(OpoParams::from_pump_power(1e-3, 0.0, geo_gamma(), Efficiency::ONE).is_err());
    }

    #[test]
    fn pump_off_gives_vacuum_everywhere() {
        let p = OpoParams::new(0.0, geo_gamma(), Efficiency::ONE).unwrap();
        for &f in &[0.0, 1e3, 1e6, 1e9] {
            let q = p.spectrum_at(f);
            assert_eq!((q.v_sq(), q.v_anti()), (1.0, 1.0));
        }
    }

    #[test]
    fn zero_frequency_is_minimum_uncertainty_for_unit_escape() {
        for &x in &[0.1, 0.5, 0.68, 0.9, 0.99] {
            let p = OpoParams::new(x, geo_gamma(), Efficiency::ONE).unwrap();
            let q = p.squeezing_spectrum(0.0);
            // cancellation in 1 - 4x/(1+x)^2 limits precision near threshold
            assert_relative_eq!(q.uncertainty_product(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn geo_operating_point_reproduces_measured_levels() {
        // x and total efficiency from the level fit; chain folded into eta_esc
        let p = OpoParams::new(
            0.680146,
            geo_gamma(),
            Efficiency::new(0.906978).unwrap(),
        )
        .unwrap();
        let (sq, anti) = p.spectrum_at(100.0).to_db();
        assert_relative_eq!(sq.db(), -9.0, epsilon = 1e-3);
        assert_relative_eq!(anti.db(), 14.0, epsilon = 1e-3);
    }

    #[test]
    fn spectrum_even_and_decaying() {
        let p = OpoParams::new(0.68, geo_gamma(), Efficiency::ONE).unwrap();
        for &om in &[1e5, 1e7, 1e8] {
            let plus = p.squeezing_spectrum(om);
            let minus = p.squeezing_spectrum(-om);
            assert_eq!(plus.v_sq(), minus.v_sq());
            assert_eq!(plus.v_anti(), minus.v_anti());
        }
        let far = p.squeezing_spectrum(1e13);
        assert_relative_eq!(far.v_sq(), 1.0, epsilon = 1e-6);
        assert_relative_eq!(far.v_anti(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn stronger_pump_deepens_both_quadratures() {
        let gamma = geo_gamma();
        let mut last_sq = f64::INFINITY;
        let mut last_anti = 0.0;
        for i in 1..20 {
            let x = i as f64 * 0.05;
            let q = OpoParams::new(x, gamma, Efficiency::ONE)
                .unwrap()
                .squeezing_spectrum(0.3 * gamma);
            assert!(q.v_sq() < last_sq);
            assert!(q.v_anti() > last_anti);
            last_sq = q.v_sq();
            last_anti = q.v_anti();
        }
    }

    #[test]
    fn escape_efficiency_is_a_loss_channel() {
        // eta_esc < 1 equals a beam splitter after a unit-escape resonator
        let gamma = geo_gamma();
        let eta = Efficiency::new(0.83).unwrap();
        let lossy = OpoParams::new(0.62, gamma, eta).unwrap();
        let pure = OpoParams::new(0.62, gamma, Efficiency::ONE).unwrap();
        for i in 0..200 {
            let om = i as f64 * 0.02 * gamma;
            let a = lossy.squeezing_spectrum(om);
            let b = pure.squeezing_spectrum(om).apply_loss(eta);
            assert_relative_eq!(a.v_sq(), b.v_sq(), max_relative = 1e-12);
            assert_relative_eq!(a.v_anti(), b.v_anti(), max_relative = 1e-12);
        }
    }

    #[test]
    fn audio_band_is_flat() {
        let p = OpoParams::new(
            0.680146,
            geo_gamma(),
            Efficiency::new(0.906978).unwrap(),
        )
        .unwrap();
        let dev = p.audio_band_flatness((10.0, 1e4)).unwrap();
        assert!(dev < 1e-6, "flatness {dev} exceeds 1e-6");
        assert_eq!(p.audio_band_flatness((100.0, 100.0)).unwrap(), 0.0);
    }

    #[test]
    fn flatness_band_validity() {
        let p = OpoParams::new(0.68, geo_gamma(), Efficiency::ONE).unwrap();
        assert!(matches!(
            p.audio_band_flatness((10.0, 1e9)),
            Err(Error::BandOutsideValidity { .. })
        ));
        assert!(p.audio_band_flatness((1e4, 10.0)).is_err());
    }

    #[test]
    fn half_depth_at_gamma_for_small_pump() {
        // at omega = gamma the squeezing depth 1 - v_sq falls to half its
        // zero-frequency value in the small-x limit
        let p = OpoParams::new(1e-3, geo_gamma(), Efficiency::ONE).unwrap();
        let depth0 = 1.0 - p.squeezing_spectrum(0.0).v_sq();
        let depth_g = 1.0 - p.squeezing_spectrum(p.gamma()).v_sq();
        assert_relative_eq!(depth_g / depth0, 0.5, epsilon = 1e-3);
    }
}
