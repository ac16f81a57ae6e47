//! Balanced homodyne detector model: detection efficiency from fringe
//! visibility and photodiode quantum efficiency, electronic dark-noise
//! bookkeeping, and synthesis of measured-style noise spectra.

use crate::error::{Error, Result};
use crate::quadrature::{variance_to_db, DecibelLevel, Efficiency, QuadraturePair};

/// Parameters of the diagnostic balanced homodyne detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneParams {
    lo_power_w: f64,
    visibility: f64,
    pd_quantum_efficiency: f64,
    dark_clearance_db: f64,
}

impl HomodyneParams {
    /// `dark_clearance_db` is how far shot noise sits above the electronic
    /// dark noise; `f64::INFINITY` models a noiseless readout.
    pub fn new(
        lo_power_w: f64,
        visibility: f64,
        pd_quantum_efficiency: f64,
        dark_clearance_db: f64,
    ) -> Result<Self> {
        if !(lo_power_w > 0.0) || !lo_power_w.is_finite() {
            return Err(Error::InvalidLoPower(lo_power_w));
        }
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::EfficiencyOutOfRange(visibility));
        }
        if !(0.0..=1.0).contains(&pd_quantum_efficiency) {
            return Err(Error::EfficiencyOutOfRange(pd_quantum_efficiency));
        }
        if dark_clearance_db.is_nan() {
            return Err(Error::NonFiniteDecibel(dark_clearance_db));
        }
        Ok(HomodyneParams {
            lo_power_w,
            visibility,
            pd_quantum_efficiency,
            dark_clearance_db,
        })
    }

    pub fn lo_power_w(&self) -> f64 {
        self.lo_power_w
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn pd_quantum_efficiency(&self) -> f64 {
        self.pd_quantum_efficiency
    }

    pub fn dark_clearance_db(&self) -> f64 {
        self.dark_clearance_db
    }

    /// `eta_det = visibility^2 * pd_quantum_efficiency`.
    pub fn detection_efficiency(&self) -> Efficiency {
        Efficiency::new(self.visibility * self.visibility * self.pd_quantum_efficiency)
            .expect("product of [0,1] factors stays in [0,1]")
    }
}

/// Adds the uncorrelated electronic noise floor to a shot-normalized
/// variance: `v + 10^(-clearance/10)`.
pub fn add_dark_noise(v: f64, clearance_db: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::NonPositiveVariance(v));
    }
    Ok(v + dark_variance(clearance_db))
}

/// Removes the dark-noise contribution from an *apparent* level measured
/// relative to the (equally contaminated) shot-noise trace, returning the
/// optical level. Inverse of the bookkeeping in [`synthesize_spectrum`]:
/// with `d = 10^(-clearance/10)`, solves
/// `(v_true + d) / (1 + d) = 10^(apparent/10)` for `v_true`.
pub fn correct_apparent_level(
    apparent_rel_db: DecibelLevel,
    clearance_db: f64,
) -> Result<DecibelLevel> {
    let d = dark_variance(clearance_db);
    let v_true = (1.0 + d) * apparent_rel_db.variance() - d;
    if v_true <= 0.0 {
        return Err(Error::DarkNoiseExceedsSignal {
            apparent_db: apparent_rel_db.db(),
            clearance_db,
        });
    }
    variance_to_db(v_true)
}

fn dark_variance(clearance_db: f64) -> f64 {
    10f64.powf(-clearance_db / 10.0)
}

/// One synthesized trace: `(frequency_hz, level_db)` samples with strictly
/// increasing frequencies, plus metadata: label, grid resolution, and the
/// frequencies flagged as synthetic artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub label: String,
    pub samples: Vec<(f64, f64)>,
    pub points_per_decade: u32,
    pub artifact_frequencies_hz: Vec<f64>,
}

impl SpectrumTrace {
    pub fn level_at(&self, f_hz: f64) -> Option<f64> {
        self.samples
            .iter()
            .find(|(f, _)| (f - f_hz).abs() <= 1e-9 * f_hz.abs().max(1.0))
            .map(|&(_, db)| db)
    }
}

/// Synthetic mains-hum artifact request: peaks inserted at 50 and 100 Hz,
/// raised by `peak_db` above the local trace level and flagged as artifacts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainsSpec {
    pub peak_db: f64,
}

/// Frequencies the mains artifacts are pinned to.
pub const MAINS_FREQUENCIES_HZ: [f64; 2] = [50.0, 100.0];

/// The three traces of a homodyne measurement: shot-noise reference,
/// squeezed and anti-squeezed quadratures, on a common frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    pub shot: SpectrumTrace,
    pub squeezed: SpectrumTrace,
    pub anti_squeezed: SpectrumTrace,
}

impl SpectrumSet {
    pub fn len(&self) -> usize {
        self.shot.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shot.samples.is_empty()
    }

    /// Comma-separated records with one `#`-prefixed parameter header line
    /// and a column header; columns exactly
    /// `frequency_hz,shot_db,squeezed_db,antisqueezed_db`.
    pub fn to_csv(&self, params_echo: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {params_echo}\n"));
        out.push_str("frequency_hz,shot_db,squeezed_db,antisqueezed_db\n");
        for i in 0..self.len() {
            let (f, shot) = self.shot.samples[i];
            let (_, sq) = self.squeezed.samples[i];
            let (_, anti) = self.anti_squeezed.samples[i];
            out.push_str(&format!("{f:.6e},{shot:.9e},{sq:.9e},{anti:.9e}\n"));
        }
        out
    }
}

/// Synthesizes the three-trace spectrum over a log-spaced band.
///
/// Per frequency the source pair passes through the detection efficiency,
/// then the electronic dark noise is added; the shot trace is exactly 0 dB
/// before the dark-noise step. `points_per_decade` sets the grid density;
/// both band edges are always on the grid.
pub fn synthesize_spectrum<S>(
    source: S,
    homodyne: &HomodyneParams,
    band: (f64, f64),
    points_per_decade: u32,
    mains: Option<MainsSpec>,
) -> Result<SpectrumSet>
where
    S: Fn(f64) -> QuadraturePair,
{
    let (f_lo, f_hi) = band;
    if !(f_lo > 0.0) || !(f_hi > f_lo) || !f_hi.is_finite() {
        return Err(Error::InvalidBand { lo: f_lo, hi: f_hi });
    }
    if points_per_decade == 0 {
        return Err(Error::InvalidPointsPerDecade);
    }
    let decades = (f_hi / f_lo).log10();
    let n = ((decades * points_per_decade as f64).round() as usize).max(1);
    let mut frequencies: Vec<f64> = (0..=n)
        .map(|i| f_lo * (f_hi / f_lo).powf(i as f64 / n as f64))
        .collect();
    // pin the edges against accumulated rounding
    frequencies[0] = f_lo;
    frequencies[n] = f_hi;

    let mut artifacts = Vec::new();
    if mains.is_some() {
        for f0 in MAINS_FREQUENCIES_HZ {
            if f0 >= f_lo && f0 <= f_hi {
                // snap a grid point within rounding distance onto the exact
                // mains line, otherwise insert a new row
                if let Some(f) = frequencies
                    .iter_mut()
                    .find(|f| (**f - f0).abs() <= 1e-9 * f0)
                {
                    *f = f0;
                } else {
                    let pos = frequencies.partition_point(|&f| f < f0);
                    frequencies.insert(pos, f0);
                }
                artifacts.push(f0);
            }
        }
    }

    let eta_det = homodyne.detection_efficiency();
    let clearance = homodyne.dark_clearance_db();
    let mut shot = Vec::with_capacity(frequencies.len());
    let mut squeezed = Vec::with_capacity(frequencies.len());
    let mut anti = Vec::with_capacity(frequencies.len());
    for &f in &frequencies {
        let detected = source(f).apply_loss(eta_det);
        let shot_v = add_dark_noise(1.0, clearance)?;
        let sq_v = add_dark_noise(detected.v_sq(), clearance)?;
        let anti_v = add_dark_noise(detected.v_anti(), clearance)?;
        let bump = match mains {
            Some(m) if artifacts.contains(&f) => m.peak_db,
            _ => 0.0,
        };
        shot.push((f, variance_to_db(shot_v)?.db() + bump));
        squeezed.push((f, variance_to_db(sq_v)?.db() + bump));
        anti.push((f, variance_to_db(anti_v)?.db() + bump));
    }

    let trace = |label: &str, samples: Vec<(f64, f64)>| SpectrumTrace {
        label: label.to_string(),
        samples,
        points_per_decade,
        artifact_frequencies_hz: artifacts.clone(),
    };
    Ok(SpectrumSet {
        shot: trace("shot", shot),
        squeezed: trace("squeezed", squeezed),
        anti_squeezed: trace("anti_squeezed", anti),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opo::OpoParams;
    use crate::quadrature::Efficiency;
    use approx::assert_relative_eq;

    fn geo_homodyne(clearance_db: f64) -> HomodyneParams {
        HomodyneParams::new(500e-6, 0.986, 0.977, clearance_db).unwrap()
    }

    #[test]
    fn detection_efficiency_examples() {
        let ideal = HomodyneParams::new(500e-6, 1.0, 1.0, 17.0).unwrap();
        assert_eq!(ideal.detection_efficiency().eta(), 1.0);
        assert_relative_eq!(
            geo_homodyne(17.0).detection_efficiency().eta(),
            0.950,
            epsilon = 5e-4
        );
        let vis_only = HomodyneParams::new(500e-6, 0.986, 1.0, 17.0).unwrap();
        assert_relative_eq!(vis_only.detection_efficiency().eta(), 0.972, epsilon = 5e-4);
    }

    #[test]
    fn homodyne_validation() {
        assert!(HomodyneParams::new(0.0, 0.9, 0.9, 17.0).is_err());
        assert!(HomodyneParams::new(1e-3, 1.1, 0.9, 17.0).is_err());
        assert!(HomodyneParams::new(1e-3, 0.9, -0.1, 17.0).is_err());
        assert!(HomodyneParams::new(1e-3, 0.9, 0.9, f64::NAN).is_err());
        // infinite clearance means noiseless electronics
        assert!(HomodyneParams::new(1e-3, 0.9, 0.9, f64::INFINITY).is_ok());
    }

    #[test]
    fn dark_noise_reference_points() {
        assert_eq!(add_dark_noise(0.5, f64::INFINITY).unwrap(), 0.5);
        let shot = add_dark_noise(1.0, 17.0).unwrap();
        assert_relative_eq!(shot, 1.0200, epsilon = 1e-4);
        assert_relative_eq!(10.0 * shot.log10(), 0.0858, epsilon = 1e-4);
        let sq = add_dark_noise(0.1259, 17.0).unwrap();
        assert_relative_eq!(sq, 0.1459, epsilon = 1e-4);
        assert_relative_eq!(10.0 * sq.log10(), -8.36, epsilon = 1e-2);
        assert!(add_dark_noise(0.0, 17.0).is_err());
    }

    #[test]
    fn dark_noise_strictly_increases_and_commutes() {
        for &v in &[0.01, 0.5, 1.0, 25.0] {
            let one = add_dark_noise(v, 17.0).unwrap();
            assert!(one > v);
            // two additions equal one with the combined power
            let twice = add_dark_noise(one, 17.0).unwrap();
            let combined_db = -10.0 * (2.0 * 10f64.powf(-1.7)).log10();
            let direct = add_dark_noise(v, combined_db).unwrap();
            assert_relative_eq!(twice, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn apparent_level_correction() {
        // -9 dB measured against a dark-contaminated shot trace hides
        // deeper optical squeezing
        let corrected =
            correct_apparent_level(DecibelLevel::new(-9.0).unwrap(), 17.0).unwrap();
        assert_relative_eq!(corrected.db(), -9.6476, epsilon = 1e-3);
        // apparent level at the dark floor is not invertible
        assert!(correct_apparent_level(DecibelLevel::new(-17.1).unwrap(), 17.0).is_err());
    }

    #[test]
    fn efficiency_before_dark_noise_order_contract() {
        // optical loss acts on the optical variance only; the composed
        // closed form is eta (v - 1) + 1 + d
        let h = geo_homodyne(17.0);
        let eta = h.detection_efficiency().eta();
        let d = 10f64.powf(-1.7);
        let v = 0.036;
        let chained =
            add_dark_noise(QuadraturePair::new(v, 1.0 / v).unwrap().apply_loss(h.detection_efficiency()).v_sq(), 17.0)
                .unwrap();
        assert_relative_eq!(chained, eta * (v - 1.0) + 1.0 + d, max_relative = 1e-12);
        // swapping the order would instead give eta (v + d - 1) + 1
        let swapped = QuadraturePair::new(add_dark_noise(v, 17.0).unwrap(), 1.0 / v)
            .unwrap()
            .apply_loss(h.detection_efficiency())
            .v_sq();
        assert!((chained - swapped).abs() > 1e-4);
    }

    #[test]
    fn vacuum_source_collapses_to_shot() {
        let set = synthesize_spectrum(
            |_| QuadraturePair::vacuum(),
            &geo_homodyne(17.0),
            (10.0, 1e4),
            10,
            None,
        )
        .unwrap();
        for i in 0..set.len() {
            assert_eq!(set.shot.samples[i].1, set.squeezed.samples[i].1);
            assert_eq!(set.shot.samples[i].1, set.anti_squeezed.samples[i].1);
        }
    }

    #[test]
    fn geo_spectrum_levels_before_dark_noise() {
        // lumped source+propagation efficiency ahead of the homodyne
        // detector; the chain product equals the fitted total 0.90698
        let eta_det = 0.986f64 * 0.986 * 0.977;
        let opo = OpoParams::new(
            0.680146,
            std::f64::consts::PI * 51.94e6,
            Efficiency::new(0.9069778327 / eta_det).unwrap(),
        )
        .unwrap();
        let set = synthesize_spectrum(
            |f| opo.spectrum_at(f),
            &geo_homodyne(f64::INFINITY),
            (10.0, 1e4),
            25,
            None,
        )
        .unwrap();
        for (f, db) in &set.squeezed.samples {
            assert_relative_eq!(*db, -9.0, epsilon = 2e-3);
            assert!(*f >= 10.0 && *f <= 1e4);
        }
        for (_, db) in &set.anti_squeezed.samples {
            assert_relative_eq!(*db, 14.0, epsilon = 2e-3);
        }
        for (_, db) in &set.shot.samples {
            assert_eq!(*db, 0.0);
        }
    }

    #[test]
    fn shot_trace_with_dark_noise_is_flat() {
        let set = synthesize_spectrum(
            |_| QuadraturePair::vacuum(),
            &geo_homodyne(17.0),
            (10.0, 1e4),
            50,
            None,
        )
        .unwrap();
        let expected = 10.0 * (1.0 + 10f64.powf(-1.7)).log10();
        for (_, db) in &set.shot.samples {
            assert!((db - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_row_count() {
        let set = synthesize_spectrum(
            |_| QuadraturePair::vacuum(),
            &geo_homodyne(17.0),
            (10.0, 1e4),
            50,
            None,
        )
        .unwrap();
        assert_eq!(set.len(), 151);
        assert_eq!(set.shot.samples[0].0, 10.0);
        assert_eq!(set.shot.samples[150].0, 1e4);
    }

    #[test]
    fn mains_artifacts_inserted_and_flagged() {
        let set = synthesize_spectrum(
            |_| QuadraturePair::vacuum(),
            &geo_homodyne(17.0),
            (10.0, 1e4),
            50,
            Some(MainsSpec { peak_db: 10.0 }),
        )
        .unwrap();
        assert_eq!(set.shot.artifact_frequencies_hz, vec![50.0, 100.0]);
        // 50 Hz is off-grid and inserted; 100 Hz is a grid point and snapped
        assert_eq!(set.len(), 152);
        let base = 10.0 * (1.0 + 10f64.powf(-1.7)).log10();
        for f0 in MAINS_FREQUENCIES_HZ {
            let level = set.shot.level_at(f0).unwrap();
            assert_relative_eq!(level, base + 10.0, max_relative = 1e-9);
        }
        // frequencies stay strictly increasing
        for w in set.shot.samples.windows(2) {
            assert!(w[0].0 < w[1].0);
        }
    }

    #[test]
    fn csv_columns() {
        let set = synthesize_spectrum(
            |_| QuadraturePair::vacuum(),
            &geo_homodyne(17.0),
            (10.0, 100.0),
            5,
            None,
        )
        .unwrap();
        let csv = set.to_csv("band_hz=10:100 points_per_decade=5");
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with('#'));
        assert_eq!(
            lines.next().unwrap(),
            "frequency_hz,shot_db,squeezed_db,antisqueezed_db"
        );
        assert_eq!(lines.count(), 6);
    }

    #[test]
    fn band_validation() {
        let h = geo_homodyne(17.0);
        assert!(synthesize_spectrum(|_| QuadraturePair::vacuum(), &h, (0.0, 1e3), 10, None).is_err());
        assert!(synthesize_spectrum(|_| QuadraturePair::vacuum(), &h, (1e3, 10.0), 10, None).is_err());
        assert!(synthesize_spectrum(|_| QuadraturePair::vacuum(), &h, (10.0, 1e3), 0, None).is_err());
    }
}
