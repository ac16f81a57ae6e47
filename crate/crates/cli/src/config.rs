//! Config file schema and resolution.
//!
//! Configs are TOML with sections mirroring the model layers (`cavity.*`,
//! `opo`, `homodyne`, `loops.*`, `phase_noise`, `budget`, `fit`, `spectrum`).
//! `--config` accepts a filesystem path, a bare scenario name resolved
//! against `$SQUEEZER_SIM_CONFIG_DIR`, or the built-in `geo600` scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use squeezer_core::{
    CavityMode, CavityParams, DemodHarmonic, Efficiency, HomodyneParams, LoopConfig, LossBudget,
    OpoParams, PhaseNoiseModel, Segment,
};

/// Environment variable naming the default config directory for bare
/// scenario names.
pub const CONFIG_DIR_ENV: &str = "SQUEEZER_SIM_CONFIG_DIR";

/// The shipped scenario, compiled in so the binary runs out of the box.
pub const BUILTIN_GEO600: &str = include_str!("../configs/geo600.cfg");

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(path: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub cavity: BTreeMap<String, CavityBlock>,
    pub opo: OpoBlock,
    pub homodyne: HomodyneBlock,
    #[serde(default)]
    pub loops: BTreeMap<String, LoopBlock>,
    #[serde(default)]
    pub phase_noise: Option<PhaseNoiseBlock>,
    #[serde(default)]
    pub control_beam: Option<ControlBeamBlock>,
    pub budget: BudgetBlock,
    pub fit: FitBlock,
    pub spectrum: SpectrumBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityBlock {
    pub r1: f64,
    pub r2: f64,
    pub round_trip_loss: f64,
    pub mode: String,
    pub wavelength_m: f64,
    pub segments: Vec<SegmentBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentBlock {
    pub length_m: f64,
    pub refractive_index: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpoBlock {
    /// Normalized pump amplitude; fitted from the measured level pair.
    pub x: f64,
    /// Lumped escape and propagation efficiency ahead of the homodyne.
    pub eta_esc: f64,
    /// Which `[cavity.*]` block sets the decay rate.
    pub cavity: String,
    #[serde(default)]
    pub pump_power_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomodyneBlock {
    pub lo_power_w: f64,
    pub visibility: f64,
    pub pd_quantum_efficiency: f64,
    pub dark_clearance_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopBlock {
    pub unity_gain_frequency_hz: f64,
    pub filter_slope: u32,
    pub modulation_frequency_hz: f64,
    pub demod_harmonic: u32,
    pub demod_phase_rad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseNoiseBlock {
    /// `white` or `white_flicker`.
    pub model: String,
    pub level_rad_per_sqrt_hz: f64,
    #[serde(default)]
    pub corner_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBeamBlock {
    pub offset_hz: f64,
    pub power_w: f64,
    #[serde(default)]
    pub p_pol_offset_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetBlock {
    pub bhd_efficiency: f64,
    #[serde(default)]
    pub extra: Vec<BudgetEntry>,
    #[serde(default)]
    pub extra_loss_scenarios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetEntry {
    pub name: String,
    pub eta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    pub sq_db: f64,
    pub anti_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub band_hz: [f64; 2],
    pub points_per_decade: u32,
    pub mains: bool,
    pub mains_peak_db: f64,
}

impl RunConfig {
    /// Resolves `--config`: an existing path wins, then
    /// `$SQUEEZER_SIM_CONFIG_DIR/<name>[.cfg]`, then the built-in scenario.
    pub fn resolve(spec: &str) -> Result<(RunConfig, String), ConfigError> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| err(spec, format!("cannot read: {e}")))?;
            return Ok((Self::parse(&text)?, spec.to_string()));
        }
        if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
            for candidate in [
                PathBuf::from(&dir).join(spec),
                PathBuf::from(&dir).join(format!("{spec}.cfg")),
            ] {
                if candidate.is_file() {
                    let text = std::fs::read_to_string(&candidate)
                        .map_err(|e| err(spec, format!("cannot read: {e}")))?;
                    return Ok((Self::parse(&text)?, candidate.display().to_string()));
                }
            }
        }
        if spec == "geo600" {
            return Ok((Self::parse(BUILTIN_GEO600)?, "builtin:geo600".to_string()));
        }
        Err(err(
            spec,
            format!("not a file, not found under ${CONFIG_DIR_ENV}, and not a built-in scenario"),
        ))
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn cavity(&self, name: &str) -> Result<CavityParams, ConfigError> {
        let block = self
            .cavity
            .get(name)
            .ok_or_else(|| err(&format!("cavity.{name}"), "no such cavity block"))?;
        let mode = match block.mode.as_str() {
            "standing" => CavityMode::StandingWave,
            "traveling" => CavityMode::TravelingWave,
            other => {
                return Err(err(
                    &format!("cavity.{name}.mode"),
                    format!("expected 'standing' or 'traveling', got '{other}'"),
                ))
            }
        };
        let segments = block
            .segments
            .iter()
            .map(|s| Segment::new(s.length_m, s.refractive_index))
            .collect::<squeezer_core::Result<Vec<_>>>()
            .map_err(|e| err(&format!("cavity.{name}.segments"), e))?;
        CavityParams::new(block.r1, block.r2, block.round_trip_loss, segments, mode)
            .map_err(|e| err(&format!("cavity.{name}"), e))
    }

    pub fn cavity_wavelength(&self, name: &str) -> Result<f64, ConfigError> {
        self.cavity
            .get(name)
            .map(|b| b.wavelength_m)
            .ok_or_else(|| err(&format!("cavity.{name}"), "no such cavity block"))
    }

    /// The OPO operating point, with gamma derived from the referenced
    /// cavity's linewidth.
    pub fn opo_params(&self) -> Result<OpoParams, ConfigError> {
        let cavity = self.cavity(&self.opo.cavity)?;
        let fwhm = cavity
            .linewidth_fwhm()
            .map_err(|e| err("opo.cavity", e))?;
        let gamma = std::f64::consts::PI * fwhm;
        let eta = Efficiency::new(self.opo.eta_esc).map_err(|e| err("opo.eta_esc", e))?;
        OpoParams::new(self.opo.x, gamma, eta).map_err(|e| err("opo", e))
    }

    pub fn homodyne_params(&self) -> Result<HomodyneParams, ConfigError> {
        HomodyneParams::new(
            self.homodyne.lo_power_w,
            self.homodyne.visibility,
            self.homodyne.pd_quantum_efficiency,
            self.homodyne.dark_clearance_db,
        )
        .map_err(|e| err("homodyne", e))
    }

    pub fn loop_config(&self, name: &str) -> Result<LoopConfig, ConfigError> {
        let block = self
            .loops
            .get(name)
            .ok_or_else(|| err(&format!("loops.{name}"), "no such loop block"))?;
        let harmonic = DemodHarmonic::from_index(block.demod_harmonic)
            .map_err(|e| err(&format!("loops.{name}.demod_harmonic"), e))?;
        LoopConfig::new(
            block.unity_gain_frequency_hz,
            block.filter_slope,
            block.modulation_frequency_hz,
            harmonic,
            block.demod_phase_rad,
        )
        .map_err(|e| err(&format!("loops.{name}"), e))
    }

    pub fn phase_noise_model(&self) -> Result<Option<PhaseNoiseModel>, ConfigError> {
        match &self.phase_noise {
            None => Ok(None),
            Some(block) => {
                let model = match block.model.as_str() {
                    "white" => PhaseNoiseModel::White {
                        level: block.level_rad_per_sqrt_hz,
                    },
                    "white_flicker" => PhaseNoiseModel::WhiteWithFlickerCorner {
                        level: block.level_rad_per_sqrt_hz,
                        corner_hz: block.corner_hz.ok_or_else(|| {
                            err("phase_noise.corner_hz", "required for model 'white_flicker'")
                        })?,
                    },
                    other => {
                        return Err(err(
                            "phase_noise.model",
                            format!("expected 'white' or 'white_flicker', got '{other}'"),
                        ))
                    }
                };
                Ok(Some(model))
            }
        }
    }

    pub fn extra_budget(&self) -> Result<LossBudget, ConfigError> {
        LossBudget::from_pairs(
            self.budget
                .extra
                .iter()
                .map(|e| (e.name.clone(), e.eta)),
        )
        .map_err(|e| err("budget.extra", e))
    }

    pub fn bhd_efficiency(&self) -> Result<Efficiency, ConfigError> {
        Efficiency::new(self.budget.bhd_efficiency).map_err(|e| err("budget.bhd_efficiency", e))
    }

    /// Deterministic re-serialization of the parsed config for provenance
    /// echoes in reports.
    pub fn echo_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("<unserializable config: {e}>"))
    }
}
