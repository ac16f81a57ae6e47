//! Inverse problem and projection: fit the source efficiency and strength
//! from a measured squeezing/anti-squeezing pair, decompose the loss budget,
//! and project the injected squeezing through additional loss.
//!
//! Two equivalent source models are fitted. The pure-state model maps
//! `(eta, r)` onto `eta e^(-+2r) + (1 - eta)`; the OPO model maps `(eta, x)`
//! onto `1 -+ eta 4x / (1 +- x)^2`. At zero Fourier frequency both describe
//! a lossy minimum-uncertainty state, so they recover the same efficiency.

use crate::error::{Error, Result};
use crate::quadrature::{
    compose_efficiencies, variance_to_db, DecibelLevel, Efficiency, QuadraturePair,
};

/// Which source model a fit used, and how to read its strength parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Strength is the squeezing factor `r`.
    PureState,
    /// Strength is the normalized pump amplitude `x`.
    Opo,
}

/// Result of a two-level fit: total efficiency, model strength, and the
/// worst relative mismatch when the fitted pair is pushed back through the
/// forward model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub eta: Efficiency,
    pub model: FitModel,
    pub strength: f64,
    pub residual: f64,
}

impl FitResult {
    /// Total optical power loss `1 - eta`.
    pub fn loss(&self) -> f64 {
        self.eta.loss()
    }

    /// Squeezed variance of the underlying lossless state.
    pub fn pure_v_sq(&self) -> f64 {
        match self.model {
            FitModel::PureState => (-2.0 * self.strength).exp(),
            FitModel::Opo => {
                let ratio = (1.0 - self.strength) / (1.0 + self.strength);
                ratio * ratio
            }
        }
    }
}

/// Ordered, named chain of power-efficiency factors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossBudget {
    entries: Vec<(String, Efficiency)>,
}

impl LossBudget {
    pub fn new() -> Self {
        LossBudget::default()
    }

    pub fn push(&mut self, name: impl Into<String>, eta: Efficiency) {
        self.entries.push((name.into(), eta));
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut budget = LossBudget::new();
        for (name, eta) in pairs {
            budget.push(name, Efficiency::new(eta)?);
        }
        Ok(budget)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Efficiency)> {
        self.entries.iter()
    }

    /// Product of all entries; an empty budget has no defined throughput.
    pub fn total_efficiency(&self) -> Result<Efficiency> {
        let chain: Vec<Efficiency> = self.entries.iter().map(|(_, e)| *e).collect();
        compose_efficiencies(&chain)
    }

    /// Illustrative decomposition of the extra loss expected between source
    /// and detector output port: mode matching to the signal-recycling
    /// cavity, input Faraday isolator, dielectric coatings, photodiode
    /// quantum efficiency. Placeholder numbers, fully overridable.
    pub fn default_injection_budget() -> Self {
        let mut b = LossBudget::new();
        let e = |x| Efficiency::new(x).expect("static budget entries are valid");
        b.push("mode_matching", e(0.95));
        b.push("faraday_isolator", e(0.98));
        b.push("dielectric_coatings", e(0.99));
        b.push("photodiode", e(0.97));
        b
    }
}

/// Forward pure-state model: the dB levels a lossy minimum-uncertainty
/// state with squeezing factor `r` shows behind efficiency `eta`.
pub fn forward_levels(eta: Efficiency, r: f64) -> (DecibelLevel, DecibelLevel) {
    let pair = QuadraturePair::pure(r)
        .expect("finite r gives positive variances")
        .apply_loss(eta);
    pair.to_db()
}

fn validated_variances(sq_db: f64, anti_db: f64) -> Result<(f64, f64)> {
    if sq_db == 0.0 && anti_db == 0.0 {
        return Err(Error::UnderdeterminedFit);
    }
    if !(sq_db < 0.0) || !(anti_db > 0.0) || !sq_db.is_finite() || !anti_db.is_finite() {
        return Err(Error::InvalidLevelPair { sq_db, anti_db });
    }
    Ok((
        DecibelLevel::new(sq_db)?.variance(),
        DecibelLevel::new(anti_db)?.variance(),
    ))
}

// Guard on the eta <= 1 bound; measured pairs within a few fp ulps of a
// pure state are accepted as eta = 1.
const ETA_GUARD: f64 = 1e-12;

/// Fits `(eta, r)` so `eta e^(-+2r) + (1 - eta)` matches both measured
/// levels. Closed form: the two equations combine to
/// `eta = (1 - V_sq)(V_anti - 1) / (V_sq + V_anti - 2)`.
pub fn fit_eta_r(sq_db: f64, anti_db: f64) -> Result<FitResult> {
    let (v_sq, v_anti) = validated_variances(sq_db, anti_db)?;
    let denom = v_sq + v_anti - 2.0;
    let numer = (1.0 - v_sq) * (v_anti - 1.0);
    if denom <= 0.0 {
        return Err(Error::DegeneratePair {
            eta: if denom == 0.0 { f64::NAN } else { numer / denom },
        });
    }
    let eta = numer / denom;
    if eta > 1.0 + ETA_GUARD {
        return Err(Error::NonphysicalPair {
            product: v_sq * v_anti,
        });
    }
    let eta = eta.min(1.0);
    if eta <= 0.0 {
        return Err(Error::DegeneratePair { eta });
    }
    let r = 0.25 * ((v_anti - (1.0 - eta)) / (v_sq - (1.0 - eta))).ln();
    let eta = Efficiency::new(eta)?;
    let residual = fit_residual(eta, (-2.0 * r).exp(), v_sq, v_anti);
    Ok(FitResult {
        eta,
        model: FitModel::PureState,
        strength: r,
        residual,
    })
}

/// Fits `(eta, x)` so `1 -+ eta 4x / (1 +- x)^2` matches both measured
/// levels. The depth ratio fixes `x` alone:
/// `(1 - V_sq) / (V_anti - 1) = ((1 - x)/(1 + x))^2`.
pub fn fit_eta_x(sq_db: f64, anti_db: f64) -> Result<FitResult> {
    let (v_sq, v_anti) = validated_variances(sq_db, anti_db)?;
    let s = ((1.0 - v_sq) / (v_anti - 1.0)).sqrt();
    let x = (1.0 - s) / (1.0 + s);
    if x <= 0.0 {
        return Err(Error::DegeneratePair { eta: f64::NAN });
    }
    let one_plus = (1.0 + x) * (1.0 + x);
    let eta = (1.0 - v_sq) * one_plus / (4.0 * x);
    if eta > 1.0 + ETA_GUARD {
        return Err(Error::NonphysicalPair {
            product: v_sq * v_anti,
        });
    }
    let eta = Efficiency::new(eta.min(1.0))?;
    let ratio = (1.0 - x) / (1.0 + x);
    let residual = fit_residual(eta, ratio * ratio, v_sq, v_anti);
    Ok(FitResult {
        eta,
        model: FitModel::Opo,
        strength: x,
        residual,
    })
}

/// Worst relative mismatch of the forward model against the measured
/// variances.
fn fit_residual(eta: Efficiency, pure_v_sq: f64, v_sq: f64, v_anti: f64) -> f64 {
    let e = eta.eta();
    let model_sq = e * pure_v_sq + (1.0 - e);
    let model_anti = e / pure_v_sq + (1.0 - e);
    let r1 = ((model_sq - v_sq) / v_sq).abs();
    let r2 = ((model_anti - v_anti) / v_anti).abs();
    r1.max(r2)
}

/// Squeezing available for injection once the diagnostic detector's own
/// efficiency is taken back out of the fitted total: the remaining chain is
/// `eta / eta_bhd`, re-applied to the lossless state.
///
/// The BHD factor is part of the fitted total, so it cannot be smaller than
/// the total itself.
pub fn project_injected(fit: &FitResult, eta_bhd: Efficiency) -> Result<DecibelLevel> {
    let eta_total = fit.eta.eta();
    if eta_bhd.eta() < eta_total {
        return Err(Error::InconsistentBudget {
            eta_bhd: eta_bhd.eta(),
            eta_total,
        });
    }
    let eta_remaining = (eta_total / eta_bhd.eta()).min(1.0);
    let v = eta_remaining * fit.pure_v_sq() + (1.0 - eta_remaining);
    variance_to_db(v)
}

/// Detected squeezing after the injected state passes the extra loss budget.
pub fn project_detector(injected: DecibelLevel, extra: &LossBudget) -> Result<DecibelLevel> {
    let eta = extra.total_efficiency()?.eta();
    let v = eta * injected.variance() + (1.0 - eta);
    variance_to_db(v)
}

/// Laser-power increase equivalent to a shot-noise improvement of the given
/// depth: `10^(dB/10)`.
pub fn equivalent_power_factor(improvement_db: f64) -> Result<f64> {
    if !(improvement_db >= 0.0) || !improvement_db.is_finite() {
        return Err(Error::NegativeImprovement(improvement_db));
    }
    Ok(10f64.powf(improvement_db / 10.0))
}
