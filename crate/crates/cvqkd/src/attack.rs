//! Phase-reference intensity attack and the real-time-monitoring countermeasure.
//!
//! Eve routes the reference pulse through lower-loss fiber, raising its
//! intensity at Bob and shrinking the true trusted part of the phase noise by
//! ξ_attack, which she spends as extra attack noise ξ_attack/T on the signal
//! while Bob's measured total stays constant.

use serde::Serialize;

use crate::error::Result;
use crate::noise_budget::NoiseBudget;
use crate::noise_models::{added_noise, detector_added_noise, AddedNoise};
use crate::params::{DetectorParams, ModelKind};

/// Relative intensity deviation above which the monitor raises the alarm.
pub const DEFAULT_ALARM_THRESHOLD: f64 = 0.10;

/// Loss coefficients of the standard fiber and of Eve's replacement fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackParams {
    pub alpha_std: f64,
    pub alpha_low: f64,
}

impl AttackParams {
    pub fn new(alpha_std: f64, alpha_low: f64) -> Self {
        Self {
            alpha_std,
            alpha_low,
        }
    }

    pub fn is_valid(&self) -> bool {
        0.0 <= self.alpha_low && self.alpha_low <= self.alpha_std
    }

    /// Intensity gain 10^((α_std − α_low)·L/10) of the rerouted reference.
    fn gain(&self, distance_km: f64) -> f64 {
        10f64.powf((self.alpha_std - self.alpha_low) * distance_km / 10.0)
    }
}

/// Reference intensity at Bob under attack: E_R²·10^((α_std − α_low)·L/10).
pub fn attack_reference_intensity(e_r2_bob: f64, atk: &AttackParams, distance_km: f64) -> f64 {
    e_r2_bob * atk.gain(distance_km)
}

/// Attack noise budget ξ_attack = ξ_error^T·(1 − 10^(−(α_std − α_low)·L/10)),
/// the reduction of the trusted part Eve gains from the brighter reference.
pub fn attack_noise(xi_error_t: f64, atk: &AttackParams, distance_km: f64) -> f64 {
    xi_error_t * (1.0 - 1.0 / atk.gain(distance_km))
}

/// Trusted-model added noises under the intensity attack.
///
/// `monitored = true`: Bob recalibrates the trusted part with the observed
/// intensity E_R_attack², so the channel carries ξ_attack/T and the detection
/// term keeps only ξ_error^T − ξ_attack; χ_tot is unchanged versus no attack.
///
/// `monitored = false`: Bob keeps the stale calibration and computes exactly
/// the no-attack trusted noises, overstating the key relative to the
/// monitored truth. Diagnostic only; callers should label it insecure.
pub fn added_noise_under_attack(
    budget: &NoiseBudget,
    detector: &DetectorParams,
    t: f64,
    atk: &AttackParams,
    distance_km: f64,
    monitored: bool,
) -> Result<AddedNoise> {
    let stale = added_noise(budget, detector, t, ModelKind::Trusted)?;
    if !monitored {
        return Ok(stale);
    }
    let xi_attack = attack_noise(budget.xi_error_t, atk, distance_km);
    let chi_line = stale.chi_line + xi_attack / t;
    let chi_het = detector_added_noise(detector) + budget.xi_error_t - xi_attack;
    // the attack only shifts noise between the two terms; the total is the
    // no-attack total
    Ok(AddedNoise {
        chi_line,
        chi_het,
        chi_tot: stale.chi_tot,
        model: ModelKind::Trusted,
        t_used: t,
    })
}

/// Intensity-fluctuation alarm: flags an observed reference intensity that
/// deviates from the calibrated value by more than `rel_threshold`.
pub fn intensity_alarm(calibrated_e_r2: f64, observed_e_r2: f64, rel_threshold: f64) -> bool {
    (observed_e_r2 - calibrated_e_r2).abs() > rel_threshold * calibrated_e_r2
}
