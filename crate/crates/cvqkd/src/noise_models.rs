//! Added-noise assembly per trust model.
//!
//! The channel-referred total χ_tot = χ_line + χ_het/T is the same for every
//! model; the models differ only in how noise is apportioned between the
//! channel term (Eve's) and the detection term (Bob's calibrated apparatus).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise_budget::NoiseBudget;
use crate::params::{DetectorParams, ModelKind};

/// Added noises entering the covariance-matrix key-rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AddedNoise {
    /// Channel added noise, channel-input referred.
    pub chi_line: f64,
    /// Detection added noise, Bob-input referred.
    pub chi_het: f64,
    /// χ_line + χ_het / T.
    pub chi_tot: f64,
    pub model: ModelKind,
    pub t_used: f64,
}

/// Effective excess noise once the trusted part is removed from the total:
/// ξ_tot^T = ξ_tot − ξ_error^T/T.
pub fn trusted_excess_noise(xi_tot: f64, xi_error_t: f64, t: f64) -> Result<f64> {
    let trusted_channel_referred = xi_error_t / t;
    if xi_tot < trusted_channel_referred {
        return Err(Error::InconsistentBudget(format!(
            "trusted part xi_error_t/T = {trusted_channel_referred} exceeds xi_tot = {xi_tot}"
        )));
    }
    Ok(xi_tot - trusted_channel_referred)
}

/// Detection added noise of an ideal-calibration heterodyne detector,
/// Bob-referred: (2 − η + 2·v_el)/η.
pub fn detector_added_noise(detector: &DetectorParams) -> f64 {
    (2.0 - detector.eta + 2.0 * detector.v_el) / detector.eta
}

/// Assembles χ_line, χ_het, χ_tot for the requested trust model.
pub fn added_noise(
    budget: &NoiseBudget,
    detector: &DetectorParams,
    t: f64,
    model: ModelKind,
) -> Result<AddedNoise> {
    if t <= 0.0 || t > 1.0 {
        return Err(Error::Domain(format!(
            "transmittance must be in (0, 1] (got {t})"
        )));
    }
    let loss = 1.0 / t - 1.0;
    let chi_det = detector_added_noise(detector);
    // The total is model-invariant; computing it once from the conventional
    // grouping keeps it bitwise identical across models.
    let chi_tot = loss + budget.xi_tot + chi_det / t;
    let (chi_line, chi_het) = match model {
        ModelKind::Conventional => (loss + budget.xi_tot, chi_det),
        ModelKind::Trusted => {
            let xi_tot_trusted = trusted_excess_noise(budget.xi_tot, budget.xi_error_t, t)?;
            (loss + xi_tot_trusted, chi_det + budget.xi_error_t)
        }
        ModelKind::AllErrorTrusted => {
            // The whole channel-referred error noise moves behind the detector,
            // scaled by T the same way the trusted split refers xi_error_t.
            let chi_line = loss + budget.xi_tot - budget.xi_error;
            if chi_line < loss {
                return Err(Error::InconsistentBudget(format!(
                    "error noise xi_error = {} exceeds xi_tot = {}",
                    budget.xi_error, budget.xi_tot
                )));
            }
            (
                chi_line,
                chi_det + t * budget.xi_error_u + budget.xi_error_t,
            )
        }
    };
    Ok(AddedNoise {
        chi_line,
        chi_het,
        chi_tot,
        model,
        t_used: t,
    })
}
