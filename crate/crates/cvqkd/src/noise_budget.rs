//! Phase-noise variance decomposition, its trusted/untrusted split, and the
//! full excess-noise budget in shot-noise units.
//!
//! All budget components are referred to the channel input except
//! `xi_error_t`, which is referred to Bob's input; the channel-referred error
//! noise is `xi_error = xi_error_u + xi_error_t / T`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DetectorParams, PhaseNoiseMapping, ScenarioConfig};

/// Residual phase variance after compensation, split by origin (rad²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseVariance {
    pub v_drift: f64,
    pub v_channel: f64,
    pub v_error: f64,
    /// Total: v_drift + v_channel + v_error.
    pub v_est: f64,
}

/// Total noise imposed on the phase reference, split into the part Eve can
/// touch and the part set by Bob's calibrated detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceNoise {
    /// χ = χ^u + χ^T/T, channel-referred.
    pub chi_total: f64,
    /// χ^u = 1/T − 1 + ε₀, channel-referred.
    pub chi_untrusted: f64,
    /// χ^T = (2 − η + 2·v_el)/η, Bob-referred.
    pub chi_trusted: f64,
    /// Transmittance used to combine the two parts.
    pub t_used: f64,
}

/// Where the total excess noise came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetSource {
    /// Composed from the hardware terms ξ₀ + ξ_AM + ξ_LE + ξ_ADC + ξ_phase.
    Composed,
    /// A measured ξ_tot was supplied; the hardware remainder ξ_tot − ξ_phase
    /// is recorded as an unattributed lump in `xi0`.
    MeasuredTotal,
}

/// Every excess-noise component (SNU). `xi_error_t` is Bob-referred; all other
/// fields are channel-input referred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub xi0: f64,
    pub xi_am: f64,
    pub xi_le: f64,
    pub xi_adc: f64,
    /// ξ₀ + ξ_AM + ξ_LE + ξ_ADC.
    pub xi_rest: f64,
    pub xi_drift: f64,
    pub xi_channel: f64,
    /// Untrusted part of the reference measurement noise, channel-referred.
    pub xi_error_u: f64,
    /// Trusted part of the reference measurement noise, Bob-referred.
    pub xi_error_t: f64,
    /// ξ_error = ξ_error_u + ξ_error_t / T, channel-referred.
    pub xi_error: f64,
    /// Residual phase noise under the configured mapping.
    pub xi_phase: f64,
    /// ξ_rest + ξ_phase.
    pub xi_tot: f64,
    pub phase_variance: PhaseVariance,
    pub t_used: f64,
    pub source: BudgetSource,
}

/// V_drift = 2π(Δν_A + Δν_B)|t_R − t_S|.
pub fn drift_variance(dnu_a: f64, dnu_b: f64, dt: f64) -> f64 {
    2.0 * std::f64::consts::PI * (dnu_a + dnu_b) * dt
}

/// Total noise on the phase reference and its trusted/untrusted split.
pub fn reference_noise(t: f64, epsilon0: f64, detector: &DetectorParams) -> Result<ReferenceNoise> {
    if t <= 0.0 {
        return Err(Error::Domain(format!(
            "transmittance must be > 0 (got {t})"
        )));
    }
    let chi_untrusted = 1.0 / t - 1.0 + epsilon0;
    let chi_trusted = (2.0 - detector.eta + 2.0 * detector.v_el) / detector.eta;
    Ok(ReferenceNoise {
        chi_total: chi_untrusted + chi_trusted / t,
        chi_untrusted,
        chi_trusted,
        t_used: t,
    })
}

/// Phase-estimation error variance V_error = (χ + 1)/E_R².
pub fn error_variance(ref_noise: &ReferenceNoise, e_r2_bob: f64) -> Result<f64> {
    if e_r2_bob <= 0.0 {
        return Err(Error::Domain(format!(
            "reference intensity must be > 0 (got {e_r2_bob})"
        )));
    }
    Ok((ref_noise.chi_total + 1.0) / e_r2_bob)
}

/// Bundles the three contributions; `v_est` is their sum.
pub fn est_variance(v_drift: f64, v_channel: f64, v_error: f64) -> PhaseVariance {
    PhaseVariance {
        v_drift,
        v_channel,
        v_error,
        v_est: v_drift + v_channel + v_error,
    }
}

/// ξ_phase = 2·V_A·(1 − e^(−V_est/2)).
pub fn phase_noise_exact(v_a: f64, v_est: f64) -> f64 {
    2.0 * v_a * (1.0 - (-v_est / 2.0).exp())
}

/// Small-angle form ξ_phase = V_A·V_est; an upper bound on the exact value.
pub fn phase_noise_linear(v_a: f64, v_est: f64) -> f64 {
    v_a * v_est
}

/// Splits the reference measurement noise: channel-referred untrusted part
/// ξ_error^u = V_A(1 + Tε₀)/(T·E_R²) and Bob-referred trusted part
/// ξ_error^T = V_A(2 − η + 2v_el)/(η·E_R²).
pub fn error_noise_split(
    v_a: f64,
    e_r2_bob: f64,
    t: f64,
    epsilon0: f64,
    detector: &DetectorParams,
) -> Result<(f64, f64)> {
    if t <= 0.0 {
        return Err(Error::Domain(format!(
            "transmittance must be > 0 (got {t})"
        )));
    }
    if e_r2_bob <= 0.0 {
        return Err(Error::Domain(format!(
            "reference intensity must be > 0 (got {e_r2_bob})"
        )));
    }
    let xi_error_u = v_a * (1.0 + t * epsilon0) / (t * e_r2_bob);
    let xi_error_t = v_a * (2.0 - detector.eta + 2.0 * detector.v_el) / (detector.eta * e_r2_bob);
    Ok((xi_error_u, xi_error_t))
}

/// Alice-side reference intensity: the override when present, otherwise the
/// Bob-side intensity back-projected through channel loss only.
pub fn alice_reference_intensity(e_r2_bob: f64, t: f64, override_: Option<f64>) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Domain(format!(
            "transmittance must be > 0 (got {t})"
        )));
    }
    Ok(override_.unwrap_or(e_r2_bob / t))
}

/// Modulation noise ξ_AM = 10·V_A·10^(−d_dB/10), taking the maximal signal
/// amplitude as √(10·V_A).
pub fn modulation_noise(v_a: f64, d_db: f64) -> f64 {
    10.0 * v_a * 10f64.powf(-d_db / 10.0)
}

/// Photon-leakage noise ξ_LE = 2·E_R^A²·10^(−(R_e + R_p)/10), with the two
/// extinction ratios combined in dB.
pub fn leakage_noise(e_r2_alice: f64, r_e_db: f64, r_p_db: f64) -> f64 {
    2.0 * e_r2_alice * 10f64.powf(-(r_e_db + r_p_db) / 10.0)
}

/// ADC quantization noise ξ_ADC = 10·V_A/(12·2^n).
pub fn adc_noise(v_a: f64, n_adc: u32) -> f64 {
    10.0 * v_a / (12.0 * 2f64.powi(n_adc as i32))
}

/// Composes the full excess-noise budget for a scenario.
///
/// When the config carries a measured ξ_tot, that value is recorded directly
/// and only the phase-noise terms are computed; the hardware remainder
/// ξ_tot − ξ_phase is lumped into `xi0`. Otherwise every hardware term is
/// composed from the config.
pub fn total_budget(config: &ScenarioConfig) -> Result<NoiseBudget> {
    let t = crate::params::transmittance(&config.channel);
    let v_a = config.modulation.v_a;
    let r = &config.reference;

    let ref_noise = reference_noise(t, config.channel.epsilon0, &config.detector)?;
    let v_drift = drift_variance(r.dnu_a, r.dnu_b, r.dt);
    let v_error = error_variance(&ref_noise, r.e_r2_bob)?;
    let phase_variance = est_variance(v_drift, r.v_channel, v_error);

    let (xi_error_u, xi_error_t) =
        error_noise_split(v_a, r.e_r2_bob, t, config.channel.epsilon0, &config.detector)?;
    let xi_error = xi_error_u + xi_error_t / t;
    let xi_drift = v_a * v_drift;
    let xi_channel = v_a * r.v_channel;

    let xi_phase = match config.mapping {
        PhaseNoiseMapping::Linear => xi_drift + xi_channel + xi_error,
        PhaseNoiseMapping::Exact => phase_noise_exact(v_a, phase_variance.v_est),
    };

    let (xi0, xi_am, xi_le, xi_adc, source) = match config.xi_tot_measured {
        Some(xi_tot) => {
            let remainder = xi_tot - xi_phase;
            if remainder < 0.0 {
                return Err(Error::InconsistentBudget(format!(
                    "measured xi_tot = {xi_tot} is below the phase noise xi_phase = {xi_phase}"
                )));
            }
            (remainder, 0.0, 0.0, 0.0, BudgetSource::MeasuredTotal)
        }
        None => {
            let h = &config.hardware;
            let e_r2_alice = alice_reference_intensity(r.e_r2_bob, t, r.e_r2_alice_override)?;
            (
                h.xi0,
                modulation_noise(v_a, h.d_db),
                leakage_noise(e_r2_alice, h.r_e_db, h.r_p_db),
                adc_noise(v_a, h.n_adc),
                BudgetSource::Composed,
            )
        }
    };

    let xi_rest = xi0 + xi_am + xi_le + xi_adc;
    Ok(NoiseBudget {
        xi0,
        xi_am,
        xi_le,
        xi_adc,
        xi_rest,
        xi_drift,
        xi_channel,
        xi_error_u,
        xi_error_t,
        xi_error,
        xi_phase,
        xi_tot: xi_rest + xi_phase,
        phase_variance,
        t_used: t,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ScenarioConfig;
    use approx::assert_relative_eq;

    const T_25KM: f64 = 0.31622776601683794;

    fn table1_detector() -> DetectorParams {
        DetectorParams {
            eta: 0.56,
            v_el: 0.042,
        }
    }

    #[test]
    fn drift_variance_examples() {
        assert_eq!(drift_variance(1e6, 3e5, 0.0), 0.0);
        assert_relative_eq!(
            drift_variance(1e5, 1e5, 1e-8),
            0.012566370614359171,
            max_relative = 1e-12
        );
        assert_eq!(drift_variance(1e5, 3e5, 1e-8), drift_variance(3e5, 1e5, 1e-8));
    }

    #[test]
    fn reference_noise_ideal_case() {
        let det = DetectorParams { eta: 1.0, v_el: 0.0 };
        let r = reference_noise(1.0, 0.0, &det).unwrap();
        assert_eq!(r.chi_untrusted, 0.0);
        assert_eq!(r.chi_trusted, 1.0);
        assert_eq!(r.chi_total, 1.0);
    }

    #[test]
    fn reference_noise_table1_regime() {
        let r = reference_noise(T_25KM, 0.002, &table1_detector()).unwrap();
        assert_relative_eq!(r.chi_trusted, 2.721428571428571, max_relative = 1e-12);
        assert_relative_eq!(r.chi_untrusted, 2.164277660168379, max_relative = 1e-12);
        assert_relative_eq!(r.chi_total, 10.770190435340895, max_relative = 1e-12);
    }

    #[test]
    fn reference_noise_simulation_regime() {
        let det = DetectorParams { eta: 0.5, v_el: 0.1 };
        let r = reference_noise(T_25KM, 0.002, &det).unwrap();
        assert_relative_eq!(r.chi_total, 12.916021704740867, max_relative = 1e-6);
    }

    #[test]
    fn reference_noise_rejects_zero_transmittance() {
        assert!(matches!(
            reference_noise(0.0, 0.0, &table1_detector()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn error_variance_examples() {
        let r = ReferenceNoise {
            chi_total: 10.770234,
            chi_untrusted: 0.0,
            chi_trusted: 0.0,
            t_used: 1.0,
        };
        assert_relative_eq!(
            error_variance(&r, 1000.0).unwrap(),
            0.011770234,
            max_relative = 1e-12
        );

        let unit = ReferenceNoise {
            chi_total: 0.0,
            chi_untrusted: 0.0,
            chi_trusted: 0.0,
            t_used: 1.0,
        };
        assert_eq!(error_variance(&unit, 1.0).unwrap(), 1.0);
        assert!(error_variance(&r, 1e12).unwrap() <= 1.2e-11);
        assert!(error_variance(&r, 0.0).is_err());
    }

    #[test]
    fn est_variance_sums_components() {
        assert_eq!(est_variance(0.0, 0.0, 0.5).v_est, 0.5);
        let v = est_variance(0.01, 0.002, 0.0118);
        assert_relative_eq!(v.v_est, 0.0238, max_relative = 1e-12);
        assert_eq!(
            est_variance(0.002, 0.0118, 0.01).v_est,
            est_variance(0.01, 0.002, 0.0118).v_est
        );
    }

    #[test]
    fn phase_noise_exact_examples() {
        assert_eq!(phase_noise_exact(4.0, 0.0), 0.0);
        assert_relative_eq!(
            phase_noise_exact(4.0, 0.0125664),
            0.050108015808110196,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            phase_noise_exact(3.073, 0.0117702),
            0.036063601562509436,
            max_relative = 1e-12
        );
    }

    #[test]
    fn phase_noise_linear_examples_and_bound() {
        assert_eq!(phase_noise_linear(4.0, 0.0), 0.0);
        assert_relative_eq!(phase_noise_linear(4.0, 0.0125664), 0.0502656, max_relative = 1e-12);
        for i in 0..2000 {
            let v_est = f64::from(i) * 1e-3;
            assert!(phase_noise_exact(4.0, v_est) <= phase_noise_linear(4.0, v_est) + 1e-15);
        }
        // ratio tends to 1 as v_est -> 0
        let ratio = phase_noise_exact(4.0, 1e-6) / phase_noise_linear(4.0, 1e-6);
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn error_noise_split_table1() {
        let (u, t) =
            error_noise_split(3.073, 1000.0, T_25KM, 0.002, &table1_detector()).unwrap();
        assert_relative_eq!(t, 0.00836295, max_relative = 1e-9);
        assert_relative_eq!(u, 0.009723825249697428, max_relative = 1e-9);
    }

    #[test]
    fn error_noise_split_simulation_regime_trusted_part() {
        let det = DetectorParams { eta: 0.5, v_el: 0.1 };
        let (_, t) = error_noise_split(4.0, 1000.0, T_25KM, 0.002, &det).unwrap();
        assert_relative_eq!(t, 0.0136, max_relative = 1e-12);
    }

    #[test]
    fn error_noise_split_unit_case() {
        let det = DetectorParams { eta: 1.0, v_el: 0.0 };
        let (u, t) = error_noise_split(1.0, 1.0, 1.0, 0.0, &det).unwrap();
        assert_eq!((u, t), (1.0, 1.0));
    }

    #[test]
    fn error_noise_split_consistency_identity_on_grid() {
        // xi_error_u + xi_error_t / T == V_A (chi + 1) / E_R^2 to 1e-12 relative
        for &t in &[0.01, 0.1, 0.3162, 0.5, 0.9, 1.0] {
            for &eta in &[0.1, 0.3, 0.56, 0.8, 1.0] {
                for &v_el in &[0.0, 0.042, 0.1, 0.5] {
                    let det = DetectorParams { eta, v_el };
                    let (u, tt) = error_noise_split(3.073, 1000.0, t, 0.002, &det).unwrap();
                    let chi = reference_noise(t, 0.002, &det).unwrap().chi_total;
                    let direct = 3.073 * (chi + 1.0) / 1000.0;
                    assert_relative_eq!(u + tt / t, direct, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn reference_noise_split_identity_on_grid() {
        for &t in &[0.01, 0.05, 0.1, 0.3162, 0.5, 0.9, 1.0] {
            for &eta in &[0.1, 0.3, 0.56, 0.8, 1.0] {
                for &v_el in &[0.0, 0.042, 0.1, 0.5] {
                    let det = DetectorParams { eta, v_el };
                    let r = reference_noise(t, 0.002, &det).unwrap();
                    assert_relative_eq!(
                        r.chi_total,
                        r.chi_untrusted + r.chi_trusted / t,
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn alice_reference_intensity_examples() {
        assert_eq!(alice_reference_intensity(1000.0, 1.0, None).unwrap(), 1000.0);
        assert_relative_eq!(
            alice_reference_intensity(1000.0, T_25KM, None).unwrap(),
            3162.277660168379,
            max_relative = 1e-9
        );
        assert_eq!(
            alice_reference_intensity(1000.0, T_25KM, Some(5000.0)).unwrap(),
            5000.0
        );
        assert!(alice_reference_intensity(1000.0, 0.0, None).is_err());
    }

    #[test]
    fn modulation_noise_examples() {
        assert_relative_eq!(modulation_noise(4.0, 40.0), 0.004, max_relative = 1e-12);
        assert_relative_eq!(modulation_noise(3.073, 40.0), 0.003073, max_relative = 1e-12);
        assert!(modulation_noise(4.0, 400.0) < 1e-30);
    }

    #[test]
    fn leakage_noise_examples() {
        assert_eq!(leakage_noise(0.0, 40.0, 30.0), 0.0);
        assert_relative_eq!(
            leakage_noise(3162.278, 40.0, 30.0),
            6.324556e-4,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            leakage_noise(2.0 * 3162.278, 40.0, 30.0),
            2.0 * leakage_noise(3162.278, 40.0, 30.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn adc_noise_examples() {
        assert_relative_eq!(adc_noise(4.0, 10), 0.0032552083333333335, max_relative = 1e-12);
        assert_eq!(adc_noise(0.0, 10), 0.0);
        assert_relative_eq!(adc_noise(4.0, 11), adc_noise(4.0, 10) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn total_budget_simulation_regime_at_25km() {
        // derivation path (no override): E_R^A^2 = E_R^2 / T
        let cfg = ScenarioConfig::default();
        let b = total_budget(&cfg).unwrap();
        assert_eq!(b.source, BudgetSource::Composed);
        assert_relative_eq!(b.xi_rest, 0.01788766386536701, max_relative = 1e-9);
        assert_relative_eq!(b.xi_error, 0.05566408681896347, max_relative = 1e-9);
        assert_relative_eq!(b.xi_tot, 0.07355175068433048, max_relative = 1e-9);
        assert_relative_eq!(b.xi_tot, b.xi_rest + b.xi_phase, max_relative = 1e-12);
        assert_relative_eq!(
            b.xi_error,
            b.xi_error_u + b.xi_error_t / b.t_used,
            max_relative = 1e-12
        );
    }

    #[test]
    fn total_budget_ideal_hardware_leaves_only_error_noise() {
        let mut cfg = ScenarioConfig::default();
        cfg.channel.distance_km = 0.0;
        cfg.channel.epsilon0 = 0.0;
        cfg.hardware.xi0 = 0.0;
        cfg.hardware.d_db = 4000.0;
        cfg.hardware.n_adc = 500;
        cfg.hardware.r_e_db = 4000.0;
        cfg.hardware.r_p_db = 4000.0;
        let b = total_budget(&cfg).unwrap();
        assert!(b.xi_rest < 1e-30);
        assert_relative_eq!(b.xi_tot, b.xi_error, max_relative = 1e-12);
    }

    #[test]
    fn total_budget_measured_mode_records_supplied_total() {
        let cfg = ScenarioConfig::experiment_25km();
        let b = total_budget(&cfg).unwrap();
        assert_eq!(b.source, BudgetSource::MeasuredTotal);
        assert_eq!(b.xi_tot, 0.056);
        assert_relative_eq!(b.xi_error_t, 0.00836295, max_relative = 1e-9);
        assert_relative_eq!(b.xi_rest, 0.056 - b.xi_error, max_relative = 1e-12);
        assert_eq!(b.xi_rest, b.xi0);
    }

    #[test]
    fn total_budget_measured_mode_rejects_total_below_phase_noise() {
        let mut cfg = ScenarioConfig::experiment_25km();
        cfg.xi_tot_measured = Some(0.001);
        assert!(matches!(
            total_budget(&cfg),
            Err(Error::InconsistentBudget(_))
        ));
    }

    #[test]
    fn total_budget_exact_mapping_is_below_linear() {
        let mut cfg = ScenarioConfig::default();
        cfg.mapping = PhaseNoiseMapping::Exact;
        let exact = total_budget(&cfg).unwrap();
        let linear = total_budget(&ScenarioConfig::default()).unwrap();
        assert!(exact.xi_phase < linear.xi_phase);
        assert_relative_eq!(
            exact.xi_phase,
            phase_noise_exact(4.0, exact.phase_variance.v_est),
            max_relative = 1e-12
        );
    }

    #[test]
    fn budget_components_nonnegative_and_total_nondecreasing_in_distance() {
        for override_ in [None, Some(1000.0)] {
            let mut prev = -1.0;
            for i in 0..=120 {
                let mut cfg = ScenarioConfig::default();
                cfg.reference.e_r2_alice_override = override_;
                cfg.channel.distance_km = 0.5 * f64::from(i);
                let b = total_budget(&cfg).unwrap();
                for (name, v) in [
                    ("xi0", b.xi0),
                    ("xi_am", b.xi_am),
                    ("xi_le", b.xi_le),
                    ("xi_adc", b.xi_adc),
                    ("xi_rest", b.xi_rest),
                    ("xi_drift", b.xi_drift),
                    ("xi_channel", b.xi_channel),
                    ("xi_error_u", b.xi_error_u),
                    ("xi_error_t", b.xi_error_t),
                    ("xi_error", b.xi_error),
                    ("xi_phase", b.xi_phase),
                    ("xi_tot", b.xi_tot),
                ] {
                    assert!(v >= 0.0, "{name} negative: {v}");
                }
                assert!(b.xi_tot >= prev);
                prev = b.xi_tot;
            }
        }
    }
}
