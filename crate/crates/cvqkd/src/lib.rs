//! Secure key rates for continuous-variable QKD with a local local oscillator.
//!
//! The crate models the residual phase noise of an LLO CV-QKD link after
//! phase compensation, splits it into trusted and untrusted parts under three
//! trust models, evaluates the asymptotic collective-attack secret key rate
//! from the heterodyne covariance matrix, models the phase-reference
//! intensity attack with its monitoring countermeasure, and validates the
//! analytic formulas against seeded sample-level simulations.
//!
//! All noise variances are in shot-noise units (vacuum variance 1), phase
//! variances in rad², reference intensities in mean photon numbers.

pub mod attack;
pub mod error;
pub mod keyrate;
pub mod montecarlo;
pub mod noise_budget;
pub mod noise_models;
pub mod params;

pub use error::{Error, Result, Violation};
pub use params::{
    load_config, serialize_config, transmittance, ChannelParams, DetectorParams, HardwareParams,
    ModelKind, ModulationParams, PhaseNoiseMapping, PhaseRefParams, ScenarioConfig,
};

pub use attack::{
    added_noise_under_attack, attack_noise, attack_reference_intensity, intensity_alarm,
    AttackParams, DEFAULT_ALARM_THRESHOLD,
};
pub use keyrate::{
    g_entropy, holevo_bound, keyrate_pipeline, keyrate_pipeline_attacked, max_distance,
    mutual_information, secret_key_rate, symplectic_eigenvalues, Evaluation, KeyRateBreakdown,
    SymplecticEigenvalues,
};
pub use montecarlo::{
    exact_phase_error_variance, simulate_compensated_protocol, simulate_phase_noise_penalty,
    simulate_reference_phase_estimation, McResult,
};
pub use noise_budget::{
    adc_noise, alice_reference_intensity, drift_variance, error_noise_split, error_variance,
    est_variance, leakage_noise, modulation_noise, phase_noise_exact, phase_noise_linear,
    reference_noise, total_budget, BudgetSource, NoiseBudget, PhaseVariance, ReferenceNoise,
};
pub use noise_models::{added_noise, detector_added_noise, trusted_excess_noise, AddedNoise};
