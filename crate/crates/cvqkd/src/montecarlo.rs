//! Seeded sample-level oracles for the analytic noise formulas.
//!
//! Randomness is fully reproducible from the seed alone: sampling is split
//! into fixed partitions of 2^16 samples, partition `p` of master seed `s`
//! uses a ChaCha12 stream cipher RNG keyed with the 32-byte seed
//! `[s as 8 LE bytes | p as 8 LE bytes | 16 zero bytes]`, and Gaussian
//! variates come from the rand_distr ziggurat sampler. Partitions are merged
//! in index order, so any worker layout that respects the partition plan
//! reproduces the single-threaded result bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::Serialize;
use statrs::function::erf::erf;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::noise_budget::reference_noise;
use crate::params::{transmittance, ScenarioConfig};

const PARTITION_LEN: u64 = 1 << 16;

/// One Monte Carlo estimate with its uncertainty and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

fn partition_rng(master_seed: u64, partition: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&partition.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}

/// Runs `fill` once per partition, collecting exactly `n` per-sample values.
fn sample_partitioned<F>(n: u64, seed: u64, mut fill: F) -> Vec<f64>
where
    F: FnMut(&mut ChaCha12Rng, &mut Vec<f64>, u64),
{
    let mut values = Vec::with_capacity(n as usize);
    let mut remaining = n;
    let mut partition = 0u64;
    while remaining > 0 {
        let count = remaining.min(PARTITION_LEN);
        let mut rng = partition_rng(seed, partition);
        fill(&mut rng, &mut values, count);
        remaining -= count;
        partition += 1;
    }
    values
}

fn wrap_angle(diff: f64) -> f64 {
    let mut d = diff % TAU;
    if d <= -PI {
        d += TAU;
    } else if d > PI {
        d -= TAU;
    }
    d
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Standard error of the mean (the jackknife reduces to exactly this for a
/// mean statistic).
fn std_error_of_mean(values: &[f64]) -> f64 {
    (sample_variance(values) / values.len() as f64).sqrt()
}

/// Jackknife standard error of the sample variance, computed in O(n) from the
/// leave-one-out sufficient statistics.
fn jackknife_se_of_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|v| v - m).collect();
    let s2: f64 = centered.iter().map(|e| e * e).sum();
    // leave-one-out variance: remaining sum is -e_i, remaining square sum s2 - e_i^2
    let loo: Vec<f64> = centered
        .iter()
        .map(|e| (s2 - e * e - (e * e) / (n - 1.0)) / (n - 2.0))
        .collect();
    let loo_mean = mean(&loo);
    let ss: f64 = loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).sum();
    ((n - 1.0) / n * ss).sqrt()
}

/// Samples the single-shot arctangent phase estimator and returns the
/// variance of the wrapped estimation error.
///
/// Per sample: θ uniform on [−π, π); X = E_R·cosθ + n_x, P = E_R·sinθ + n_p
/// with per-quadrature noise variance χ + 1; the estimate is atan2(P, X) and
/// the error θ̂ − θ is wrapped to (−π, π] before taking the variance.
pub fn simulate_reference_phase_estimation(
    e_r2_bob: f64,
    chi: f64,
    n: u64,
    seed: u64,
) -> Result<McResult> {
    if e_r2_bob <= 0.0 {
        return Err(Error::Domain(format!(
            "reference intensity must be > 0 (got {e_r2_bob})"
        )));
    }
    if chi < 0.0 {
        return Err(Error::Domain(format!("chi must be >= 0 (got {chi})")));
    }
    if n < 10_000 {
        return Err(Error::Domain(format!(
            "need at least 10^4 samples (got {n})"
        )));
    }
    let amplitude = e_r2_bob.sqrt();
    let phase = Uniform::new(-PI, PI);
    let noise = Normal::new(0.0, (chi + 1.0).sqrt()).expect("valid std dev");
    let diffs = sample_partitioned(n, seed, |rng, out, count| {
        for _ in 0..count {
            let theta: f64 = phase.sample(rng);
            let x = amplitude * theta.cos() + noise.sample(rng);
            let p = amplitude * theta.sin() + noise.sample(rng);
            out.push(wrap_angle(p.atan2(x) - theta));
        }
    });
    Ok(McResult {
        estimate: sample_variance(&diffs),
        std_error: jackknife_se_of_variance(&diffs),
        n_samples: n,
        seed,
    })
}

/// Samples the phase-noise penalty of a rotation error δ ~ N(0, V_est) on a
/// Gaussian-modulated state, with unit channel and unit efficiency.
///
/// The estimator ξ̂ = mean[(x − X_A)²] − 1 keeps the transmittance fixed at 1
/// rather than refitting it; under it the penalty is exactly
/// 2·V_A·(1 − e^(−V_est/2)).
pub fn simulate_phase_noise_penalty(v_a: f64, v_est: f64, n: u64, seed: u64) -> Result<McResult> {
    if v_a <= 0.0 {
        return Err(Error::Domain(format!("v_a must be > 0 (got {v_a})")));
    }
    if v_est < 0.0 {
        return Err(Error::Domain(format!("v_est must be >= 0 (got {v_est})")));
    }
    if n < 10_000 {
        return Err(Error::Domain(format!(
            "need at least 10^4 samples (got {n})"
        )));
    }
    let modulation = Normal::new(0.0, v_a.sqrt()).expect("valid std dev");
    let rotation = Normal::new(0.0, v_est.sqrt()).expect("valid std dev");
    let vacuum = Normal::new(0.0, 1.0).expect("valid std dev");
    let squares = sample_partitioned(n, seed, |rng, out, count| {
        for _ in 0..count {
            let x_a: f64 = modulation.sample(rng);
            let p_a: f64 = modulation.sample(rng);
            let delta: f64 = rotation.sample(rng);
            let rotated = x_a * delta.cos() + p_a * delta.sin();
            let measured = rotated + vacuum.sample(rng);
            let r = measured - x_a;
            out.push(r * r);
        }
    });
    Ok(McResult {
        estimate: mean(&squares) - 1.0,
        std_error: std_error_of_mean(&squares),
        n_samples: n,
        seed,
    })
}

/// End-to-end oracle for the compensated protocol: Bob measures rotated,
/// attenuated signal quadratures, estimates the frame rotation from the bright
/// reference, Alice rotates her data by the estimate, and the residual excess
/// noise is estimated channel-referred.
pub fn simulate_compensated_protocol(
    config: &ScenarioConfig,
    n: u64,
    seed: u64,
) -> Result<McResult> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    if n < 100_000 {
        return Err(Error::Domain(format!(
            "need at least 10^5 samples (got {n})"
        )));
    }
    let t = transmittance(&config.channel);
    let eta = config.detector.eta;
    let v_el = config.detector.v_el;
    let chi = reference_noise(t, config.channel.epsilon0, &config.detector)?.chi_total;
    let scale = (t * eta / 2.0).sqrt();
    let amplitude = config.reference.e_r2_bob.sqrt();

    let modulation = Normal::new(0.0, config.modulation.v_a.sqrt()).expect("valid std dev");
    let phase = Uniform::new(-PI, PI);
    let detection = Normal::new(0.0, (1.0 + v_el).sqrt()).expect("valid std dev");
    let ref_noise = Normal::new(0.0, (chi + 1.0).sqrt()).expect("valid std dev");

    let residuals = sample_partitioned(n, seed, |rng, out, count| {
        for _ in 0..count {
            let x_a: f64 = modulation.sample(rng);
            let p_a: f64 = modulation.sample(rng);
            let theta: f64 = phase.sample(rng);
            let (sin_t, cos_t) = theta.sin_cos();

            let x_b = scale * (cos_t * x_a + sin_t * p_a) + detection.sample(rng);
            let p_b = scale * (-sin_t * x_a + cos_t * p_a) + detection.sample(rng);

            let x_r = amplitude * cos_t + ref_noise.sample(rng);
            let p_r = amplitude * sin_t + ref_noise.sample(rng);
            let (sin_h, cos_h) = p_r.atan2(x_r).sin_cos();

            let x_pred = cos_h * x_a + sin_h * p_a;
            let p_pred = -sin_h * x_a + cos_h * p_a;

            let rx = x_b - scale * x_pred;
            let rp = p_b - scale * p_pred;
            out.push(0.5 * (rx * rx + rp * rp));
        }
    });
    let referral = 2.0 / (t * eta);
    Ok(McResult {
        estimate: (mean(&residuals) - (1.0 + v_el)) * referral,
        std_error: std_error_of_mean(&residuals) * referral,
        n_samples: n,
        seed,
    })
}

/// Exact expectation of the wrapped squared phase error of the arctangent
/// estimator, by quadrature over the closed-form error density.
///
/// For amplitude² = E_R² and per-quadrature noise variance χ + 1 the error
/// density at offset θ is, with ρ = E_R²/(χ+1),
///
///   f(θ) = e^(−ρ/2)/(2π)
///        + √(ρ/(8π))·cosθ·e^(−ρ·sin²θ/2)·(1 + erf(√(ρ/2)·cosθ)),
///
/// and the returned value is ∫θ²f(θ)dθ over (−π, π]. It approaches the
/// linearized (χ+1)/E_R² from above as the intensity grows.
pub fn exact_phase_error_variance(e_r2: f64, chi: f64) -> f64 {
    let rho = e_r2 / (chi + 1.0);
    let f = |theta: f64| -> f64 {
        let c = theta.cos();
        let s = theta.sin();
        let density = (-rho / 2.0).exp() / TAU
            + (rho / (8.0 * PI)).sqrt()
                * c
                * (-rho * s * s / 2.0).exp()
                * (1.0 + erf((rho / 2.0).sqrt() * c));
        theta * theta * density
    };
    // integrate over the support of the peak; beyond 40 linearized sigmas the
    // density is negligible
    let half = PI.min(40.0 / rho.sqrt());
    simpson(f, -half, half, 8192)
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}
