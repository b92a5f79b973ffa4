//! Asymptotic collective-attack secret key rate: mutual information,
//! symplectic eigenvalues of the post-measurement covariance matrix, the
//! Holevo bound, and pulse-rate throughput.

use serde::Serialize;

use crate::attack::{added_noise_under_attack, AttackParams};
use crate::error::{Error, Result};
use crate::noise_budget::{total_budget, NoiseBudget};
use crate::noise_models::{added_noise, AddedNoise};
use crate::params::{transmittance, ModelKind, ScenarioConfig};

/// Eigenvalues below 1 by more than this are treated as numerical noise.
const LAMBDA_SLACK: f64 = 1e-9;
/// Radicands below −RADICAND_SLACK, or eigenvalues below 1 − LAMBDA_HARD_FLOOR,
/// signal genuinely inconsistent inputs.
const RADICAND_SLACK: f64 = 1e-9;
const LAMBDA_HARD_FLOOR: f64 = 1e-6;

/// Secret-key-rate computation with all intermediates retained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateBreakdown {
    /// Mutual information between Alice and Bob (bits/pulse).
    pub i_ab: f64,
    /// Symplectic eigenvalues λ1..λ5 (λ5 = 1).
    pub lambda: [f64; 5],
    /// Holevo bound on Eve's information (bits/pulse).
    pub chi_be: f64,
    /// β·I_AB − χ_BE (bits/pulse); negative values are retained.
    pub k: f64,
    /// Throughput f_rep·max(k, 0) (bits/s).
    pub key: f64,
    pub model: ModelKind,
}

/// Symplectic spectrum plus whether any radicand needed clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticEigenvalues {
    pub values: [f64; 5],
    pub clamped: bool,
}

/// Full single-point evaluation: transmittance, budget, added noise, and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub transmittance: f64,
    pub budget: NoiseBudget,
    pub added_noise: AddedNoise,
    pub keyrate: KeyRateBreakdown,
}

/// Bosonic entropy G(x) = (x+1)·log2(x+1) − x·log2(x), with G(0) = 0.
pub fn g_entropy(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("g_entropy needs x >= 0 (got {x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Heterodyne mutual information I_AB = log2((V + χ_tot)/(1 + χ_tot)),
/// with V = V_A + 1.
pub fn mutual_information(v: f64, chi_tot: f64) -> f64 {
    ((v + chi_tot) / (1.0 + chi_tot)).log2()
}

/// Symplectic eigenvalues of the heterodyne-protocol covariance matrix.
///
/// λ1,2² = [A ± √(A²−4B)]/2 and λ3,4² = [C ± √(C²−4D)]/2 with
///
///   A = V²(1−2T) + 2T + T²(V+χ_line)²
///   B = T²(Vχ_line + 1)²
///   C = [Aχ_het² + B + 1 + 2χ_het(V√B + T(V+χ_line)) + 2T(V²−1)] / [T(V+χ_tot)]²
///   D = [(V + √B·χ_het) / (T(V+χ_tot))]²
///
/// Radicands within −1e−9 of zero are clamped to 0; anything lower, or an
/// eigenvalue below 1 − 1e−6, errors as nonphysical.
pub fn symplectic_eigenvalues(
    v: f64,
    t: f64,
    chi_line: f64,
    chi_het: f64,
    chi_tot: f64,
) -> Result<SymplecticEigenvalues> {
    if t <= 0.0 || t > 1.0 {
        return Err(Error::NonPhysical(format!(
            "transmittance must be in (0, 1] (got {t})"
        )));
    }
    if v <= 1.0 {
        return Err(Error::NonPhysical(format!("V = V_A + 1 must exceed 1 (got {v})")));
    }

    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line) * (v + chi_line);
    let b = t * t * (v * chi_line + 1.0) * (v * chi_line + 1.0);
    let sqrt_b = b.sqrt();
    let denom = t * (v + chi_tot);
    let c = (a * chi_het * chi_het
        + b
        + 1.0
        + 2.0 * chi_het * (v * sqrt_b + t * (v + chi_line))
        + 2.0 * t * (v * v - 1.0))
        / (denom * denom);
    let d = {
        let r = (v + sqrt_b * chi_het) / denom;
        r * r
    };

    let mut clamped = false;
    let mut pair = |sum: f64, prod_discriminant: f64| -> Result<(f64, f64)> {
        let mut radicand = sum * sum - 4.0 * prod_discriminant;
        if radicand < 0.0 {
            if radicand < -RADICAND_SLACK {
                return Err(Error::NonPhysical(format!(
                    "negative radicand {radicand} in symplectic spectrum"
                )));
            }
            radicand = 0.0;
            clamped = true;
        }
        let root = radicand.sqrt();
        let hi = (0.5 * (sum + root)).sqrt();
        let lo = (0.5 * (sum - root)).max(0.0).sqrt();
        Ok((hi, lo))
    };

    let (l1, l2) = pair(a, b)?;
    let (l3, l4) = pair(c, d)?;
    let values = [l1, l2, l3, l4, 1.0];
    for lam in values {
        if lam < 1.0 - LAMBDA_HARD_FLOOR {
            return Err(Error::NonPhysical(format!(
                "symplectic eigenvalue {lam} below 1"
            )));
        }
    }
    Ok(SymplecticEigenvalues { values, clamped })
}

/// Holevo bound χ_BE = G((λ1−1)/2) + G((λ2−1)/2) − G((λ3−1)/2) − G((λ4−1)/2).
///
/// λ5 contributes G(0) = 0. Eigenvalues within 1e−9 below 1 are treated as 1.
pub fn holevo_bound(lambda: &[f64; 5]) -> Result<f64> {
    let mut g = [0.0; 4];
    for (i, &lam) in lambda.iter().take(4).enumerate() {
        if lam < 1.0 - LAMBDA_SLACK {
            return Err(Error::Domain(format!(
                "holevo_bound needs eigenvalues >= 1 (got {lam})"
            )));
        }
        g[i] = g_entropy(((lam - 1.0) / 2.0).max(0.0))?;
    }
    Ok(g[0] + g[1] - g[2] - g[3])
}

/// Asymptotic secret key rate K = β·I_AB − χ_BE (bits/pulse, not clamped).
pub fn secret_key_rate(beta: f64, i_ab: f64, chi_be: f64) -> f64 {
    beta * i_ab - chi_be
}

fn breakdown(
    config: &ScenarioConfig,
    noise: &AddedNoise,
    model: ModelKind,
) -> Result<KeyRateBreakdown> {
    let v = config.modulation.v_a + 1.0;
    let i_ab = mutual_information(v, noise.chi_tot);
    let eig = symplectic_eigenvalues(v, noise.t_used, noise.chi_line, noise.chi_het, noise.chi_tot)?;
    let chi_be = holevo_bound(&eig.values)?;
    let k = secret_key_rate(config.modulation.beta, i_ab, chi_be);
    Ok(KeyRateBreakdown {
        i_ab,
        lambda: eig.values,
        chi_be,
        k,
        key: config.modulation.f_rep * k.max(0.0),
        model,
    })
}

/// Full pipeline: transmittance → budget → added noise → key rate.
pub fn keyrate_pipeline(config: &ScenarioConfig, model: ModelKind) -> Result<Evaluation> {
    let t = transmittance(&config.channel);
    let budget = total_budget(config)?;
    let noise = added_noise(&budget, &config.detector, t, model)?;
    Ok(Evaluation {
        transmittance: t,
        budget,
        added_noise: noise,
        keyrate: breakdown(config, &noise, model)?,
    })
}

/// Pipeline variant for the trusted model under the intensity attack.
pub fn keyrate_pipeline_attacked(
    config: &ScenarioConfig,
    atk: &AttackParams,
    monitored: bool,
) -> Result<Evaluation> {
    let t = transmittance(&config.channel);
    let budget = total_budget(config)?;
    let noise = added_noise_under_attack(
        &budget,
        &config.detector,
        t,
        atk,
        config.channel.distance_km,
        monitored,
    )?;
    Ok(Evaluation {
        transmittance: t,
        budget,
        added_noise: noise,
        keyrate: breakdown(config, &noise, ModelKind::Trusted)?,
    })
}

/// Maximum transmission distance: the key-rate zero crossing, bisected to the
/// requested resolution. Returns `None` when the rate is not positive at zero
/// distance.
pub fn max_distance(
    config: &ScenarioConfig,
    model: ModelKind,
    atk: Option<(&AttackParams, bool)>,
    resolution_km: f64,
) -> Result<Option<f64>> {
    let k_at = |distance: f64| -> Result<f64> {
        let mut cfg = *config;
        cfg.channel.distance_km = distance;
        let eval = match atk {
            Some((params, monitored)) => keyrate_pipeline_attacked(&cfg, params, monitored)?,
            None => keyrate_pipeline(&cfg, model)?,
        };
        Ok(eval.keyrate.k)
    };

    if k_at(0.0)? <= 0.0 {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = 50.0;
    while k_at(hi)? > 0.0 {
        lo = hi;
        hi += 50.0;
        if hi > 2_000.0 {
            return Ok(None); // no crossing within any practical fiber length
        }
    }
    while hi - lo > resolution_km {
        let mid = 0.5 * (lo + hi);
        if k_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
