//! Plans for parallel Gaussian channels.
//!
//! Transmit symbols on channel `ℓ` are `Δ_ℓ A_ℓ S_ℓ` with `Δ_ℓ = Δ / h_ℓ`, so
//! every channel sees the same received spacing `2Δ`. The average transmit
//! power is `Δ² (1/L) Σ_ℓ E[A_ℓ²] / h_ℓ²`, which is what the plans minimize.

use serde::Serialize;

use crate::constellation::Labeling;
use crate::error::{Error, Result};
use crate::infotheory::{bmd_rate, db_to_linear, entropy, linear_to_db, required_snr_db, InputDistribution};
use crate::matcher::CcdmConfig;
use crate::pdm::ExtendedPdmPlan;

use super::levels::{quantize_levels, rate_loss_fixed_point, ProductLevelProblem};
use super::mb::mb_distribution;
use super::waterfill::{waterfill, ChannelProfile};
use super::derive_gamma;

const FIXED_POINT_ITERS: usize = 20;

/// Which quantity the distribution matcher rate constraint is placed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateAccounting {
    /// Continuous entropies; matchers are quantized afterwards.
    Entropy,
    /// Actual matcher rates `Σ k / (L n)` at the finite block length.
    #[default]
    RateLoss,
}

/// Extended PDM plan with its design parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelPdmPlan {
    pub plan: ExtendedPdmPlan,
    /// Continuous optimizer output `P(B_j = 0)`.
    pub p0s: Vec<f64>,
    /// Binary entropies of the quantized levels.
    pub entropies: Vec<f64>,
    pub gamma: f64,
    pub r_dm: f64,
}

impl ParallelPdmPlan {
    pub fn rate_loss(&self) -> f64 {
        self.plan.rate_loss()
    }

    pub fn channel_distributions(&self) -> Result<Vec<InputDistribution>> {
        (0..self.plan.num_channels())
            .map(|l| self.plan.channel_distribution(l))
            .collect()
    }
}

/// One `2^(m_ℓ − 1)`-ary CCDM per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualPlan {
    pub channel_bits: Vec<usize>,
    /// Common MB parameter `ν`; channel `ℓ` uses `ν / h_ℓ²`.
    pub nu: f64,
    pub matchers: Vec<CcdmConfig>,
    pub gamma: f64,
    pub r_dm: f64,
}

impl IndividualPlan {
    /// Quantized amplitude distributions.
    pub fn channel_distributions(&self) -> Result<Vec<InputDistribution>> {
        self.matchers
            .iter()
            .zip(&self.channel_bits)
            .map(|(c, &m)| InputDistribution::from_amplitudes(m, c.composition().distribution()))
            .collect()
    }

    /// Data bits per channel use.
    pub fn rate(&self) -> f64 {
        let k: usize = self.matchers.iter().map(|c| c.input_len()).sum();
        let uses: usize = self.matchers.iter().map(|c| c.output_len()).sum();
        k as f64 / uses as f64
    }

    pub fn entropy_rate(&self) -> f64 {
        self.matchers
            .iter()
            .map(|c| entropy(&c.composition().distribution()))
            .sum::<f64>()
            / self.matchers.len() as f64
    }

    pub fn rate_loss(&self) -> f64 {
        (self.entropy_rate() - self.rate()).max(0.0)
    }
}

fn check_channels(profile: &ChannelProfile, channel_bits: &[usize]) -> Result<()> {
    if channel_bits.len() != profile.num_channels() {
        return Err(Error::domain(format!(
            "{} constellation sizes for {} channels",
            channel_bits.len(),
            profile.num_channels()
        )));
    }
    if profile.uses_per_channel() == 0 {
        return Err(Error::domain("uses per channel must be positive"));
    }
    Ok(())
}

fn mean_bits(channel_bits: &[usize]) -> f64 {
    channel_bits.iter().sum::<usize>() as f64 / channel_bits.len() as f64
}

/// Extended PDM minimizing `Σ_ℓ E[A_ℓ²] / h_ℓ²` over shared level
/// distributions at transmission rate `r_t` with code rate `code_rate`.
pub fn plan_parallel_pdm(
    profile: &ChannelProfile,
    channel_bits: &[usize],
    r_t: f64,
    code_rate: f64,
    accounting: RateAccounting,
) -> Result<ParallelPdmPlan> {
    check_channels(profile, channel_bits)?;
    let gamma = derive_gamma(mean_bits(channel_bits), code_rate)?;
    let r_dm = r_t - gamma;
    let problem = ProductLevelProblem::extended(profile.gains(), channel_bits)?;
    let n = profile.uses_per_channel();
    let lengths = ExtendedPdmPlan::level_lengths(channel_bits, n);
    let (p0s, matchers) = match accounting {
        RateAccounting::Entropy => {
            let q = problem.solve(r_dm)?;
            let matchers = quantize_levels(problem.shaped(), &q, &lengths)?;
            (q, matchers)
        }
        RateAccounting::RateLoss => rate_loss_fixed_point(&problem, r_dm, &lengths, n, channel_bits.len())?,
    };
    let entropies = matchers.iter().map(|m| m.entropy()).collect();
    let plan = ExtendedPdmPlan::new(channel_bits.to_vec(), n, matchers)?;
    Ok(ParallelPdmPlan {
        plan,
        p0s,
        entropies,
        gamma,
        r_dm,
    })
}

/// Per-channel MB amplitudes `P_A(a) ∝ exp(−ν a² / h_ℓ²)` with a common `ν`,
/// each realized by its own CCDM of length `n`.
pub fn plan_parallel_individual(
    profile: &ChannelProfile,
    channel_bits: &[usize],
    r_t: f64,
    code_rate: f64,
    accounting: RateAccounting,
) -> Result<IndividualPlan> {
    check_channels(profile, channel_bits)?;
    if let Some(&m) = channel_bits.iter().find(|&&m| m < 2) {
        return Err(Error::domain(format!("channel with {m} bits per symbol has no amplitudes to shape")));
    }
    let gamma = derive_gamma(mean_bits(channel_bits), code_rate)?;
    let r_dm = r_t - gamma;
    let n = profile.uses_per_channel();
    let build = |target: f64| -> Result<IndividualPlan> {
        let nu = common_mb_parameter(profile.gains(), channel_bits, target)?;
        let matchers = profile
            .gains()
            .iter()
            .zip(channel_bits)
            .map(|(&h, &m)| {
                let dist = mb_distribution(m, nu / (h * h))?;
                CcdmConfig::for_distribution(dist.amplitude_probs(), n)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IndividualPlan {
            channel_bits: channel_bits.to_vec(),
            nu,
            matchers,
            gamma,
            r_dm,
        })
    };
    match accounting {
        RateAccounting::Entropy => build(r_dm),
        RateAccounting::RateLoss => {
            let mut target = r_dm;
            let mut last = Vec::new();
            for _ in 0..FIXED_POINT_ITERS {
                let plan = match build(target) {
                    Ok(p) => p,
                    Err(Error::Planning { message, .. }) => {
                        return Err(Error::Planning {
                            message,
                            last_iterate: Some(last),
                        })
                    }
                    Err(e) => return Err(e),
                };
                let rate = plan.rate();
                if (rate - r_dm).abs() < 1.0 / n as f64 {
                    return Ok(plan);
                }
                target += r_dm - rate;
                last = vec![plan.nu];
            }
            Err(Error::Planning {
                message: format!("rate-loss iteration did not reach {r_dm} in {FIXED_POINT_ITERS} steps"),
                last_iterate: Some(last),
            })
        }
    }
}

/// `ν` with `(1/L) Σ_ℓ H(A_ℓ) = target` under `ν_ℓ = ν / h_ℓ²`.
fn common_mb_parameter(gains: &[f64], channel_bits: &[usize], target: f64) -> Result<f64> {
    let mean_entropy = |nu: f64| -> Result<f64> {
        let mut total = 0.0;
        for (&h, &m) in gains.iter().zip(channel_bits) {
            total += entropy(mb_distribution(m, nu / (h * h))?.amplitude_probs());
        }
        Ok(total / gains.len() as f64)
    };
    let max = mean_entropy(0.0)?;
    if target > max + 1e-12 || target <= 0.0 {
        return Err(Error::Planning {
            message: format!("mean amplitude entropy {target} outside (0, {max}]"),
            last_iterate: None,
        });
    }
    if target >= max - 1e-12 {
        return Ok(0.0);
    }
    let mut hi = 1e-3;
    while mean_entropy(hi)? > target {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::numeric("MB parameter search diverged"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_entropy(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-channel scalings meeting the power budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionScaling {
    pub delta: f64,
    pub per_channel: Vec<f64>,
}

/// Mean transmit power `Δ² (1/L) Σ_ℓ E[A_ℓ²] / h_ℓ²` per unit `Δ²`.
fn weighted_power(gains: &[f64], dists: &[InputDistribution]) -> f64 {
    gains
        .iter()
        .zip(dists)
        .map(|(h, d)| d.second_moment() / (h * h))
        .sum::<f64>()
        / gains.len() as f64
}

/// `Δ_ℓ = Δ / h_ℓ` with `Δ` chosen so that the mean transmit power is `power`.
pub fn scale_for_detection(gains: &[f64], dists: &[InputDistribution], power: f64) -> Result<DetectionScaling> {
    if gains.len() != dists.len() || gains.is_empty() {
        return Err(Error::domain("one distribution per channel required"));
    }
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::domain("power must be positive"));
    }
    let delta = (power / weighted_power(gains, dists)).sqrt();
    Ok(DetectionScaling {
        delta,
        per_channel: gains.iter().map(|h| delta / h).collect(),
    })
}

/// Smallest mean transmit power (dB) at which the average bit-metric rate
/// `(1/L) Σ_ℓ R_bmd,ℓ` reaches `target` under the `Δ / h_ℓ` rule, with unit
/// noise and BRGC labels.
pub fn required_power_db(gains: &[f64], dists: &[InputDistribution], target: f64) -> Result<f64> {
    if gains.len() != dists.len() || gains.is_empty() {
        return Err(Error::domain("one distribution per channel required"));
    }
    let labelings = dists
        .iter()
        .map(|d| Labeling::brgc(d.bits()))
        .collect::<Result<Vec<_>>>()?;
    // the bisection variable is Δ²; channel ℓ then sees SNR Δ² E[A_ℓ²]
    let delta2_db = required_snr_db(
        |delta2| {
            let mut total = 0.0;
            for (d, lab) in dists.iter().zip(&labelings) {
                total += bmd_rate(d, lab, delta2 * d.second_moment())?;
            }
            Ok(total / dists.len() as f64)
        },
        target,
    )?;
    Ok(linear_to_db(db_to_linear(delta2_db) * weighted_power(gains, dists)))
}

/// Required powers of the competing parallel-channel schemes at one rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeComparison {
    pub extended_pdm_db: f64,
    pub individual_db: f64,
    pub uniform_db: f64,
    /// Power at which waterfilling reaches a mean capacity of `r_t`.
    pub waterfilling_db: f64,
    pub extended_pdm_rate_loss: f64,
    pub individual_rate_loss: f64,
}

/// Required mean transmit power of extended PDM, individual DMs and uniform
/// signaling for transmission rate `r_t`. The shaped schemes must deliver
/// `r_t` plus their rate loss.
pub fn compare_parallel_schemes(
    profile: &ChannelProfile,
    channel_bits: &[usize],
    r_t: f64,
    code_rate: f64,
) -> Result<SchemeComparison> {
    let gains = profile.gains();
    let pdm = plan_parallel_pdm(profile, channel_bits, r_t, code_rate, RateAccounting::RateLoss)?;
    let pdm_dists = pdm.channel_distributions()?;
    let pdm_target = pdm.plan.entropy_rate() + pdm.gamma;
    let individual = plan_parallel_individual(profile, channel_bits, r_t, code_rate, RateAccounting::RateLoss)?;
    let ind_dists = individual.channel_distributions()?;
    let ind_target = individual.entropy_rate() + individual.gamma;
    let uniform = channel_bits
        .iter()
        .map(|&m| InputDistribution::uniform(m))
        .collect::<Result<Vec<_>>>()?;
    Ok(SchemeComparison {
        extended_pdm_db: required_power_db(gains, &pdm_dists, pdm_target)?,
        individual_db: required_power_db(gains, &ind_dists, ind_target)?,
        uniform_db: required_power_db(gains, &uniform, r_t)?,
        waterfilling_db: waterfilling_power_db(gains, r_t)?,
        extended_pdm_rate_loss: pdm.rate_loss(),
        individual_rate_loss: individual.rate_loss(),
    })
}

fn waterfilling_power_db(gains: &[f64], r_t: f64) -> Result<f64> {
    required_snr_db(
        |power| Ok(waterfill(&ChannelProfile::new(gains.to_vec(), power, 1)?).mean_capacity()),
        r_t,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::db_to_linear;

    fn example() -> ChannelProfile {
        ChannelProfile::new(vec![2.0, 1.3, 0.6], db_to_linear(17.23), 432).unwrap()
    }

    #[test]
    fn level_lengths_of_example() {
        let plan = plan_parallel_pdm(&example(), &[5, 4, 3], 3.09, 5.0 / 6.0, RateAccounting::RateLoss).unwrap();
        assert_eq!(plan.plan.output_lengths(), vec![1296, 1296, 864, 432]);
        assert!((plan.gamma - 1.0 / 3.0).abs() < 1e-12);
        assert!((plan.plan.rate() - plan.r_dm).abs() < 1.0 / 432.0);
    }

    #[test]
    fn single_channel_matches_product_levels() {
        let profile = ChannelProfile::new(vec![1.0], 100.0, 1000).unwrap();
        let plan = plan_parallel_pdm(&profile, &[4], 2.8, 0.9, RateAccounting::Entropy).unwrap();
        let q = super::super::optimize_product_levels(4, &[2, 3, 4], plan.r_dm).unwrap();
        for (a, b) in plan.p0s.iter().zip(&q) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn symmetric_individual_plan() {
        let profile = ChannelProfile::new(vec![1.5, 1.5], 100.0, 200).unwrap();
        let plan = plan_parallel_individual(&profile, &[4, 4], 2.6, 0.9, RateAccounting::Entropy).unwrap();
        assert_eq!(plan.matchers[0], plan.matchers[1]);
    }

    #[test]
    fn single_individual_is_mb() {
        let profile = ChannelProfile::new(vec![1.0], 100.0, 100).unwrap();
        let plan = plan_parallel_individual(&profile, &[3], 2.0, 0.8, RateAccounting::Entropy).unwrap();
        let nu = super::super::mb_parameter_for_entropy(3, plan.r_dm).unwrap();
        assert!((plan.nu - nu).abs() < 1e-6 * nu.max(1.0));
    }

    #[test]
    fn scaling_meets_power() {
        let dists: Vec<_> = [5, 4, 3].iter().map(|&m| InputDistribution::uniform(m).unwrap()).collect();
        let gains = [2.0, 1.3, 0.6];
        let s = scale_for_detection(&gains, &dists, 52.6).unwrap();
        let mean: f64 = s
            .per_channel
            .iter()
            .zip(&dists)
            .map(|(d, p)| d * d * p.second_moment())
            .sum::<f64>()
            / 3.0;
        assert!((mean - 52.6).abs() < 1e-9 * 52.6);
        assert!((s.per_channel[0] * 2.0 - s.delta).abs() < 1e-12);
        let doubled = scale_for_detection(&[4.0, 1.3, 0.6], &dists, 52.6).unwrap();
        assert!((doubled.per_channel[0] - doubled.delta / 4.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_channel_count() {
        assert!(plan_parallel_pdm(&example(), &[5, 4], 3.09, 5.0 / 6.0, RateAccounting::Entropy).is_err());
    }
}
