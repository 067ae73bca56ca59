//! Distribution optimization and bit loading.
//!
//! Covers single-channel design (Maxwell–Boltzmann amplitudes or per-level
//! product distributions, optionally corrected for matcher rate loss) and
//! parallel-channel design (waterfilling, constellation sizing, extended PDM
//! or per-channel matchers, and the `Δ / h_ℓ` scaling rule).

mod levels;
mod mb;
mod parallel;
pub mod search;
mod waterfill;

pub use levels::{optimize_product_levels, optimize_with_rate_loss, ProductLevelProblem};
pub use mb::{mb_distribution, mb_parameter_for_entropy, optimize_mb_amplitudes};
pub use parallel::{
    compare_parallel_schemes, plan_parallel_individual, plan_parallel_pdm, required_power_db,
    scale_for_detection, DetectionScaling, IndividualPlan, ParallelPdmPlan, RateAccounting,
    SchemeComparison,
};
pub use waterfill::{choose_constellations, waterfill, ChannelAllocation, ChannelProfile, WaterfillingPlan};

use serde::{Deserialize, Serialize};

use crate::constellation::Labeling;
use crate::error::{Error, Result};
use crate::infotheory::{required_snr_fixed, InputDistribution};

/// Amplitude distribution matcher structure of a single-channel design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmConfiguration {
    /// One `2^(m−1)`-ary matcher with a Maxwell–Boltzmann target.
    Amplitude,
    /// PDM with the given number of leading shaped levels.
    Pdm { shaped: usize },
}

impl std::fmt::Display for DmConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DmConfiguration::Amplitude => write!(f, "amplitude DM"),
            DmConfiguration::Pdm { shaped: 1 } => write!(f, "PDM, 1 bit shaped"),
            DmConfiguration::Pdm { shaped } => write!(f, "PDM, {shaped} bits shaped"),
        }
    }
}

/// Power-optimal distribution of `configuration` with amplitude entropy `r_dm`.
pub fn design_distribution(m: usize, configuration: DmConfiguration, r_dm: f64) -> Result<InputDistribution> {
    match configuration {
        DmConfiguration::Amplitude => optimize_mb_amplitudes(m, r_dm),
        DmConfiguration::Pdm { shaped } => {
            if shaped == 0 || shaped + 1 > m {
                return Err(Error::domain(format!("cannot shape {shaped} of {} amplitude bits", m - 1)));
            }
            let q = optimize_product_levels(m, &leading_levels(shaped), r_dm)?;
            InputDistribution::from_levels(Labeling::nbbc(m)?, &q)
        }
    }
}

/// One row of a required-SNR comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequiredSnrRow {
    pub configuration: DmConfiguration,
    pub required_snr_db: f64,
}

/// Required SNR for PAS at transmission rate `r_t` with code rate
/// `code_rate` on `2^m`-ASK, for each configuration. The distribution is
/// designed for `R_dm = r_t − γ` and scaled until the bit-metric rate under
/// BRGC reaches `r_t`.
pub fn required_snr_table(m: usize, r_t: f64, code_rate: f64, configurations: &[DmConfiguration]) -> Result<Vec<RequiredSnrRow>> {
    let gamma = derive_gamma(m as f64, code_rate)?;
    let fec = Labeling::brgc(m)?;
    configurations
        .iter()
        .map(|&configuration| {
            let dist = design_distribution(m, configuration, r_t - gamma)?;
            Ok(RequiredSnrRow {
                configuration,
                required_snr_db: required_snr_fixed(&dist, &fec, r_t)?,
            })
        })
        .collect()
}

/// Fraction of sign bits carrying data, `γ = 1 − (1 − c) · m̄`, where `m̄` is
/// the (mean) number of bits per symbol.
pub fn derive_gamma(mean_bits: f64, code_rate: f64) -> Result<f64> {
    if !(code_rate > 0.0 && code_rate <= 1.0) {
        return Err(Error::config(format!("code rate must lie in (0, 1], got {code_rate}")));
    }
    let gamma = 1.0 - (1.0 - code_rate) * mean_bits;
    match gamma {
        g if (-1e-12..0.0).contains(&g) => Ok(0.0),
        g if (1.0..1.0 + 1e-12).contains(&g) => Ok(1.0),
        g if (0.0..=1.0).contains(&g) => Ok(g),
        g => Err(Error::config(format!("PAS requires 0 ≤ γ ≤ 1, got γ = {g}"))),
    }
}

/// Levels `2..=shaped + 1`, i.e. the `shaped` most significant amplitude bits.
pub fn leading_levels(shaped: usize) -> Vec<usize> {
    (2..shaped + 2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert!((derive_gamma(6.0, 0.9).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(derive_gamma(4.0, 3.0 / 4.0).unwrap(), 0.0);
        let g = derive_gamma((5.0 + 4.0 + 3.0) / 3.0, 5.0 / 6.0).unwrap();
        assert!((g - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(derive_gamma(3.0, 0.5), Err(Error::Config(_))));
        assert!(derive_gamma(3.0, 0.0).is_err());
    }
}
