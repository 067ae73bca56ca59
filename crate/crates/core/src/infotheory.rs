//! Entropies and achievable rates of shaped ASK over the unit-variance AWGN
//! channel.
//!
//! The channel is `Y = Δ·X + Z` with `X` an ASK point and `Z ~ N(0, 1)`, so
//! the SNR is `Δ² E[X²]`. Conditional entropies `H(B_j | Y)` are expectations
//! over the noise for each transmitted point and are evaluated with
//! Gauss–Hermite quadrature, doubling the node count until two successive
//! estimates agree.

use crate::constellation::{AskConstellation, LabelKind, Labeling};
use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Entropy of a Bernoulli variable with `P(0) = p`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Capacity `0.5 log2(1 + snr)` of the real Gaussian channel.
pub fn gaussian_capacity(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// A symmetric input distribution on `2^m`-ASK: an amplitude distribution
/// combined with an independent uniform sign.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    constellation: AskConstellation,
    amplitude_probs: Vec<f64>,
}

impl InputDistribution {
    /// `probs[v]` is the probability of amplitude `2v + 1`.
    pub fn from_amplitudes(m: usize, probs: Vec<f64>) -> Result<Self> {
        let constellation = AskConstellation::new(m)?;
        if probs.len() != constellation.num_amplitudes() {
            return Err(Error::domain(format!(
                "{}-ASK needs {} amplitude probabilities, got {}",
                constellation.order(),
                constellation.num_amplitudes(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::domain("probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("amplitude probabilities sum to {total}")));
        }
        let amplitude_probs = probs.iter().map(|p| p / total).collect();
        Ok(Self {
            constellation,
            amplitude_probs,
        })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        let c = AskConstellation::new(m)?;
        let a = c.num_amplitudes();
        Self::from_amplitudes(m, vec![1.0 / a as f64; a])
    }

    /// Product distribution over the amplitude bits `B2 … Bm` of `labeling`
    /// with `p0[j - 2] = P(B_j = 0)`.
    pub fn from_levels(labeling: Labeling, p0: &[f64]) -> Result<Self> {
        let m = labeling.bits();
        if p0.len() != m - 1 {
            return Err(Error::domain(format!(
                "{m} bits per symbol need {} level probabilities, got {}",
                m - 1,
                p0.len()
            )));
        }
        if p0.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain("level probabilities must lie in [0, 1]"));
        }
        let num = 1usize << (m - 1);
        let probs = (0..num)
            .map(|v| {
                let label = labeling.amplitude_label_index(v);
                p0.iter()
                    .enumerate()
                    .map(|(j, &p)| {
                        let bit = (label >> (m - 2 - j)) & 1;
                        if bit == 0 {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            })
            .collect();
        Self::from_amplitudes(m, probs)
    }

    pub fn bits(&self) -> usize {
        self.constellation.bits()
    }

    pub fn constellation(&self) -> AskConstellation {
        self.constellation
    }

    pub fn amplitude_probs(&self) -> &[f64] {
        &self.amplitude_probs
    }

    /// Probabilities of the signal points in ascending order.
    pub fn point_probs(&self) -> Vec<f64> {
        let half = self.amplitude_probs.len();
        (0..2 * half)
            .map(|i| {
                let v = if i >= half { i - half } else { half - 1 - i };
                0.5 * self.amplitude_probs[v]
            })
            .collect()
    }

    /// `E[A²]` on the unscaled constellation.
    pub fn second_moment(&self) -> f64 {
        self.amplitude_probs
            .iter()
            .enumerate()
            .map(|(v, p)| p * ((2 * v + 1) as f64).powi(2))
            .sum()
    }

    pub fn amplitude_entropy(&self) -> f64 {
        entropy(&self.amplitude_probs)
    }

    /// `H(X) = 1 + H(A)`.
    pub fn entropy(&self) -> f64 {
        1.0 + self.amplitude_entropy()
    }

    /// Scaling `Δ` that puts the average power at `snr`.
    pub fn scale_for_snr(&self, snr: f64) -> f64 {
        (snr / self.second_moment()).sqrt()
    }

    /// Marginals `P(B_j = 0)`, `j = 1..=m`, under `labeling`.
    pub fn bit_marginals(&self, labeling: &Labeling) -> Vec<f64> {
        let m = self.bits();
        let mut p0 = vec![0.0; m];
        for (i, p) in self.point_probs().into_iter().enumerate() {
            let label = labeling.label_index(i);
            for (j, slot) in p0.iter_mut().enumerate() {
                if (label >> (m - 1 - j)) & 1 == 0 {
                    *slot += p;
                }
            }
        }
        p0
    }
}

/// Conditional bit entropies `H(B_j | Y)`, `j = 1..=m`, at scaling `delta`.
pub fn bit_conditional_entropies(
    dist: &InputDistribution,
    labeling: &Labeling,
    delta: f64,
) -> Result<Vec<f64>> {
    check_labeling(dist, labeling)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::domain(format!("invalid constellation scaling {delta}")));
    }
    let mut previous = conditional_entropies_with(dist, labeling, delta, GaussHermite::cached(0));
    for level in 1..4 {
        let next = conditional_entropies_with(dist, labeling, delta, GaussHermite::cached(level));
        let diff: f64 = next.iter().zip(&previous).map(|(a, b)| (a - b).abs()).sum();
        if diff < 1e-7 {
            return Ok(next);
        }
        previous = next;
    }
    Err(Error::numeric(format!(
        "quadrature did not converge at scaling {delta} with 512 nodes"
    )))
}

fn check_labeling(dist: &InputDistribution, labeling: &Labeling) -> Result<()> {
    if dist.bits() != labeling.bits() {
        return Err(Error::domain(format!(
            "distribution has {} bits per symbol, labeling has {}",
            dist.bits(),
            labeling.bits()
        )));
    }
    Ok(())
}

fn conditional_entropies_with(
    dist: &InputDistribution,
    labeling: &Labeling,
    delta: f64,
    rule: &GaussHermite,
) -> Vec<f64> {
    let m = dist.bits();
    let probs = dist.point_probs();
    // support only
    let support: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    let xs: Vec<f64> = support
        .iter()
        .map(|&i| delta * dist.constellation.point(i) as f64)
        .collect();
    let log_p: Vec<f64> = support.iter().map(|&i| probs[i].ln()).collect();
    let labels: Vec<usize> = support.iter().map(|&i| labeling.label_index(i)).collect();
    let mut out = vec![0.0; m];
    let mut ll = vec![0.0; support.len()];
    let mut e = vec![0.0; support.len()];
    for (t, &x) in xs.iter().enumerate() {
        let weight_t = probs[support[t]];
        for (&z, &w) in rule.nodes().iter().zip(rule.weights()) {
            if w == 0.0 {
                continue;
            }
            let y = x + z;
            let mut max = f64::NEG_INFINITY;
            for k in 0..xs.len() {
                let d = y - xs[k];
                ll[k] = log_p[k] - 0.5 * d * d;
                max = max.max(ll[k]);
            }
            let mut total = 0.0;
            for k in 0..xs.len() {
                e[k] = (ll[k] - max).exp();
                total += e[k];
            }
            for (j, acc) in out.iter_mut().enumerate() {
                let shift = m - 1 - j;
                let own = (labels[t] >> shift) & 1;
                let mut same = 0.0;
                for k in 0..xs.len() {
                    if (labels[k] >> shift) & 1 == own {
                        same += e[k];
                    }
                }
                // -log2 P(b_j | y)
                let nll = if same > 0.0 {
                    (total / same).ln()
                } else {
                    let coset_max = (0..xs.len())
                        .filter(|&k| (labels[k] >> shift) & 1 == own)
                        .map(|k| ll[k])
                        .fold(f64::NEG_INFINITY, f64::max);
                    let coset_sum: f64 = (0..xs.len())
                        .filter(|&k| (labels[k] >> shift) & 1 == own)
                        .map(|k| (ll[k] - coset_max).exp())
                        .sum();
                    max + total.ln() - coset_max - coset_sum.ln()
                };
                *acc += weight_t * w * nll;
            }
        }
    }
    out.iter().map(|v| v / std::f64::consts::LN_2).collect()
}

/// Bit-metric decoding rate `[H(X) − Σ_j H(B_j | Y)]^+` at linear `snr`.
pub fn bmd_rate(dist: &InputDistribution, labeling: &Labeling, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let delta = dist.scale_for_snr(snr);
    let cond: f64 = bit_conditional_entropies(dist, labeling, delta)?.iter().sum();
    Ok((dist.entropy() - cond).max(0.0))
}

/// Rate `[Σ_j H(B_j^dm) − Σ_j H(B_j^fec | Y)]^+` for a product distribution
/// over the amplitude bits of `dm`, `p0[j - 2] = P(B_j^dm = 0)`.
pub fn bmd_rate_product(dm: &Labeling, p0: &[f64], fec: &Labeling, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let dist = InputDistribution::from_levels(*dm, p0)?;
    let delta = dist.scale_for_snr(snr);
    let cond: f64 = bit_conditional_entropies(&dist, fec, delta)?.iter().sum();
    let level_entropy: f64 = 1.0 + p0.iter().map(|&p| binary_entropy(p)).sum::<f64>();
    Ok((level_entropy - cond).max(0.0))
}

/// BICM rate `Σ_j I(B_j; Y)` under `labeling`.
pub fn bicm_rate(dist: &InputDistribution, labeling: &Labeling, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let delta = dist.scale_for_snr(snr);
    let cond = bit_conditional_entropies(dist, labeling, delta)?;
    let marg = dist.bit_marginals(labeling);
    Ok(marg
        .iter()
        .zip(&cond)
        .map(|(&p, &h)| (binary_entropy(p) - h).max(0.0))
        .sum())
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_finite() && snr > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("snr must be positive, got {snr}")))
    }
}

/// Lower and upper end of the SNR search bracket in dB.
pub const SNR_BRACKET_DB: (f64, f64) = (-10.0, 60.0);

/// Smallest SNR (dB) at which the nondecreasing `rate_at` reaches `target`,
/// found by bisection in dB to within `1e-4` dB.
pub fn required_snr_db(
    mut rate_at: impl FnMut(f64) -> Result<f64>,
    target: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = SNR_BRACKET_DB;
    if rate_at(db_to_linear(hi))? < target {
        return Err(Error::domain(format!(
            "rate {target} is not reached below {hi} dB"
        )));
    }
    if rate_at(db_to_linear(lo))? >= target {
        return Err(Error::domain(format!(
            "rate {target} is already exceeded at {lo} dB"
        )));
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if rate_at(db_to_linear(mid))? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `R_bmd^{-1}(P_X, target)` in dB for a fixed distribution, rescaling `Δ`.
pub fn required_snr_fixed(dist: &InputDistribution, labeling: &Labeling, target: f64) -> Result<f64> {
    required_snr_db(|snr| bmd_rate(dist, labeling, snr), target)
}

/// SNR penalty in dB of operating at `r_t + r_loss` instead of `r_t`.
pub fn snr_loss_db(dist: &InputDistribution, labeling: &Labeling, r_t: f64, r_loss: f64) -> Result<f64> {
    if r_loss == 0.0 {
        return Ok(0.0);
    }
    let base = required_snr_fixed(dist, labeling, r_t)?;
    let lossy = required_snr_fixed(dist, labeling, r_t + r_loss)?;
    Ok(lossy - base)
}

/// SNR penalty in dB on the Gaussian channel,
/// `10 log10((2^(2(r_t + r_loss)) − 1) / (2^(2 r_t) − 1))`.
pub fn snr_loss_rule_of_thumb(r_t: f64, r_loss: f64) -> f64 {
    linear_to_db((2f64.powf(2.0 * (r_t + r_loss)) - 1.0) / (2f64.powf(2.0 * r_t) - 1.0))
}

/// First-order form of [`snr_loss_rule_of_thumb`]: `20 log10(2)` dB per bit.
pub fn snr_loss_linearized(r_loss: f64) -> f64 {
    r_loss * 20.0 * 2f64.log10()
}

/// Labeling pair used throughout: NBBC on the matcher side, BRGC for the code.
pub fn default_labelings(m: usize) -> Result<(Labeling, Labeling)> {
    Ok((Labeling::new(LabelKind::Nbbc, m)?, Labeling::new(LabelKind::Brgc, m)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((binary_entropy(0.2522) - 0.8148).abs() < 1e-4);
    }

    #[test]
    fn product_distribution_layout() {
        let nbbc = Labeling::nbbc(3).unwrap();
        // P(B2=0) = 0.25: the larger half {5, 7} gets 0.25 in total.
        let d = InputDistribution::from_levels(nbbc, &[0.25, 0.5]).unwrap();
        let p = d.amplitude_probs();
        assert!((p[0] - 0.375).abs() < 1e-12 && (p[3] - 0.125).abs() < 1e-12);
        let marg = d.bit_marginals(&nbbc);
        assert!((marg[0] - 0.5).abs() < 1e-12);
        assert!((marg[1] - 0.25).abs() < 1e-12);
        assert!((marg[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_prior_levels_are_half() {
        let d = InputDistribution::uniform(4).unwrap();
        for p in d.bit_marginals(&Labeling::brgc(4).unwrap()) {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rates_vanish_at_low_snr_and_respect_bounds() {
        let d = InputDistribution::uniform(3).unwrap();
        let l = Labeling::brgc(3).unwrap();
        let r = bmd_rate(&d, &l, 1e-6).unwrap();
        assert!((0.0..1e-5).contains(&r));
        let bicm = bicm_rate(&d, &l, 10.0).unwrap();
        assert!(bicm <= 3.0 + 1e-12);
        assert!(bmd_rate(&d, &l, 0.0).is_err());
    }

    #[test]
    fn single_level_bmd_equals_bicm() {
        let d = InputDistribution::uniform(1).unwrap();
        let l = Labeling::brgc(1).unwrap();
        for snr in [0.3, 1.0, 4.0] {
            let a = bmd_rate(&d, &l, snr).unwrap();
            let b = bicm_rate(&d, &l, snr).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity_anchor() {
        let snr = required_snr_db(|s| Ok(gaussian_capacity(s)), 4.5).unwrap();
        assert!((snr - 10.0 * 511f64.log10()).abs() < 1e-3);
        assert!((snr - 27.08).abs() < 0.01);
        assert!(required_snr_db(|s| Ok(gaussian_capacity(s)), 20.0).is_err());
    }

    #[test]
    fn rule_of_thumb() {
        assert_eq!(snr_loss_rule_of_thumb(4.5, 0.0), 0.0);
        assert!((snr_loss_linearized(0.1) - 0.602).abs() < 1e-3);
        assert!((snr_loss_rule_of_thumb(4.5, 0.1) - snr_loss_linearized(0.1)).abs() < 0.01);
        let v = snr_loss_rule_of_thumb(3.09, 0.07);
        assert!((v - 0.42).abs() < 0.01, "{v}");
    }
}
