//! Per-level product distributions with minimum weighted power.
//!
//! With NBBC amplitudes `A = 1 + 2 Σ_j 2^(m−j) U_j`, where `U_j = 1` iff
//! `B_j = 0` and `q_j = P(B_j = 0)`, the second moment `E[A²]` is affine in
//! every single `q_j`. Minimizing `Σ_ℓ w_ℓ E[A_ℓ²] − μ Σ_j e_j H(q_j)` over one
//! coordinate therefore has the closed form `q_j = 1 / (1 + 2^(α_j / (μ e_j)))`
//! with `α_j` the coordinate slope, and coordinate descent never increases
//! the Lagrangian. The multiplier `μ` is bisected to hit the entropy target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::infotheory::binary_entropy;
use crate::matcher::CcdmConfig;
use crate::pdm::{ExtendedPdmPlan, LevelMatcher, PdmConfig};

const RESTARTS: usize = 8;
const ENTROPY_TOL: f64 = 1e-7;
const FIXED_POINT_ITERS: usize = 20;

/// Weighted power minimization over shared bit-level distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductLevelProblem {
    /// `(m_ℓ, w_ℓ)` per channel.
    channels: Vec<(usize, f64)>,
    /// Entropy weight `e_j` per level `j = 2..=m`.
    level_weights: Vec<f64>,
    shaped: Vec<bool>,
}

impl ProductLevelProblem {
    /// Single `2^m`-ASK channel; `shaped_levels` lists the levels `j ≥ 2` that
    /// are optimized, the others are fixed uniform.
    pub fn single(m: usize, shaped_levels: &[usize]) -> Result<Self> {
        Self::new(vec![(m, 1.0)], vec![1.0; m.saturating_sub(1)], shaped_levels)
    }

    /// Extended PDM over channels with gains `h_ℓ`: weights `1 / h_ℓ²`, level
    /// entropy weights `n_j / (L n)`, all levels shaped.
    pub fn extended(gains: &[f64], channel_bits: &[usize]) -> Result<Self> {
        if gains.len() != channel_bits.len() {
            return Err(Error::domain("one gain per channel required"));
        }
        let lengths = ExtendedPdmPlan::level_lengths(channel_bits, 1);
        let l = channel_bits.len() as f64;
        let weights = lengths.iter().map(|&c| c as f64 / l).collect();
        let channels = channel_bits.iter().zip(gains).map(|(&m, &h)| (m, 1.0 / (h * h))).collect();
        let all: Vec<usize> = (2..lengths.len() + 2).collect();
        Self::new(channels, weights, &all)
    }

    fn new(channels: Vec<(usize, f64)>, level_weights: Vec<f64>, shaped_levels: &[usize]) -> Result<Self> {
        let max_m = channels.iter().map(|c| c.0).max().unwrap_or(0);
        if max_m < 2 {
            return Err(Error::domain("need at least 4-ASK"));
        }
        let mut shaped = vec![false; max_m - 1];
        for &j in shaped_levels {
            if !(2..=max_m).contains(&j) {
                return Err(Error::domain(format!("level {j} outside 2..={max_m}")));
            }
            shaped[j - 2] = true;
        }
        Ok(Self {
            channels,
            level_weights,
            shaped,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.shaped.len()
    }

    pub fn shaped(&self) -> &[bool] {
        &self.shaped
    }

    /// `Σ_ℓ w_ℓ E[A_ℓ²]` for level probabilities `q`.
    pub fn objective(&self, q: &[f64]) -> f64 {
        self.channels
            .iter()
            .map(|&(m, w)| {
                let mut mean = 0.0;
                let mut second = 0.0;
                for j in 2..=m {
                    let s = (1u64 << (m - j)) as f64;
                    let qj = q[j - 2];
                    second += s * s * qj * (1.0 - qj);
                    mean += s * qj;
                }
                // A = 1 + 2V: E[A²] = 4 Var(V) + (1 + 2 E[V])²
                w * (4.0 * second + (1.0 + 2.0 * mean).powi(2))
            })
            .sum()
    }

    /// `Σ_j e_j H(q_j)`.
    pub fn entropy(&self, q: &[f64]) -> f64 {
        q.iter()
            .zip(&self.level_weights)
            .map(|(&p, &e)| e * binary_entropy(p))
            .sum()
    }

    fn slope(&self, q: &[f64], j: usize) -> f64 {
        self.channels
            .iter()
            .filter(|&&(m, _)| m >= j)
            .map(|&(m, w)| {
                let s = (1u64 << (m - j)) as f64;
                let others: f64 = (2..=m)
                    .filter(|&i| i != j)
                    .map(|i| (1u64 << (m - i)) as f64 * q[i - 2])
                    .sum();
                w * (4.0 * s + 4.0 * s * s + 8.0 * s * others)
            })
            .sum()
    }

    fn lagrangian(&self, q: &[f64], mu: f64) -> f64 {
        self.objective(q) - mu * self.entropy(q)
    }

    /// Coordinate descent at fixed multiplier `mu`, starting from `q`.
    fn descend(&self, q: &mut [f64], mu: f64) {
        let mut last = self.lagrangian(q, mu);
        for _ in 0..10_000 {
            let mut moved: f64 = 0.0;
            for j in 2..self.shaped.len() + 2 {
                if !self.shaped[j - 2] {
                    continue;
                }
                let alpha = self.slope(q, j);
                let exponent = alpha / (mu * self.level_weights[j - 2]);
                let next = if exponent > 1000.0 {
                    0.0
                } else {
                    1.0 / (1.0 + exponent.exp2())
                };
                moved = moved.max((next - q[j - 2]).abs());
                q[j - 2] = next;
            }
            let now = self.lagrangian(q, mu);
            debug_assert!(now <= last + 1e-12 * last.abs().max(1.0), "lagrangian increased");
            last = now;
            if moved < 1e-14 {
                break;
            }
        }
    }

    fn initial(&self, rng: Option<&mut ChaCha8Rng>) -> Vec<f64> {
        let mut q = vec![0.5; self.shaped.len()];
        match rng {
            Some(rng) => {
                for (qj, &s) in q.iter_mut().zip(&self.shaped) {
                    if s {
                        *qj = rng.gen_range(0.01..0.5);
                    }
                }
            }
            None => {
                for (qj, &s) in q.iter_mut().zip(&self.shaped) {
                    if s {
                        *qj = 0.25;
                    }
                }
            }
        }
        q
    }

    /// Minimizes the weighted power subject to `Σ_j e_j H(q_j) = target`.
    pub fn solve(&self, target: f64) -> Result<Vec<f64>> {
        let fixed: f64 = self
            .level_weights
            .iter()
            .zip(&self.shaped)
            .filter(|(_, &s)| !s)
            .map(|(e, _)| e)
            .sum();
        let max: f64 = self.level_weights.iter().sum();
        if target > max + ENTROPY_TOL || target < fixed - ENTROPY_TOL {
            return Err(Error::Planning {
                message: format!("entropy target {target} outside feasible range [{fixed}, {max}]"),
                last_iterate: None,
            });
        }
        if target >= max - 1e-12 {
            return Ok(vec![0.5; self.shaped.len()]);
        }
        if target <= fixed + 1e-15 {
            return Ok(self
                .shaped
                .iter()
                .map(|&s| if s { 0.0 } else { 0.5 })
                .collect());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for restart in 0..RESTARTS {
            let start = if restart == 0 {
                self.initial(None)
            } else {
                self.initial(Some(&mut rng))
            };
            let Some(q) = self.solve_from(&start, target) else { continue };
            let obj = self.objective(&q);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, q));
            }
        }
        best.map(|(_, q)| q).ok_or_else(|| Error::Planning {
            message: format!("no restart met entropy target {target}"),
            last_iterate: None,
        })
    }

    fn solve_from(&self, start: &[f64], target: f64) -> Option<Vec<f64>> {
        let run = |log_mu: f64| {
            let mut q = start.to_vec();
            self.descend(&mut q, log_mu.exp2());
            q
        };
        let (mut lo, mut hi) = (-60.0, 80.0);
        let mut q = run(hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let candidate = run(mid);
            let h = self.entropy(&candidate);
            if (h - target).abs() < 0.1 * ENTROPY_TOL {
                return Some(candidate);
            }
            if h < target {
                lo = mid;
            } else {
                hi = mid;
                q = candidate;
            }
        }
        ((self.entropy(&q) - target).abs() < ENTROPY_TOL).then_some(q)
    }
}

/// Power-minimizing `P(B_j = 0)`, `j = 2..=m`, for a PDM whose levels in
/// `shaped_levels` carry total entropy `rate_dm` together with the uniform
/// levels.
pub fn optimize_product_levels(m: usize, shaped_levels: &[usize], rate_dm: f64) -> Result<Vec<f64>> {
    ProductLevelProblem::single(m, shaped_levels)?.solve(rate_dm)
}

/// Rate-loss-aware design: iterates entropy targets until the quantized
/// binary matchers at length `n` reach `Σ k_j / n` within `1 / n` of
/// `rate_dm`. If the iteration stalls between composition steps, the
/// cheapest compositions within two counts per level that meet the
/// tolerance are used.
pub fn optimize_with_rate_loss(m: usize, shaped_levels: &[usize], rate_dm: f64, n: usize) -> Result<PdmConfig> {
    let problem = ProductLevelProblem::single(m, shaped_levels)?;
    let (_, matchers) = rate_loss_fixed_point(&problem, rate_dm, &vec![n; m - 1], n, 1)?;
    PdmConfig::new(m, n, matchers)
}

/// Fixed point shared by single- and multi-channel designs. Returns the
/// continuous level probabilities of the last iterate and its matchers.
pub(crate) fn rate_loss_fixed_point(
    problem: &ProductLevelProblem,
    rate_dm: f64,
    level_lengths: &[usize],
    n: usize,
    channels: usize,
) -> Result<(Vec<f64>, Vec<LevelMatcher>)> {
    let uses = (n * channels) as f64;
    let mut target = rate_dm;
    let mut last = Vec::new();
    for _ in 0..FIXED_POINT_ITERS {
        let q = match problem.solve(target) {
            Ok(q) => q,
            Err(Error::Planning { message, .. }) => {
                return Err(Error::Planning {
                    message,
                    last_iterate: Some(last),
                })
            }
            Err(e) => return Err(e),
        };
        let matchers = quantize_levels(problem.shaped(), &q, level_lengths)?;
        let k: usize = matchers
            .iter()
            .zip(level_lengths)
            .map(|(mt, &len)| mt.input_len(len))
            .sum();
        let rate = k as f64 / uses;
        if (rate - rate_dm).abs() < 1.0 / n as f64 {
            return Ok((q, matchers));
        }
        target += rate_dm - rate;
        last = q;
    }
    if let Some(found) = nearby_compositions(problem, &last, level_lengths, rate_dm * uses, 1.0 / n as f64 * uses)? {
        return Ok(found);
    }
    Err(Error::Planning {
        message: format!("rate-loss iteration did not reach {rate_dm} in {FIXED_POINT_ITERS} steps"),
        last_iterate: Some(last),
    })
}

/// Count offsets tried per shaped level around the last iterate.
const NEIGHBORHOOD: i64 = 2;

/// Cheapest compositions within `NEIGHBORHOOD` counts of the quantized `q`
/// whose total input length is within `tol` bits of `bits`.
fn nearby_compositions(
    problem: &ProductLevelProblem,
    q: &[f64],
    lengths: &[usize],
    bits: f64,
    tol: f64,
) -> Result<Option<(Vec<f64>, Vec<LevelMatcher>)>> {
    if q.is_empty() {
        return Ok(None);
    }
    let base = quantize_levels(problem.shaped(), q, lengths)?;
    let mut options: Vec<Vec<(f64, usize, LevelMatcher)>> = Vec::with_capacity(base.len());
    for (matcher, &len) in base.iter().zip(lengths) {
        let level = match matcher {
            LevelMatcher::Uniform => vec![(0.5, len, LevelMatcher::Uniform)],
            LevelMatcher::Shaped(ccdm) => {
                let zeros = ccdm.composition().counts()[0] as i64;
                (-NEIGHBORHOOD..=NEIGHBORHOOD)
                    .map(|d| zeros + d)
                    .filter(|&c| c > 0 && c < len as i64)
                    .map(|c| {
                        let c = c as usize;
                        let ccdm = CcdmConfig::from_counts(vec![c, len - c])?;
                        Ok((c as f64 / len as f64, ccdm.input_len(), LevelMatcher::Shaped(ccdm)))
                    })
                    .collect::<Result<_>>()?
            }
        };
        options.push(level);
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut pick = vec![0usize; options.len()];
    loop {
        let k: usize = pick.iter().zip(&options).map(|(&i, o)| o[i].1).sum();
        if (k as f64 - bits).abs() < tol {
            let p: Vec<f64> = pick.iter().zip(&options).map(|(&i, o)| o[i].0).collect();
            let cost = problem.objective(&p);
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, pick.clone()));
            }
        }
        let mut level = 0;
        while level < pick.len() {
            pick[level] += 1;
            if pick[level] < options[level].len() {
                break;
            }
            pick[level] = 0;
            level += 1;
        }
        if level == pick.len() {
            break;
        }
    }
    Ok(best.map(|(_, pick)| {
        pick.iter()
            .zip(&options)
            .map(|(&i, o)| (o[i].0, o[i].2.clone()))
            .unzip()
    }))
}

pub(crate) fn quantize_levels(shaped: &[bool], q: &[f64], lengths: &[usize]) -> Result<Vec<LevelMatcher>> {
    shaped
        .iter()
        .zip(q)
        .zip(lengths)
        .map(|((&s, &p), &len)| {
            if s {
                Ok(LevelMatcher::Shaped(CcdmConfig::for_distribution(&[p, 1.0 - p], len)?))
            } else {
                Ok(LevelMatcher::Uniform)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::InputDistribution;
    use crate::constellation::Labeling;

    #[test]
    fn objective_matches_distribution() {
        let p = ProductLevelProblem::single(4, &[2, 3, 4]).unwrap();
        let q = [0.2, 0.35, 0.45];
        let d = InputDistribution::from_levels(Labeling::nbbc(4).unwrap(), &q).unwrap();
        assert!((p.objective(&q) - d.second_moment()).abs() < 1e-12);
    }

    #[test]
    fn uniform_optimum_at_full_rate() {
        let q = optimize_product_levels(4, &[2, 3, 4], 3.0).unwrap();
        assert_eq!(q, vec![0.5; 3]);
    }

    #[test]
    fn one_level_collapses_to_bisection() {
        let mut prev = 0.0;
        for h in [0.2, 0.5, 0.8, 0.95] {
            let q = optimize_product_levels(3, &[2], 1.0 + h).unwrap();
            assert_eq!(q[1], 0.5);
            assert!((binary_entropy(q[0]) - h).abs() < 1e-7);
            assert!(q[0] < 0.5 && q[0] > prev);
            prev = q[0];
        }
    }

    #[test]
    fn entropy_constraint_is_met() {
        for (m, shaped, r) in [(6, vec![2, 3, 4], 4.1), (6, vec![2], 4.1), (3, vec![2, 3], 1.4)] {
            let q = optimize_product_levels(m, &shaped, r).unwrap();
            let h: f64 = q.iter().map(|&p| binary_entropy(p)).sum();
            assert!((h - r).abs() < 1e-7, "{h} vs {r}");
        }
        assert!(optimize_product_levels(6, &[2], 3.5).is_err());
        assert!(optimize_product_levels(3, &[2, 3], 2.5).is_err());
    }

    #[test]
    fn rate_loss_small_case() {
        let pdm = optimize_with_rate_loss(2, &[2], 0.5, 4).unwrap();
        let level = pdm.levels().next().unwrap();
        match level {
            LevelMatcher::Shaped(c) => {
                assert_eq!(c.composition().counts(), &[2, 2]);
                assert_eq!(c.input_len(), 2);
            }
            LevelMatcher::Uniform => panic!("expected shaped level"),
        }
        assert_eq!(pdm.rate(), 0.5);
    }
}
