//! Bitwise soft demapping for ASK with non-uniform priors.

use crate::constellation::Labeling;
use crate::error::{Error, Result};
use crate::infotheory::InputDistribution;

use super::code::LLR_MAX;

/// Computes `L_j = log(Σ_{x: b_j = 0} P(x) p(y|x) / Σ_{x: b_j = 1} P(x) p(y|x))`
/// for unit-variance Gaussian noise and received points `Δ x`.
#[derive(Debug, Clone)]
pub struct Demapper {
    m: usize,
    points: Vec<f64>,
    log_priors: Vec<f64>,
    labels: Vec<usize>,
}

impl Demapper {
    pub fn new(dist: &InputDistribution, labeling: &Labeling) -> Result<Self> {
        if dist.bits() != labeling.bits() {
            return Err(Error::domain("distribution and labeling disagree on the constellation"));
        }
        let c = dist.constellation();
        let probs = dist.point_probs();
        Ok(Self {
            m: labeling.bits(),
            points: c.points().iter().map(|&x| x as f64).collect(),
            log_priors: probs.iter().map(|&p| p.ln()).collect(),
            labels: (0..c.order()).map(|i| labeling.label_index(i)).collect(),
        })
    }

    pub fn bits(&self) -> usize {
        self.m
    }

    /// LLRs of `B1 … Bm` for every received value, symbol-major, clipped to
    /// `±LLR_MAX`.
    pub fn llrs(&self, y: &[f64], delta: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(y.len() * self.m);
        let mut metrics = vec![0.0; self.points.len()];
        for &yi in y {
            for ((metric, &x), &lp) in metrics.iter_mut().zip(&self.points).zip(&self.log_priors) {
                let d = yi - delta * x;
                *metric = lp - 0.5 * d * d;
            }
            for j in 0..self.m {
                let shift = self.m - 1 - j;
                let mut zero = f64::NEG_INFINITY;
                let mut one = f64::NEG_INFINITY;
                for (&metric, &label) in metrics.iter().zip(&self.labels) {
                    if (label >> shift) & 1 == 0 {
                        zero = log_add(zero, metric);
                    } else {
                        one = log_add(one, metric);
                    }
                }
                let l = if zero == one { 0.0 } else { zero - one };
                out.push(l.clamp(-LLR_MAX, LLR_MAX));
            }
        }
        out
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_prior_zero_at_origin() {
        let d = Demapper::new(&InputDistribution::uniform(3).unwrap(), &Labeling::brgc(3).unwrap()).unwrap();
        let l = d.llrs(&[0.0], 1.0);
        assert!(l[0].abs() < 1e-12);
        // BRGC gives the inner points B2 = 1
        assert!(l[1] < 0.0);
    }

    #[test]
    fn sign_convention() {
        let d = Demapper::new(&InputDistribution::uniform(3).unwrap(), &Labeling::brgc(3).unwrap()).unwrap();
        // sign bit is 1 on positive points
        assert_eq!(d.llrs(&[1e3], 1.0)[0], -LLR_MAX);
        assert_eq!(d.llrs(&[-1e3], 1.0)[0], LLR_MAX);
        let l = d.llrs(&[5.0], 1.0);
        // nearest point +5 has BRGC label 101
        assert!(l[0] < 0.0 && l[1] > 0.0 && l[2] < 0.0);
    }

    #[test]
    fn prior_shifts_llr() {
        let lab = Labeling::nbbc(2).unwrap();
        let skew = InputDistribution::from_amplitudes(2, vec![0.8, 0.2]).unwrap();
        let d = Demapper::new(&skew, &lab).unwrap();
        // midway between +Δ and +3Δ only the prior is left
        let l = d.llrs(&[20.0], 10.0);
        // NBBC: amplitude 1 has B2 = 1
        assert!((l[1] - (0.2f64 / 0.8).ln()).abs() < 1e-6);
    }
}
