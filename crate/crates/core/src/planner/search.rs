//! Rate maximization over distribution families at a fixed SNR.
//!
//! At fixed SNR the scaling `Δ` follows from the power of the distribution,
//! so maximizing over the distribution optimizes `Δ` jointly with it.

use crate::constellation::{LabelKind, Labeling};
use crate::error::{Error, Result};
use crate::infotheory::{bicm_rate, bmd_rate, required_snr_db, InputDistribution};

/// Distribution family and the rate evaluated on it. The receiver label is
/// chosen separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Any symmetric distribution, bit-metric rate.
    Full,
    /// Maxwell–Boltzmann amplitudes, bit-metric rate.
    MaxwellBoltzmann,
    /// Product of NBBC level distributions, bit-metric rate.
    Product,
    /// Product of the receiver label's bit distributions, BICM rate.
    BicmProduct,
}

/// Downhill simplex minimization of `f` from `x0`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_evals: usize,
) -> Result<(Vec<f64>, f64)> {
    let d = x0.len();
    if d == 0 {
        return Ok((Vec::new(), f(x0)?));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), f(x0)?));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x)?;
        simplex.push((x, v));
    }
    let mut evals = d + 1;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() <= tol && size <= tol.sqrt() {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|i| simplex[..d].iter().map(|(x, _)| x[i]).sum::<f64>() / d as f64)
            .collect();
        let worst = simplex[d].clone();
        let reflected = combine(&centroid, &worst.0, -1.0);
        let fr = f(&reflected)?;
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let fe = f(&expanded)?;
            evals += 1;
            simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = combine(&centroid, target, 0.5);
            let fc = f(&contracted)?;
            evals += 1;
            if fc < ft {
                simplex[d] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &entry.0, 0.5);
                    let v = f(&x)?;
                    *entry = (x, v);
                }
                evals += d;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(simplex.swap_remove(0))
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn softmax_last_zero(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(0.0, f64::max);
    let mut w: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    w.push((-max).exp());
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

struct Evaluator {
    m: usize,
    family: Family,
    fec: Labeling,
    nbbc: Labeling,
    snr: f64,
}

impl Evaluator {
    fn distribution(&self, x: &[f64]) -> Result<InputDistribution> {
        match self.family {
            Family::Full => InputDistribution::from_amplitudes(self.m, softmax_last_zero(x)),
            Family::MaxwellBoltzmann => super::mb_distribution(self.m, x[0].exp()),
            Family::Product => InputDistribution::from_levels(self.nbbc, &x.iter().map(|&v| logistic(v)).collect::<Vec<_>>()),
            Family::BicmProduct => InputDistribution::from_levels(self.fec, &x.iter().map(|&v| logistic(v)).collect::<Vec<_>>()),
        }
    }

    fn rate(&self, dist: &InputDistribution) -> Result<f64> {
        match self.family {
            Family::BicmProduct => bicm_rate(dist, &self.fec, self.snr),
            _ => bmd_rate(dist, &self.fec, self.snr),
        }
    }

    fn maximize(&self, starts: &[Vec<f64>]) -> Result<(f64, InputDistribution)> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for x0 in starts {
            let (x, v) = nelder_mead(|x| Ok(-self.rate(&self.distribution(x)?)?), x0, 0.5, 1e-10, 4000)?;
            if best.as_ref().is_none_or(|(b, _)| -v > *b) {
                best = Some((-v, x));
            }
        }
        let (rate, x) = best.ok_or_else(|| Error::numeric("no starting point"))?;
        Ok((rate, self.distribution(&x)?))
    }
}

/// Largest rate of `family` on `2^m`-ASK at linear `snr` under a BRGC
/// receiver, with the maximizer.
pub fn best_rate(m: usize, family: Family, snr: f64) -> Result<(f64, InputDistribution)> {
    best_rate_with(m, family, LabelKind::Brgc, snr)
}

/// [`best_rate`] for the receiver label `fec`. The full family is started
/// from the product optimum and can only improve on it.
pub fn best_rate_with(m: usize, family: Family, fec: LabelKind, snr: f64) -> Result<(f64, InputDistribution)> {
    if m < 2 {
        return Err(Error::domain("need at least 4-ASK"));
    }
    let eval = Evaluator {
        m,
        family,
        fec: Labeling::new(fec, m)?,
        nbbc: Labeling::nbbc(m)?,
        snr,
    };
    match family {
        Family::MaxwellBoltzmann => eval.maximize(&[vec![(0.01f64).ln()], vec![(0.1f64).ln()]]),
        Family::Product | Family::BicmProduct => {
            let starts = [
                vec![logit(0.3); m - 1],
                vec![logit(0.45); m - 1],
                (0..m - 1).map(|j| logit(0.2 + 0.25 * j as f64 / (m - 1) as f64)).collect(),
            ];
            eval.maximize(&starts)
        }
        Family::Full => {
            let (product_rate, product) = best_rate_with(m, Family::Product, fec, snr)?;
            let probs = product.amplitude_probs();
            let last = probs.last().copied().unwrap_or(1.0).max(1e-300);
            let x0: Vec<f64> = probs[..probs.len() - 1]
                .iter()
                .map(|&p| (p.max(1e-300) / last).ln())
                .collect();
            let (rate, dist) = eval.maximize(&[x0])?;
            if rate >= product_rate {
                Ok((rate, dist))
            } else {
                Ok((product_rate, product))
            }
        }
    }
}

/// Smallest SNR in dB at which `family` reaches `target` bits per channel use.
pub fn family_required_snr_db(m: usize, family: Family, target: f64) -> Result<f64> {
    required_snr_db(|snr| Ok(best_rate(m, family, snr)?.0), target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let (x, v) = nelder_mead(
            |x| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)),
            &[-1.2, 1.0],
            0.5,
            1e-14,
            20_000,
        )
        .unwrap();
        assert!(v < 1e-8, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-3 && (x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn families_are_nested() {
        let snr = 10f64.powf(1.0);
        let full = best_rate(2, Family::Full, snr).unwrap().0;
        let product = best_rate(2, Family::Product, snr).unwrap().0;
        // a single amplitude bit makes every family the same
        assert!((full - product).abs() < 1e-6);
        let uniform = bmd_rate(&InputDistribution::uniform(2).unwrap(), &Labeling::brgc(2).unwrap(), snr).unwrap();
        assert!(product >= uniform - 1e-9);
    }
}
