use crate::constellation::AskConstellation;
use crate::error::{Error, Result};
use crate::infotheory::{entropy, InputDistribution};

/// `P_A(a) ∝ exp(−ν a²)` on the amplitudes of `2^m`-ASK.
pub fn mb_distribution(m: usize, nu: f64) -> Result<InputDistribution> {
    let c = AskConstellation::new(m)?;
    let amps = c.amplitudes();
    // shift by the smallest exponent to avoid underflow
    let weights: Vec<f64> = amps
        .iter()
        .map(|&a| (-nu * ((a as f64).powi(2) - 1.0)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    InputDistribution::from_amplitudes(m, weights.iter().map(|w| w / total).collect())
}

/// `ν ≥ 0` such that the MB amplitude entropy equals `rate` bits, by
/// bisection. Returns `f64::INFINITY` for `rate = 0`.
pub fn mb_parameter_for_entropy(m: usize, rate: f64) -> Result<f64> {
    let max = (m - 1) as f64;
    if !(0.0..=max + 1e-12).contains(&rate) {
        return Err(Error::domain(format!(
            "amplitude entropy {rate} outside [0, {max}] for {}-ASK",
            1 << m
        )));
    }
    if rate >= max - 1e-12 {
        return Ok(0.0);
    }
    if rate == 0.0 {
        return Ok(f64::INFINITY);
    }
    let h = |nu: f64| -> Result<f64> { Ok(entropy(mb_distribution(m, nu)?.amplitude_probs())) };
    let mut lo = 0.0;
    let mut hi = 1e-3;
    while h(hi)? > rate {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::numeric("entropy target too small"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = h(mid)?;
        if (v - rate).abs() < 1e-12 {
            return Ok(mid);
        }
        if v > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Power-minimizing amplitude distribution with entropy `rate`.
pub fn optimize_mb_amplitudes(m: usize, rate: f64) -> Result<InputDistribution> {
    let nu = mb_parameter_for_entropy(m, rate)?;
    if nu.is_infinite() {
        let mut p = vec![0.0; 1 << (m - 1)];
        p[0] = 1.0;
        return InputDistribution::from_amplitudes(m, p);
    }
    mb_distribution(m, nu)
}
