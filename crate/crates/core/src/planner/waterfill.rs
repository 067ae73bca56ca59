use serde::Serialize;

use crate::error::{Error, Result};

/// Parallel Gaussian channels `Y_ℓ = h_ℓ X_ℓ + Z_ℓ` with unit noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    gains: Vec<f64>,
    power: f64,
    n: usize,
}

impl ChannelProfile {
    /// `power` is the linear average power budget `(1/L) Σ E[X_ℓ²] ≤ P`.
    pub fn new(gains: Vec<f64>, power: f64, n: usize) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::domain("need at least one channel"));
        }
        if gains.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::domain("channel gains must be positive"));
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::domain("power budget must be positive"));
        }
        Ok(Self { gains, power, n })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Uses per channel.
    pub fn uses_per_channel(&self) -> usize {
        self.n
    }

    pub fn num_channels(&self) -> usize {
        self.gains.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelAllocation {
    pub gain: f64,
    pub power: f64,
    /// Spectral efficiency `0.5 log2(h² / λ)`, zero when inactive.
    pub capacity: f64,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaterfillingPlan {
    pub lambda: f64,
    pub channels: Vec<ChannelAllocation>,
}

impl WaterfillingPlan {
    /// Average spectral efficiency over all channels.
    pub fn mean_capacity(&self) -> f64 {
        self.channels.iter().map(|c| c.capacity).sum::<f64>() / self.channels.len() as f64
    }
}

/// Waterfilling `P_ℓ = [1/λ − 1/h_ℓ²]^+` with `(1/L) Σ P_ℓ = P`; the water
/// level `1/λ` is found by bisection.
pub fn waterfill(profile: &ChannelProfile) -> WaterfillingPlan {
    let inv: Vec<f64> = profile.gains.iter().map(|h| 1.0 / (h * h)).collect();
    let used = |level: f64| inv.iter().map(|&i| (level - i).max(0.0)).sum::<f64>() / inv.len() as f64;
    let mut lo = 0.0;
    let mut hi = profile.power + inv.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(mid) < profile.power {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let level = 0.5 * (lo + hi);
    let lambda = 1.0 / level;
    let channels = profile
        .gains
        .iter()
        .zip(&inv)
        .map(|(&gain, &i)| {
            let power = (level - i).max(0.0);
            let active = power > 0.0;
            ChannelAllocation {
                gain,
                power,
                capacity: if active { 0.5 * (gain * gain / lambda).log2() } else { 0.0 },
                active,
            }
        })
        .collect();
    WaterfillingPlan { lambda, channels }
}

/// `m_ℓ = round(C_ℓ + 1)` (halves round up), at least 2; `None` for inactive
/// channels.
pub fn choose_constellations(plan: &WaterfillingPlan) -> Vec<Option<usize>> {
    plan.channels
        .iter()
        .map(|c| c.active.then(|| bits_for_capacity(c.capacity)))
        .collect()
}

pub(crate) fn bits_for_capacity(capacity: f64) -> usize {
    ((capacity + 1.5).floor() as usize).max(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::db_to_linear;

    #[test]
    fn symmetric_channels() {
        let p = 7.0;
        let plan = waterfill(&ChannelProfile::new(vec![1.0, 1.0], p, 10).unwrap());
        assert!((plan.lambda - 1.0 / (p + 1.0)).abs() < 1e-12);
        for c in &plan.channels {
            assert!((c.power - p).abs() < 1e-9);
            assert!((c.capacity - 0.5 * (1.0 + p).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn three_channel_example() {
        let profile = ChannelProfile::new(vec![2.0, 1.3, 0.6], db_to_linear(17.23), 432).unwrap();
        let plan = waterfill(&profile);
        let expected = [3.87, 3.25, 2.14];
        for (c, e) in plan.channels.iter().zip(expected) {
            assert!((c.capacity - e).abs() < 0.01, "{} vs {e}", c.capacity);
        }
        let mean_power: f64 = plan.channels.iter().map(|c| c.power).sum::<f64>() / 3.0;
        assert!((mean_power - profile.power()).abs() < 1e-9);
        let m: Vec<_> = choose_constellations(&plan).into_iter().map(Option::unwrap).collect();
        assert_eq!(m, vec![5, 4, 3]);
    }

    #[test]
    fn weak_channel_goes_inactive() {
        let plan = waterfill(&ChannelProfile::new(vec![2.0, 1.3, 1e-3], 1.0, 1).unwrap());
        assert!(!plan.channels[2].active);
        assert_eq!(plan.channels[2].power, 0.0);
        let two = waterfill(&ChannelProfile::new(vec![2.0, 1.3], 1.5, 1).unwrap());
        for l in 0..2 {
            assert!((plan.channels[l].capacity - two.channels[l].capacity).abs() < 1e-9);
        }
        assert_eq!(choose_constellations(&plan)[2], None);
    }

    #[test]
    fn kkt_and_monotonicity() {
        let gains = vec![1.7, 0.9, 0.4, 0.2];
        let mut prev: Option<WaterfillingPlan> = None;
        for db in [0.0, 5.0, 10.0, 20.0] {
            let plan = waterfill(&ChannelProfile::new(gains.clone(), db_to_linear(db), 1).unwrap());
            for c in plan.channels.iter().filter(|c| c.active) {
                assert!((1.0 / plan.lambda - c.power - 1.0 / (c.gain * c.gain)).abs() < 1e-9);
            }
            if let Some(p) = &prev {
                for (a, b) in plan.channels.iter().zip(&p.channels) {
                    assert!(a.capacity >= b.capacity - 1e-12);
                }
            }
            prev = Some(plan);
        }
    }

    #[test]
    fn constellation_rounding() {
        assert_eq!(bits_for_capacity(1.0), 2);
        assert_eq!(bits_for_capacity(2.5), 4);
        assert_eq!(bits_for_capacity(0.2), 2);
        assert_eq!(bits_for_capacity(3.87), 5);
    }
}
