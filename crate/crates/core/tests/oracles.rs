//! Checks against independent reference computations.

use pdmkit::constellation::Labeling;
use pdmkit::infotheory::{bmd_rate, InputDistribution};
use pdmkit::matcher::CcdmConfig;

fn bits(value: usize, len: usize) -> Vec<u8> {
    (0..len).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

#[test]
fn small_ccdm_is_an_order_preserving_injection() {
    let ccdm = CcdmConfig::from_counts(vec![3, 5]).unwrap();
    // C(8, 3) = 56 sequences carry 5 bits
    assert_eq!(ccdm.input_len(), 5);
    let mut all: Vec<Vec<u8>> = (0u32..256)
        .map(|v| (0..8).rev().map(|i| ((v >> i) & 1) as u8).collect::<Vec<u8>>())
        .filter(|s| s.iter().filter(|&&b| b == 0).count() == 3)
        .collect();
    all.sort();
    assert_eq!(all.len(), 56);
    let images: Vec<Vec<u8>> = (0..32).map(|v| ccdm.match_bits(&bits(v, 5)).unwrap()).collect();
    for (v, image) in images.iter().enumerate() {
        assert!(all.binary_search(image).is_ok(), "{image:?}");
        assert_eq!(ccdm.dematch(image).unwrap(), bits(v, 5));
    }
    assert!(images.windows(2).all(|w| w[0] < w[1]));
}

/// `H(X) − Σ_j H(B_j | Y)` with `I(B_j; Y)` from trapezoidal integration of the densities.
fn bmd_by_integration(dist: &InputDistribution, labeling: &Labeling, snr: f64) -> f64 {
    let m = labeling.bits();
    let order = 1usize << m;
    let probs = dist.point_probs();
    let points: Vec<f64> = (0..order).map(|i| (2 * i) as f64 - (order - 1) as f64).collect();
    let power: f64 = probs.iter().zip(&points).map(|(p, x)| p * x * x).sum();
    let delta = (snr / power).sqrt();
    let reach = delta * (order as f64) + 12.0;
    let steps = 200_000;
    let h = 2.0 * reach / steps as f64;
    let gauss = |d: f64| (-0.5 * d * d).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut rate = dist.entropy();
    for j in 0..m {
        let shift = m - 1 - j;
        let p0: f64 = (0..order).filter(|&i| (labeling.label_index(i) >> shift) & 1 == 0).map(|i| probs[i]).sum();
        rate -= pdmkit::infotheory::binary_entropy(p0);
        let mut mi = 0.0;
        for s in 0..=steps {
            let y = -reach + h * s as f64;
            let mut joint = [0.0f64; 2];
            for i in 0..order {
                let b = (labeling.label_index(i) >> shift) & 1;
                joint[b] += probs[i] * gauss(y - delta * points[i]);
            }
            let py = joint[0] + joint[1];
            let mut term = 0.0;
            for b in 0..2 {
                let pb: f64 = (0..order)
                    .filter(|&i| (labeling.label_index(i) >> shift) & 1 == b)
                    .map(|i| probs[i])
                    .sum();
                if joint[b] > 0.0 && pb > 0.0 {
                    term += joint[b] * (joint[b] / (py * pb)).log2();
                }
            }
            let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
            mi += w * h * term;
        }
        rate += mi;
    }
    rate.max(0.0)
}

#[test]
fn bmd_rate_matches_direct_integration() {
    let shaped = InputDistribution::from_amplitudes(3, vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    for (dist, m) in [(InputDistribution::uniform(2).unwrap(), 2), (shaped, 3)] {
        let labeling = Labeling::brgc(m).unwrap();
        for snr_db in [0.0, 8.0, 16.0] {
            let snr = 10f64.powf(snr_db / 10.0);
            let oracle = bmd_by_integration(&dist, &labeling, snr);
            let quad = bmd_rate(&dist, &labeling, snr).unwrap();
            assert!((oracle - quad).abs() < 1e-6, "m = {m}, {snr_db} dB: {oracle} vs {quad}");
        }
    }
}
