use proptest::prelude::*;

use pdmkit::cli::{dematch_payload, match_payload};
use pdmkit::Error;
use pdmkit::constellation::Labeling;
use pdmkit::infotheory::{bmd_rate, InputDistribution};
use pdmkit::matcher::{quantize_distribution, CcdmConfig, Composition};
use pdmkit::planner::{optimize_with_rate_loss, plan_parallel_pdm, waterfill, ChannelProfile, RateAccounting};

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn bits_of(seed: Vec<bool>, len: usize) -> Vec<u8> {
    (0..len).map(|i| u8::from(seed[i % seed.len()] ^ (i % 3 == 0))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quantized_composition_sums_to_length(w in prop::collection::vec(0.01f64..1.0, 2..16), n in 16usize..400) {
        let comp = quantize_distribution(&normalized(w.clone()), n).unwrap();
        prop_assert_eq!(comp.counts().len(), w.len());
        prop_assert_eq!(comp.counts().iter().sum::<usize>(), n);
    }

    #[test]
    fn ccdm_output_has_configured_composition(
        w in prop::collection::vec(0.05f64..1.0, 2..9),
        n in 8usize..120,
        seed in prop::collection::vec(any::<bool>(), 1..64),
    ) {
        let ccdm = CcdmConfig::for_distribution(&normalized(w), n).unwrap();
        let data = bits_of(seed, ccdm.input_len());
        let symbols = ccdm.match_bits(&data).unwrap();
        let q = ccdm.alphabet_size();
        let seen = Composition::of_sequence(&symbols, q).unwrap();
        prop_assert_eq!(seen.counts(), ccdm.composition().counts());
        prop_assert_eq!(ccdm.dematch(&symbols).unwrap(), data);
    }

    #[test]
    fn ccdm_rejects_foreign_compositions(n in 8usize..80, flip in 0usize..80) {
        let ccdm = CcdmConfig::from_counts(vec![n / 2, n - n / 2]).unwrap();
        let mut symbols = ccdm.match_bits(&vec![0; ccdm.input_len()]).unwrap();
        let i = flip % n;
        symbols[i] ^= 1;
        prop_assert!(ccdm.dematch(&symbols).is_err());
    }

    #[test]
    fn pdm_round_trip(rate in 1.1f64..1.9, n in 32usize..256, seed in prop::collection::vec(any::<bool>(), 1..64)) {
        // some targets sit between composition steps wider than 1/n
        let pdm = match optimize_with_rate_loss(3, &[2, 3], rate, n) {
            Ok(pdm) => pdm,
            Err(Error::Planning { last_iterate, .. }) => {
                prop_assert!(last_iterate.is_some_and(|q| q.len() == 2));
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let data = bits_of(seed, pdm.input_len());
        let amps = pdm.match_bits(&data).unwrap();
        prop_assert_eq!(amps.len(), n);
        prop_assert!(amps.iter().all(|&a| a % 2 == 1 && a < 8));
        prop_assert_eq!(pdm.dematch(&amps).unwrap(), data);
    }

    #[test]
    fn waterfilling_spends_the_budget(gains in prop::collection::vec(0.2f64..3.0, 1..6), power in 0.5f64..1000.0) {
        let plan = waterfill(&ChannelProfile::new(gains, power, 1).unwrap());
        let spent = plan.channels.iter().map(|c| c.power).sum::<f64>() / plan.channels.len() as f64;
        prop_assert!((spent - power).abs() < 1e-9 * power.max(1.0));
        prop_assert!(plan.channels.iter().all(|c| c.power >= 0.0 && c.active == (c.power > 0.0)));
    }

    #[test]
    fn bmd_rate_between_zero_and_entropy(m in 2usize..5, snr_db in -5.0f64..30.0, w in prop::collection::vec(0.05f64..1.0, 8)) {
        let amps = normalized(w[..1 << (m - 1)].to_vec());
        let dist = InputDistribution::from_amplitudes(m, amps).unwrap();
        let r = bmd_rate(&dist, &Labeling::brgc(m).unwrap(), 10f64.powf(snr_db / 10.0)).unwrap();
        prop_assert!(r >= -1e-9 && r <= dist.entropy() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn payload_files_round_trip(payload in prop::collection::vec(any::<u8>(), 0..600)) {
        let profile = ChannelProfile::new(vec![1.5, 0.8], 50.0, 40).unwrap();
        let plan = plan_parallel_pdm(&profile, &[4, 3], 2.0, 0.75, RateAccounting::RateLoss).unwrap().plan;
        let symbols = match_payload(&plan, &payload).unwrap();
        prop_assert_eq!(symbols.len() % (2 * 40), 0);
        prop_assert_eq!(dematch_payload(&plan, &symbols).unwrap(), payload);
    }
}
