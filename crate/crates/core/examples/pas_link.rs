//! One shaped 8-ASK PAS frame through an AWGN channel with the shipped
//! rate-5/6 code, followed by a short frame error count.

use pdmkit::infotheory::db_to_linear;
use pdmkit::pas::{pas_decode, pas_encode, AmplitudeMatcher, PasConfig, SystematicCode, BP_ITERATIONS};
use pdmkit::planner::{leading_levels, optimize_with_rate_loss};
use pdmkit::sim::{awgn, calibrate_delta, run_fer, PasSystem, SimRun, StopRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pdmkit::Result<()> {
    let code = SystematicCode::shipped();
    let pdm = optimize_with_rate_loss(3, &leading_levels(2), 7.0 / 6.0, 504)?;
    println!("level P(B_j = 0): {:.4?}, input bits {:?}", pdm.level_p0s(), pdm.level_input_lengths());
    let cfg = PasConfig::new(AmplitudeMatcher::Pdm(pdm), &code)?;
    println!(
        "{} data bits per frame: {} matched + {} extra, R_t = {:.4}, gamma = {:.3}",
        cfg.data_len(),
        cfg.matcher_bits(),
        cfg.extra_bits(),
        cfg.transmission_rate(),
        cfg.gamma()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data: Vec<u8> = (0..cfg.data_len()).map(|_| rng.gen_range(0..2)).collect();
    let x = pas_encode(&cfg, &code, &data)?;
    let delta = calibrate_delta(&cfg.distributions()[0], db_to_linear(12.0))?;
    let scaled: Vec<f64> = x.iter().map(|&v| delta * v as f64).collect();
    let y = awgn(&scaled, 1.0, &mut rng);
    let out = pas_decode(&cfg, &code, &y, delta, BP_ITERATIONS)?;
    let errors = out.data.iter().zip(&data).filter(|(a, b)| a != b).count();
    println!("12 dB: converged {} after {} iterations, {errors} bit errors", out.converged, out.iterations);

    let system = PasSystem::single(cfg, code)?;
    let mut run = SimRun::new(1, vec![10.5, 11.0, 11.5, 12.0]);
    run.stop = StopRule { min_errors: 50, max_frames: 1000 };
    for p in run_fer(&system, &run)? {
        println!("{}", p.csv_row());
    }
    Ok(())
}
