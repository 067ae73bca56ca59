//! Rates of uniform 16-ASK, Maxwell-Boltzmann shaping with a bit-metric
//! decoder and the best BRGC bit product with BICM, against the Gaussian
//! capacity; then the SNR cost of a small rate loss.

use pdmkit::constellation::Labeling;
use pdmkit::infotheory::{
    bmd_rate, db_to_linear, gaussian_capacity, snr_loss_db, snr_loss_rule_of_thumb, InputDistribution,
};
use pdmkit::planner::optimize_mb_amplitudes;
use pdmkit::planner::search::{best_rate, Family};

fn main() -> pdmkit::Result<()> {
    let brgc = Labeling::brgc(4)?;
    let uniform = InputDistribution::uniform(4)?;
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "dB", "capacity", "uniform", "MB", "BICM");
    for db in (0..=30).step_by(5).map(f64::from) {
        let snr = db_to_linear(db);
        let (shaped, _) = best_rate(4, Family::MaxwellBoltzmann, snr)?;
        let (bicm, _) = best_rate(4, Family::BicmProduct, snr)?;
        println!(
            "{db:>6.1} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            gaussian_capacity(snr),
            bmd_rate(&uniform, &brgc, snr)?,
            shaped,
            bicm
        );
    }

    let mb = optimize_mb_amplitudes(4, 2.5)?;
    for r_loss in [0.01, 0.05, 0.1] {
        println!(
            "rate loss {r_loss:.2}: {:.3} dB at 3.0 bits ({:.3} dB on the Gaussian channel)",
            snr_loss_db(&mb, &brgc, 3.0, r_loss)?,
            snr_loss_rule_of_thumb(3.0, r_loss)
        );
    }
    Ok(())
}
