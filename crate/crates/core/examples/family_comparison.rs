//! Cost of the product constraint on 8-ASK at 2 bits per channel use: the
//! SNR needed by the best full distribution, the best NBBC level product and
//! the best BRGC bit product with a BICM receiver.

use pdmkit::infotheory::{linear_to_db, required_snr_db, gaussian_capacity};
use pdmkit::planner::search::{family_required_snr_db, Family};

fn main() -> pdmkit::Result<()> {
    for (name, family) in [
        ("full distribution", Family::Full),
        ("level product", Family::Product),
        ("BICM bit product", Family::BicmProduct),
    ] {
        println!("{name:<18} {:7.3} dB", family_required_snr_db(3, family, 2.0)?);
    }
    let capacity = required_snr_db(|snr| Ok(gaussian_capacity(snr)), 2.0)?;
    println!("{:<18} {:7.3} dB (exact {:.3})", "capacity", capacity, linear_to_db(15.0));
    Ok(())
}
