//! Required SNR of 64-ASK PAS at 4.5 bits per channel use (code rate 9/10)
//! for an amplitude DM and for PDM with 1 to 5 shaped bit levels.

use pdmkit::infotheory::{linear_to_db, required_snr_db, gaussian_capacity};
use pdmkit::planner::{required_snr_table, DmConfiguration};

fn main() -> pdmkit::Result<()> {
    let mut configurations = vec![DmConfiguration::Amplitude];
    configurations.extend((1..=5).map(|shaped| DmConfiguration::Pdm { shaped }));
    for row in required_snr_table(6, 4.5, 0.9, &configurations)? {
        println!("{:<20} {:6.2} dB", row.configuration.to_string(), row.required_snr_db);
    }
    let capacity = required_snr_db(|snr| Ok(gaussian_capacity(snr)), 4.5)?;
    println!("{:<20} {:6.2} dB (exact {:.2})", "capacity", capacity, linear_to_db(511.0));
    Ok(())
}
