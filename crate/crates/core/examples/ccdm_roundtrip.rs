//! Constant composition matching of random bits onto a 4-ary target
//! distribution, and the rate loss of the matcher as the length grows.

use pdmkit::matcher::{CcdmConfig, Composition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pdmkit::Result<()> {
    let target = [0.4, 0.3, 0.2, 0.1];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [16, 64, 256, 1024, 4096] {
        let ccdm = CcdmConfig::for_distribution(&target, n)?;
        let data: Vec<u8> = (0..ccdm.input_len()).map(|_| rng.gen_range(0..2)).collect();
        let symbols = ccdm.match_bits(&data)?;
        assert_eq!(ccdm.dematch(&symbols)?, data);
        let seen = Composition::of_sequence(&symbols, 4)?;
        println!(
            "n = {n:>4}  k = {:>4}  composition {:?}  rate {:.4}  rate loss {:.4}",
            ccdm.input_len(),
            seen.counts(),
            ccdm.rate(),
            ccdm.rate_loss()
        );
    }
    let short = CcdmConfig::for_distribution(&target, 12)?;
    let shown: Vec<u8> = short.match_bits(&vec![1; short.input_len()])?;
    println!("all-ones input at n = 12 maps to {shown:?}");
    Ok(())
}
