//! Binary labels of 8-ASK: BRGC for the code, NBBC for the level matchers,
//! and the level distribution of a product design.

use pdmkit::constellation::{AskConstellation, Labeling};
use pdmkit::infotheory::InputDistribution;

fn main() -> pdmkit::Result<()> {
    let ask = AskConstellation::new(3)?;
    let brgc = Labeling::brgc(3)?;
    let nbbc = Labeling::nbbc(3)?;
    println!("{:>3}  {:>5}  {:>5}", "x", "BRGC", "NBBC");
    for x in ask.points() {
        let show = |l: &Labeling| -> pdmkit::Result<String> {
            Ok(l.label_symbol(x)?.iter().map(|b| char::from(b'0' + b)).collect())
        };
        println!("{x:>3}  {:>5}  {:>5}", show(&brgc)?, show(&nbbc)?);
    }

    // P(B2 = 0) = 0.2 and P(B3 = 0) = 0.4 on the NBBC amplitude bits
    let dist = InputDistribution::from_levels(nbbc, &[0.2, 0.4])?;
    for (a, p) in ask.amplitudes().iter().zip(dist.amplitude_probs()) {
        println!("P(A = {a}) = {p:.3}");
    }
    println!("H(X) = {:.4} bits, E[X^2] = {:.3}", dist.entropy(), dist.second_moment());
    println!("BRGC bit marginals P(B_j = 0): {:.3?}", dist.bit_marginals(&brgc));
    Ok(())
}
