//! Three parallel channels: waterfilling, constellation sizes, and the
//! extended PDM plan at 3.09 bits per channel use with a rate-5/6 code.

use pdmkit::infotheory::db_to_linear;
use pdmkit::planner::{
    choose_constellations, compare_parallel_schemes, plan_parallel_pdm, waterfill, ChannelProfile, RateAccounting,
};

fn main() -> pdmkit::Result<()> {
    let profile = ChannelProfile::new(vec![2.0, 1.3, 0.6], db_to_linear(17.23), 432)?;
    let wf = waterfill(&profile);
    println!("lambda = {:.4}", wf.lambda);
    for (c, m) in wf.channels.iter().zip(choose_constellations(&wf)) {
        println!("h = {:.1}  P = {:7.3}  C = {:.3}  m = {:?}", c.gain, c.power, c.capacity, m);
    }
    println!("mean capacity {:.3}", wf.mean_capacity());

    let bits = [5, 4, 3];
    let plan = plan_parallel_pdm(&profile, &bits, 3.09, 5.0 / 6.0, RateAccounting::RateLoss)?;
    println!("gamma = {:.4}, R_dm = {:.4}", plan.gamma, plan.r_dm);
    println!("{:>3} {:>6} {:>6} {:>8} {:>8}", "j", "n_j", "k_j", "p0", "H");
    let p0s = plan.plan.level_p0s();
    for (idx, ((n_j, k_j), h)) in plan
        .plan
        .output_lengths()
        .iter()
        .zip(plan.plan.level_input_lengths())
        .zip(&plan.entropies)
        .enumerate()
    {
        println!("{:>3} {:>6} {:>6} {:>8.4} {:>8.4}", idx + 2, n_j, k_j, p0s[idx], h);
    }
    println!("rate loss {:.4}", plan.rate_loss());

    let cmp = compare_parallel_schemes(&profile, &bits, 3.09, 5.0 / 6.0)?;
    println!("required power: extended PDM {:.3} dB, individual DMs {:.3} dB, uniform {:.3} dB, waterfilling {:.3} dB",
        cmp.extended_pdm_db, cmp.individual_db, cmp.uniform_db, cmp.waterfilling_db);
    println!("rate loss: extended PDM {:.4}, individual DMs {:.4}", cmp.extended_pdm_rate_loss, cmp.individual_rate_loss);
    Ok(())
}
