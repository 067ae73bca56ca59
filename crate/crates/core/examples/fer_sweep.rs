//! Frame error rates of shaped 8-ASK PAS against uniform 4-ASK at the same
//! transmission rate of 5/3 bits per channel use, both on the shipped
//! 1512-bit rate-5/6 code.

use pdmkit::pas::{AmplitudeMatcher, PasConfig, SystematicCode};
use pdmkit::pdm::PdmConfig;
use pdmkit::planner::optimize_with_rate_loss;
use pdmkit::sim::{fer_csv, run_fer, PasSystem, SimRun};

fn main() -> pdmkit::Result<()> {
    let code = SystematicCode::shipped();
    let shaped = optimize_with_rate_loss(3, &[2, 3], 7.0 / 6.0, 504)?;
    let shaped = PasConfig::new(AmplitudeMatcher::Pdm(shaped), &code)?;
    let uniform = PasConfig::new(AmplitudeMatcher::Pdm(PdmConfig::uniform(2, 756)?), &code)?;
    let grid: Vec<f64> = (0..=16).map(|i| 9.0 + 0.25 * i as f64).collect();
    let mut run = SimRun::new(1, grid);
    run.stop.max_frames = 2_000;
    for (name, cfg) in [("shaped 8-ASK", shaped), ("uniform 4-ASK", uniform)] {
        println!("# {name}: R_t = {:.4}, gamma = {:.4}", cfg.transmission_rate(), cfg.gamma());
        let table = run_fer(&PasSystem::single(cfg, code.clone())?, &run)?;
        print!("{}", fer_csv(&table));
    }
    Ok(())
}
