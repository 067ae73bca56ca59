//! Monte Carlo frame error rates of PAS links over Gaussian channels.
//!
//! Every frame draws its data and noise from its own ChaCha stream, selected
//! by the frame index, so results do not depend on how frames are spread
//! over threads. Frames run in fixed batches and the stop rule is checked
//! only between batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{db_to_linear, InputDistribution};
use crate::pas::{pas_decode_parallel, pas_encode_parallel, PasConfig, SystematicCode, BP_ITERATIONS};
use crate::planner::scale_for_detection;

/// Adds Gaussian noise of the given variance to every sample.
pub fn awgn<R: Rng + ?Sized>(x: &[f64], variance: f64, rng: &mut R) -> Vec<f64> {
    if variance == 0.0 {
        return x.to_vec();
    }
    let sigma = variance.sqrt();
    x.iter()
        .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// `y_ℓ = h_ℓ x_ℓ + z_ℓ` with unit-variance noise.
pub fn awgn_parallel<R: Rng + ?Sized>(xs: &[Vec<f64>], gains: &[f64], variance: f64, rng: &mut R) -> Vec<Vec<f64>> {
    xs.iter()
        .zip(gains)
        .map(|(x, &h)| {
            let scaled: Vec<f64> = x.iter().map(|v| h * v).collect();
            awgn(&scaled, variance, rng)
        })
        .collect()
}

/// `Δ` such that `E[(Δ X)²] = snr` for linear `snr`.
pub fn calibrate_delta(dist: &InputDistribution, snr: f64) -> Result<f64> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain(format!("snr must be positive, got {snr}")));
    }
    Ok(dist.scale_for_snr(snr))
}

/// Stop after `min_errors` frame errors or `max_frames` frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    pub min_errors: usize,
    pub max_frames: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_frames: 50_000,
        }
    }
}

/// Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimRun {
    pub seed: u64,
    /// SNR in dB for one channel, mean transmit power in dB for several.
    pub grid_db: Vec<f64>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_iterations")]
    pub bp_iterations: usize,
}

fn default_batch() -> usize {
    64
}

fn default_iterations() -> usize {
    BP_ITERATIONS
}

impl SimRun {
    pub fn new(seed: u64, grid_db: Vec<f64>) -> Self {
        Self {
            seed,
            grid_db,
            stop: StopRule::default(),
            batch: default_batch(),
            bp_iterations: default_iterations(),
        }
    }
}

/// A PAS link with its code and, for parallel channels, the gains `h_ℓ`.
#[derive(Debug, Clone)]
pub struct PasSystem {
    pub config: PasConfig,
    pub code: SystematicCode,
    pub gains: Vec<f64>,
}

impl PasSystem {
    pub fn single(config: PasConfig, code: SystematicCode) -> Result<Self> {
        Self::parallel(config, code, vec![1.0])
    }

    pub fn parallel(config: PasConfig, code: SystematicCode, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != config.num_channels() {
            return Err(Error::config(format!(
                "{} gains for {} channels",
                gains.len(),
                config.num_channels()
            )));
        }
        if gains.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::config("channel gains must be positive"));
        }
        Ok(Self { config, code, gains })
    }

    /// Transmit scalings `Δ_ℓ` and the common received scaling `Δ` at grid
    /// value `db`: the SNR of a single channel, or the mean power budget
    /// shared by parallel channels under the `Δ / h_ℓ` rule.
    pub fn scalings(&self, db: f64) -> Result<(Vec<f64>, f64)> {
        let dists = self.config.distributions();
        if self.gains.len() == 1 {
            let delta = calibrate_delta(&dists[0], db_to_linear(db))? / self.gains[0];
            return Ok((vec![delta], delta * self.gains[0]));
        }
        let s = scale_for_detection(&self.gains, dists, db_to_linear(db))?;
        Ok((s.per_channel, s.delta))
    }

    /// Simulates frame `index` at the given scalings; `true` on a frame error.
    fn frame_error(&self, rng: &mut ChaCha8Rng, tx: &[f64], rx: f64, iterations: usize) -> Result<bool> {
        let data: Vec<u8> = (0..self.config.data_len()).map(|_| rng.gen_range(0..2u8)).collect();
        let symbols = pas_encode_parallel(&self.config, &self.code, &data)?;
        let xs: Vec<Vec<f64>> = symbols
            .iter()
            .zip(tx)
            .map(|(s, &d)| s.iter().map(|&v| d * v as f64).collect())
            .collect();
        let ys = awgn_parallel(&xs, &self.gains, 1.0, rng);
        let scales = vec![rx; ys.len()];
        Ok(match pas_decode_parallel(&self.config, &self.code, &ys, &scales, iterations) {
            Ok(out) => out.data != data,
            Err(Error::Decode { .. }) => true,
            Err(e) => return Err(e),
        })
    }
}

/// One grid point of a frame error rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerPoint {
    pub snr_db: f64,
    pub frames: usize,
    pub frame_errors: usize,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Column names of [`FerPoint`] in CSV order.
pub const FER_COLUMNS: [&str; 6] = ["snr_db", "frames", "frame_errors", "fer", "ci_low", "ci_high"];

impl FerPoint {
    pub fn new(snr_db: f64, frames: usize, frame_errors: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(frame_errors, frames);
        Self {
            snr_db,
            frames,
            frame_errors,
            fer: if frames == 0 { 0.0 } else { frame_errors as f64 / frames as f64 },
            ci_low,
            ci_high,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.snr_db, self.frames, self.frame_errors, self.fer, self.ci_low, self.ci_high
        )
    }
}

/// 95% Wilson score interval of a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Random stream of frame `frame` at grid point `point`.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(point as u64)));
    rng.set_stream(frame);
    rng
}

/// Frame error rate at every grid point of `run`.
pub fn run_fer(system: &PasSystem, run: &SimRun) -> Result<Vec<FerPoint>> {
    if run.batch == 0 || run.stop.max_frames == 0 {
        return Err(Error::config("batch size and frame limit must be positive"));
    }
    run.grid_db
        .iter()
        .enumerate()
        .map(|(point, &db)| {
            let (tx, rx) = system.scalings(db)?;
            let mut frames = 0;
            let mut errors = 0;
            while frames < run.stop.max_frames && errors < run.stop.min_errors {
                let batch = run.batch.min(run.stop.max_frames - frames);
                let outcomes = (frames..frames + batch)
                    .into_par_iter()
                    .map(|f| {
                        let mut rng = frame_rng(run.seed, point, f as u64);
                        system.frame_error(&mut rng, &tx, rx, run.bp_iterations)
                    })
                    .collect::<Result<Vec<_>>>()?;
                errors += outcomes.iter().filter(|&&e| e).count();
                frames += batch;
            }
            Ok(FerPoint::new(db, frames, errors))
        })
        .collect()
}

/// CSV table with the columns of [`FER_COLUMNS`].
pub fn fer_csv(points: &[FerPoint]) -> String {
    let mut out = FER_COLUMNS.join(",");
    out.push('\n');
    for p in points {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::CcdmConfig;
    use crate::pas::{peg_ira, AmplitudeMatcher};

    #[test]
    fn zero_noise_and_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![1.0, -3.0, 5.0];
        assert_eq!(awgn(&x, 0.0, &mut rng), x);
        let zeros = vec![0.0; 1_000_000];
        let y = awgn(&zeros, 1.0, &mut rng);
        let var = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        assert!((var - 1.0).abs() < 0.01);
        assert_eq!(awgn_parallel(&[vec![1.0], vec![2.0]], &[2.0, 0.5], 0.0, &mut rng), vec![vec![2.0], vec![1.0]]);
    }

    #[test]
    fn delta_calibration() {
        let two_ask = InputDistribution::uniform(1).unwrap();
        assert!((calibrate_delta(&two_ask, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let ones = InputDistribution::from_amplitudes(3, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((calibrate_delta(&ones, 4.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(calibrate_delta(&ones, 0.0).is_err());
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.037).abs() < 1e-3);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    fn small_system() -> PasSystem {
        let code = SystematicCode::new(peg_ira(3 * 64, 160, 3, 11).unwrap()).unwrap();
        let ccdm = CcdmConfig::for_distribution(&[0.4, 0.3, 0.2, 0.1], 64).unwrap();
        let cfg = PasConfig::new(AmplitudeMatcher::Ccdm(ccdm), &code).unwrap();
        PasSystem::single(cfg, code).unwrap()
    }

    #[test]
    fn fer_extremes_and_determinism() {
        let system = small_system();
        let mut run = SimRun::new(7, vec![-5.0, 30.0]);
        run.stop.max_frames = 100;
        run.batch = 16;
        let table = run_fer(&system, &run).unwrap();
        assert_eq!(table[0].fer, 1.0);
        assert_eq!(table[1].frame_errors, 0);
        assert_eq!(table[1].frames, 100);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let again = single.install(|| run_fer(&system, &run)).unwrap();
        assert_eq!(table, again);
    }

    #[test]
    fn csv_layout() {
        assert_eq!(fer_csv(&[]), "snr_db,frames,frame_errors,fer,ci_low,ci_high\n");
        let csv = fer_csv(&[FerPoint::new(3.0, 10, 1)]);
        assert!(csv.lines().nth(1).unwrap().starts_with("3,10,1,0.1,"));
    }

    #[test]
    fn parallel_scaling_meets_power() {
        let code = SystematicCode::new(peg_ira(4 * 32 + 3 * 32, 180, 3, 3).unwrap()).unwrap();
        let plan = crate::pdm::ExtendedPdmPlan::new(
            vec![4, 3],
            32,
            vec![crate::pdm::LevelMatcher::Uniform; 3],
        )
        .unwrap();
        let cfg = PasConfig::new(AmplitudeMatcher::Extended(plan), &code).unwrap();
        let system = PasSystem::parallel(cfg, code, vec![2.0, 1.0]).unwrap();
        let (tx, rx) = system.scalings(10.0).unwrap();
        assert!((tx[0] * 2.0 - rx).abs() < 1e-12 && (tx[1] - rx).abs() < 1e-12);
        let power = (tx[0].powi(2) * 85.0 + tx[1].powi(2) * 21.0) / 2.0;
        assert!((power - 10.0).abs() < 1e-9);
    }
}
