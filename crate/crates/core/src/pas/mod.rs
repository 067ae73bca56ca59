//! Probabilistic amplitude shaping around a systematic binary code.
//!
//! A frame covers `L ≥ 1` channels with `n` symbols each. The codeword is laid
//! out as
//!
//! ```text
//! [ amplitude bits | extra data bits | parity bits ]
//! ```
//!
//! where the amplitude bits are the BRGC amplitude labels `B2 … Bm` of every
//! symbol, channel by channel and symbol by symbol, and the extra data and
//! parity together form the `L n` sign bits, again channel by channel. The
//! sign bit of symbol `i` on channel `ℓ` is therefore codeword position
//! `Σ_ℓ (m_ℓ − 1) n + ℓ n + i`.

pub mod code;
pub mod demap;
pub mod peg;

pub use code::{BpOutcome, ParityCheckMatrix, SystematicCode, LLR_MAX};
pub use demap::Demapper;
pub use peg::peg_ira;

use crate::constellation::Labeling;
use crate::error::{Error, Result};
use crate::infotheory::InputDistribution;
use crate::matcher::CcdmConfig;
use crate::pdm::{ExtendedPdmPlan, PdmConfig};

/// Default number of belief-propagation iterations.
pub const BP_ITERATIONS: usize = 50;

/// Source of shaped amplitudes for one PAS frame.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeMatcher {
    /// One `2^(m−1)`-ary CCDM; symbol `v` is amplitude `2v + 1`.
    Ccdm(CcdmConfig),
    Pdm(PdmConfig),
    Extended(ExtendedPdmPlan),
    /// One CCDM per channel.
    Individual(Vec<CcdmConfig>),
}

impl AmplitudeMatcher {
    pub fn channel_bits(&self) -> Vec<usize> {
        match self {
            AmplitudeMatcher::Ccdm(c) => vec![ccdm_bits(c)],
            AmplitudeMatcher::Pdm(p) => vec![p.bits()],
            AmplitudeMatcher::Extended(p) => p.channel_bits().to_vec(),
            AmplitudeMatcher::Individual(cs) => cs.iter().map(ccdm_bits).collect(),
        }
    }

    /// Symbols per channel.
    pub fn uses_per_channel(&self) -> usize {
        match self {
            AmplitudeMatcher::Ccdm(c) => c.output_len(),
            AmplitudeMatcher::Pdm(p) => p.output_len(),
            AmplitudeMatcher::Extended(p) => p.uses_per_channel(),
            AmplitudeMatcher::Individual(cs) => cs.first().map_or(0, CcdmConfig::output_len),
        }
    }

    /// Data bits consumed per frame.
    pub fn input_len(&self) -> usize {
        match self {
            AmplitudeMatcher::Ccdm(c) => c.input_len(),
            AmplitudeMatcher::Pdm(p) => p.input_len(),
            AmplitudeMatcher::Extended(p) => p.input_len(),
            AmplitudeMatcher::Individual(cs) => cs.iter().map(CcdmConfig::input_len).sum(),
        }
    }

    /// Amplitude distribution produced on each channel.
    pub fn distributions(&self) -> Result<Vec<InputDistribution>> {
        match self {
            AmplitudeMatcher::Ccdm(c) => Ok(vec![ccdm_distribution(c)?]),
            AmplitudeMatcher::Pdm(p) => Ok(vec![p.amplitude_distribution()?]),
            AmplitudeMatcher::Extended(p) => (0..p.num_channels()).map(|l| p.channel_distribution(l)).collect(),
            AmplitudeMatcher::Individual(cs) => cs.iter().map(ccdm_distribution).collect(),
        }
    }

    pub fn match_bits(&self, data: &[u8]) -> Result<Vec<Vec<u32>>> {
        let symbols_to_amps = |s: Vec<u8>| s.into_iter().map(|v| 2 * v as u32 + 1).collect::<Vec<_>>();
        match self {
            AmplitudeMatcher::Ccdm(c) => Ok(vec![symbols_to_amps(c.match_bits(data)?)]),
            AmplitudeMatcher::Pdm(p) => Ok(vec![p.match_bits(data)?]),
            AmplitudeMatcher::Extended(p) => p.match_bits(data),
            AmplitudeMatcher::Individual(cs) => {
                if data.len() != self.input_len() {
                    return Err(Error::domain(format!("matcher needs {} bits, got {}", self.input_len(), data.len())));
                }
                let mut offset = 0;
                cs.iter()
                    .map(|c| {
                        let chunk = &data[offset..offset + c.input_len()];
                        offset += c.input_len();
                        Ok(symbols_to_amps(c.match_bits(chunk)?))
                    })
                    .collect()
            }
        }
    }

    pub fn dematch(&self, amplitudes: &[Vec<u32>]) -> Result<Vec<u8>> {
        let channels = self.channel_bits().len();
        if amplitudes.len() != channels {
            return Err(Error::domain(format!("expected {channels} amplitude sequences, got {}", amplitudes.len())));
        }
        let amps_to_symbols = |a: &[u32]| -> Result<Vec<u8>> {
            a.iter()
                .map(|&x| {
                    if x % 2 == 1 && x < 512 {
                        Ok(((x - 1) / 2) as u8)
                    } else {
                        Err(Error::decode(None, format!("amplitude {x} is not a CCDM symbol")))
                    }
                })
                .collect()
        };
        match self {
            AmplitudeMatcher::Ccdm(c) => c.dematch(&amps_to_symbols(&amplitudes[0])?),
            AmplitudeMatcher::Pdm(p) => p.dematch(&amplitudes[0]),
            AmplitudeMatcher::Extended(p) => p.dematch(amplitudes),
            AmplitudeMatcher::Individual(cs) => {
                let mut out = Vec::with_capacity(self.input_len());
                for (c, a) in cs.iter().zip(amplitudes) {
                    out.extend(c.dematch(&amps_to_symbols(a)?)?);
                }
                Ok(out)
            }
        }
    }
}

fn ccdm_bits(c: &CcdmConfig) -> usize {
    c.alphabet_size().trailing_zeros() as usize + 1
}

fn ccdm_distribution(c: &CcdmConfig) -> Result<InputDistribution> {
    if !c.alphabet_size().is_power_of_two() {
        return Err(Error::config(format!("alphabet of {} amplitudes is not an ASK size", c.alphabet_size())));
    }
    InputDistribution::from_amplitudes(ccdm_bits(c), c.composition().distribution())
}

/// Frame geometry of a PAS link.
#[derive(Debug, Clone, PartialEq)]
pub struct PasConfig {
    matcher: AmplitudeMatcher,
    channel_bits: Vec<usize>,
    n: usize,
    code_len: usize,
    code_dim: usize,
    labelings: Vec<Labeling>,
    distributions: Vec<InputDistribution>,
}

impl PasConfig {
    /// Validates that `code` fits the matcher: length `Σ m_ℓ n` and between
    /// zero and `L n` extra data bits.
    pub fn new(matcher: AmplitudeMatcher, code: &SystematicCode) -> Result<Self> {
        let channel_bits = matcher.channel_bits();
        let n = matcher.uses_per_channel();
        if let AmplitudeMatcher::Individual(cs) = &matcher {
            if cs.is_empty() || cs.iter().any(|c| c.output_len() != n) {
                return Err(Error::config("individual matchers need a common output length"));
            }
        }
        let total: usize = channel_bits.iter().sum::<usize>() * n;
        if code.len() != total {
            return Err(Error::config(format!(
                "code length {} does not match {} bits per frame",
                code.len(),
                total
            )));
        }
        let amplitude_bits: usize = channel_bits.iter().map(|m| (m - 1) * n).sum();
        let signs = channel_bits.len() * n;
        if code.dimension() < amplitude_bits || code.dimension() > amplitude_bits + signs {
            return Err(Error::config(format!(
                "PAS requires 0 ≤ γ ≤ 1: code dimension {} outside [{amplitude_bits}, {}]",
                code.dimension(),
                amplitude_bits + signs
            )));
        }
        let labelings = channel_bits.iter().map(|&m| Labeling::brgc(m)).collect::<Result<Vec<_>>>()?;
        let distributions = matcher.distributions()?;
        Ok(Self {
            matcher,
            channel_bits,
            n,
            code_len: code.len(),
            code_dim: code.dimension(),
            labelings,
            distributions,
        })
    }

    pub fn matcher(&self) -> &AmplitudeMatcher {
        &self.matcher
    }

    pub fn channel_bits(&self) -> &[usize] {
        &self.channel_bits
    }

    pub fn num_channels(&self) -> usize {
        self.channel_bits.len()
    }

    pub fn uses_per_channel(&self) -> usize {
        self.n
    }

    pub fn code_rate(&self) -> f64 {
        self.code_dim as f64 / self.code_len as f64
    }

    fn amplitude_bits(&self) -> usize {
        self.channel_bits.iter().map(|m| (m - 1) * self.n).sum()
    }

    /// Sign bits carrying data, `γ L n`.
    pub fn extra_bits(&self) -> usize {
        self.code_dim - self.amplitude_bits()
    }

    /// Fraction of signs carrying data.
    pub fn gamma(&self) -> f64 {
        self.extra_bits() as f64 / (self.num_channels() * self.n) as f64
    }

    /// Matcher input bits `k`.
    pub fn matcher_bits(&self) -> usize {
        self.matcher.input_len()
    }

    /// Data bits per frame, `k + γ L n`.
    pub fn data_len(&self) -> usize {
        self.matcher_bits() + self.extra_bits()
    }

    /// `R_t = k / (L n) + γ`.
    pub fn transmission_rate(&self) -> f64 {
        self.data_len() as f64 / (self.num_channels() * self.n) as f64
    }

    /// Amplitude distribution on each channel.
    pub fn distributions(&self) -> &[InputDistribution] {
        &self.distributions
    }

    fn check_code(&self, code: &SystematicCode) -> Result<()> {
        if code.len() != self.code_len || code.dimension() != self.code_dim {
            return Err(Error::config("code does not match the PAS configuration"));
        }
        Ok(())
    }

    fn sign_position(&self, channel: usize, i: usize) -> usize {
        self.amplitude_bits() + channel * self.n + i
    }
}

/// Encodes one frame for a single channel into signal points `±1, ±3, …`.
pub fn pas_encode(cfg: &PasConfig, code: &SystematicCode, data: &[u8]) -> Result<Vec<i32>> {
    if cfg.num_channels() != 1 {
        return Err(Error::config("single-channel encoding of a multi-channel configuration"));
    }
    Ok(pas_encode_parallel(cfg, code, data)?.pop().unwrap())
}

/// Encodes one frame into one signal point sequence per channel, all
/// protected by a single codeword.
pub fn pas_encode_parallel(cfg: &PasConfig, code: &SystematicCode, data: &[u8]) -> Result<Vec<Vec<i32>>> {
    cfg.check_code(code)?;
    if data.len() != cfg.data_len() {
        return Err(Error::domain(format!("frame needs {} data bits, got {}", cfg.data_len(), data.len())));
    }
    let (matched, extra) = data.split_at(cfg.matcher_bits());
    let amplitudes = cfg.matcher.match_bits(matched)?;
    let mut info = Vec::with_capacity(code.dimension());
    for (amps, lab) in amplitudes.iter().zip(&cfg.labelings) {
        for &a in amps {
            info.extend(lab.amplitude_label(a)?);
        }
    }
    info.extend_from_slice(extra);
    let codeword = code.encode(&info)?;
    amplitudes
        .iter()
        .enumerate()
        .map(|(l, amps)| {
            amps.iter()
                .enumerate()
                .map(|(i, &a)| {
                    let a = a as i32;
                    Ok(if codeword[cfg.sign_position(l, i)] == 1 { a } else { -a })
                })
                .collect()
        })
        .collect()
}

/// Result of receiving one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasDecoded {
    pub data: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Decodes `y = Δ x + z` on a single channel with unit-variance noise.
pub fn pas_decode(cfg: &PasConfig, code: &SystematicCode, y: &[f64], delta: f64, max_iters: usize) -> Result<PasDecoded> {
    pas_decode_parallel(cfg, code, std::slice::from_ref(&y.to_vec()), &[delta], max_iters)
}

/// Decodes one frame from `y_ℓ = s_ℓ x_ℓ + z_ℓ`, where `s_ℓ = h_ℓ Δ_ℓ` is the
/// received scaling of channel `ℓ`.
pub fn pas_decode_parallel(
    cfg: &PasConfig,
    code: &SystematicCode,
    ys: &[Vec<f64>],
    scales: &[f64],
    max_iters: usize,
) -> Result<PasDecoded> {
    cfg.check_code(code)?;
    let channels = cfg.num_channels();
    if ys.len() != channels || scales.len() != channels {
        return Err(Error::domain(format!("expected {channels} received sequences and scalings")));
    }
    if ys.iter().any(|y| y.len() != cfg.n) {
        return Err(Error::domain(format!("every channel carries {} symbols", cfg.n)));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::domain("scalings must be positive"));
    }
    let mut llrs = vec![0.0; code.len()];
    let mut offset = 0;
    for (l, ((y, &s), (dist, lab))) in ys
        .iter()
        .zip(scales)
        .zip(cfg.distributions.iter().zip(&cfg.labelings))
        .enumerate()
    {
        let m = lab.bits();
        let symbol_llrs = Demapper::new(dist, lab)?.llrs(y, s);
        for i in 0..cfg.n {
            let bits = &symbol_llrs[i * m..(i + 1) * m];
            llrs[cfg.sign_position(l, i)] = bits[0];
            llrs[offset + i * (m - 1)..offset + (i + 1) * (m - 1)].copy_from_slice(&bits[1..]);
        }
        offset += (m - 1) * cfg.n;
    }
    let outcome = code.decode(&llrs, max_iters)?;
    let mut amplitudes = Vec::with_capacity(channels);
    let mut offset = 0;
    for lab in &cfg.labelings {
        let m = lab.bits();
        let amps = (0..cfg.n)
            .map(|i| lab.amplitude_map(&outcome.bits[offset + i * (m - 1)..offset + (i + 1) * (m - 1)]))
            .collect::<Result<Vec<_>>>()?;
        offset += (m - 1) * cfg.n;
        amplitudes.push(amps);
    }
    let mut data = cfg.matcher.dematch(&amplitudes)?;
    data.extend_from_slice(&outcome.bits[offset..offset + cfg.extra_bits()]);
    Ok(PasDecoded {
        data,
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdm::LevelMatcher;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| rng.gen_range(0..2)).collect()
    }

    fn noiseless(cfg: &PasConfig, code: &SystematicCode, x: &[Vec<i32>]) -> PasDecoded {
        let ys: Vec<Vec<f64>> = x.iter().map(|s| s.iter().map(|&v| 30.0 * v as f64).collect()).collect();
        pas_decode_parallel(cfg, code, &ys, &vec![30.0; x.len()], BP_ITERATIONS).unwrap()
    }

    #[test]
    fn shaped_8ask_round_trip() {
        let code = SystematicCode::shipped();
        let pdm = PdmConfig::new(
            3,
            504,
            vec![
                LevelMatcher::Shaped(CcdmConfig::for_distribution(&[0.3, 0.7], 504).unwrap()),
                LevelMatcher::Shaped(CcdmConfig::for_distribution(&[0.45, 0.55], 504).unwrap()),
            ],
        )
        .unwrap();
        let cfg = PasConfig::new(AmplitudeMatcher::Pdm(pdm.clone()), &code).unwrap();
        assert!((cfg.gamma() - 0.5).abs() < 1e-12);
        assert_eq!(cfg.transmission_rate(), (pdm.input_len() + 252) as f64 / 504.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let data = random_bits(&mut rng, cfg.data_len());
            let x = pas_encode(&cfg, &code, &data).unwrap();
            let amps: Vec<u32> = x.iter().map(|v| v.unsigned_abs()).collect();
            assert_eq!(amps, pdm.match_bits(&data[..pdm.input_len()]).unwrap());
            let out = noiseless(&cfg, &code, &[x]);
            assert!(out.converged);
            assert_eq!(out.data, data);
        }
    }

    #[test]
    fn codeword_is_valid_and_signs_follow_layout() {
        let code = SystematicCode::shipped();
        let cfg = PasConfig::new(AmplitudeMatcher::Pdm(PdmConfig::uniform(2, 756).unwrap()), &code).unwrap();
        assert!((cfg.gamma() - 2.0 / 3.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_bits(&mut rng, cfg.data_len());
        let x = pas_encode(&cfg, &code, &data).unwrap();
        let lab = Labeling::brgc(2).unwrap();
        let mut cw: Vec<u8> = x.iter().flat_map(|&v| lab.amplitude_label(v.unsigned_abs()).unwrap()).collect();
        cw.extend(x.iter().map(|&v| u8::from(v > 0)));
        assert!(code.is_codeword(&cw));
        assert_eq!(&cw[756..756 + 504], &data[756..]);
    }

    #[test]
    fn parallel_round_trip() {
        let h = peg_ira(5 * 40 + 4 * 40 + 3 * 40, 420, 3, 2).unwrap();
        let code = SystematicCode::new(h).unwrap();
        let bits = vec![5, 4, 3];
        let levels = ExtendedPdmPlan::level_lengths(&bits, 40)
            .iter()
            .zip([0.25, 0.4, 0.45, 0.47])
            .map(|(&len, p)| LevelMatcher::Shaped(CcdmConfig::for_distribution(&[p, 1.0 - p], len).unwrap()))
            .collect();
        let plan = ExtendedPdmPlan::new(bits, 40, levels).unwrap();
        let cfg = PasConfig::new(AmplitudeMatcher::Extended(plan), &code).unwrap();
        assert_eq!(cfg.extra_bits(), 60);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = random_bits(&mut rng, cfg.data_len());
        let x = pas_encode_parallel(&cfg, &code, &data).unwrap();
        assert_eq!(x.iter().map(Vec::len).collect::<Vec<_>>(), vec![40; 3]);
        assert_eq!(noiseless(&cfg, &code, &x).data, data);
        assert!(pas_encode(&cfg, &code, &data).is_err());
    }

    #[test]
    fn degenerate_all_ones_frame() {
        let h = peg_ira(3 * 24, 48, 3, 7).unwrap();
        let code = SystematicCode::new(h).unwrap();
        let ccdm = CcdmConfig::from_counts(vec![24, 0, 0, 0]).unwrap();
        let cfg = PasConfig::new(AmplitudeMatcher::Ccdm(ccdm), &code).unwrap();
        assert_eq!(cfg.matcher_bits(), 0);
        assert_eq!(cfg.gamma(), 0.0);
        let x = pas_encode(&cfg, &code, &[]).unwrap();
        assert!(x.iter().all(|v| v.abs() == 1));
        assert!(noiseless(&cfg, &code, &[x]).data.is_empty());
    }

    #[test]
    fn rejects_mismatched_code() {
        let code = SystematicCode::shipped();
        let pdm = PdmConfig::uniform(3, 500).unwrap();
        assert!(matches!(PasConfig::new(AmplitudeMatcher::Pdm(pdm), &code), Err(Error::Config(_))));
        // 4096-ASK has more amplitude bits than the code has information bits
        let pdm = PdmConfig::uniform(12, 126).unwrap();
        assert!(PasConfig::new(AmplitudeMatcher::Pdm(pdm), &code).is_err());
    }
}
