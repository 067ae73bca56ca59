//! Product distribution matching.
//!
//! A PDM for `2^m`-ASK runs one binary matcher per amplitude bit level
//! `j = 2..=m` and combines the level outputs into amplitudes with the NBBC
//! amplitude mapper, so the amplitude distribution is the product of the level
//! distributions. Data bits are consumed level by level in ascending `j`.
//!
//! The extended PDM serves `L` parallel channels with different constellation
//! sizes `m_ℓ`. Level `j` is shared by every channel with `m_ℓ ≥ j`; its
//! matcher has output length `n_j = #{ℓ : m_ℓ ≥ j} · n` and its output is cut
//! into contiguous blocks of `n` for the participating channels in ascending
//! channel order. Level 2 is the most significant amplitude bit on every
//! channel, which is what makes the sharing consistent: dropping the lowest
//! bits of a large constellation groups neighbouring amplitudes exactly as a
//! smaller constellation would.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::Labeling;
use crate::error::{Error, Result};
use crate::infotheory::{binary_entropy, InputDistribution};
use crate::matcher::CcdmConfig;

/// Matcher of one bit level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelMatcher {
    /// Binary CCDM; symbol 0 is bit value 0.
    Shaped(CcdmConfig),
    /// Raw data bits passed through unchanged.
    Uniform,
}

impl LevelMatcher {
    /// Input bits consumed for an output of `len` bits.
    pub fn input_len(&self, len: usize) -> usize {
        match self {
            LevelMatcher::Shaped(c) => c.input_len(),
            LevelMatcher::Uniform => len,
        }
    }

    /// `P(bit = 0)` of the output.
    pub fn p0(&self) -> f64 {
        match self {
            LevelMatcher::Shaped(c) => c.composition().distribution()[0],
            LevelMatcher::Uniform => 0.5,
        }
    }

    pub fn entropy(&self) -> f64 {
        binary_entropy(self.p0())
    }

    fn check(&self, len: usize, j: usize) -> Result<()> {
        if let LevelMatcher::Shaped(c) = self {
            if c.alphabet_size() != 2 {
                return Err(Error::config(format!("level {j} matcher must be binary")));
            }
            if c.output_len() != len {
                return Err(Error::config(format!(
                    "level {j} matcher has output length {}, expected {len}",
                    c.output_len()
                )));
            }
        }
        Ok(())
    }

    fn run(&self, data: &[u8]) -> Result<Vec<u8>> {
        match self {
            LevelMatcher::Shaped(c) => c.match_bits(data),
            LevelMatcher::Uniform => Ok(data.to_vec()),
        }
    }

    fn invert(&self, bits: &[u8], j: usize) -> Result<Vec<u8>> {
        match self {
            LevelMatcher::Shaped(c) => c.dematch_at_level(bits, Some(j)),
            LevelMatcher::Uniform => Ok(bits.to_vec()),
        }
    }
}

/// One shared bit level of an extended PDM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedLevel {
    j: usize,
    channels: Vec<usize>,
    matcher: LevelMatcher,
}

impl ExtendedLevel {
    /// Bit level index, starting at 2.
    pub fn level(&self) -> usize {
        self.j
    }

    /// Participating channels in ascending order.
    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn matcher(&self) -> &LevelMatcher {
        &self.matcher
    }
}

/// Extended PDM over `L` parallel channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedPdmPlan {
    channel_bits: Vec<usize>,
    n: usize,
    levels: Vec<ExtendedLevel>,
}

impl ExtendedPdmPlan {
    /// `matchers[j - 2]` drives level `j`, for `j = 2..=max(m_ℓ)`.
    pub fn new(channel_bits: Vec<usize>, n: usize, matchers: Vec<LevelMatcher>) -> Result<Self> {
        if channel_bits.is_empty() {
            return Err(Error::config("need at least one channel"));
        }
        if n == 0 {
            return Err(Error::config("uses per channel must be positive"));
        }
        if let Some(&m) = channel_bits.iter().find(|&&m| !(2..=16).contains(&m)) {
            return Err(Error::config(format!("channel with {m} bits per symbol is not supported")));
        }
        let max_m = *channel_bits.iter().max().unwrap();
        if matchers.len() != max_m - 1 {
            return Err(Error::config(format!(
                "expected {} level matchers, got {}",
                max_m - 1,
                matchers.len()
            )));
        }
        let levels = matchers
            .into_iter()
            .enumerate()
            .map(|(idx, matcher)| {
                let j = idx + 2;
                let channels: Vec<usize> = (0..channel_bits.len()).filter(|&l| channel_bits[l] >= j).collect();
                matcher.check(channels.len() * n, j)?;
                Ok(ExtendedLevel { j, channels, matcher })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            channel_bits,
            n,
            levels,
        })
    }

    /// Output lengths `n_j = #{ℓ : m_ℓ ≥ j} · n`, for `j = 2..=m`.
    pub fn level_lengths(channel_bits: &[usize], n: usize) -> Vec<usize> {
        let max_m = channel_bits.iter().copied().max().unwrap_or(1);
        (2..=max_m)
            .map(|j| channel_bits.iter().filter(|&&m| m >= j).count() * n)
            .collect()
    }

    pub fn channel_bits(&self) -> &[usize] {
        &self.channel_bits
    }

    pub fn num_channels(&self) -> usize {
        self.channel_bits.len()
    }

    /// Channel uses per channel.
    pub fn uses_per_channel(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[ExtendedLevel] {
        &self.levels
    }

    pub fn output_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.channels.len() * self.n).collect()
    }

    /// Input bits `k_j` per level.
    pub fn level_input_lengths(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.matcher.input_len(l.channels.len() * self.n))
            .collect()
    }

    /// Total input bits `k = Σ_j k_j`.
    pub fn input_len(&self) -> usize {
        self.level_input_lengths().iter().sum()
    }

    /// Data bits per channel use, `k / (L n)`.
    pub fn rate(&self) -> f64 {
        self.input_len() as f64 / (self.num_channels() * self.n) as f64
    }

    /// Entropy per channel use, `Σ_j H(B_j) n_j / (L n)`.
    pub fn entropy_rate(&self) -> f64 {
        let total: f64 = self
            .levels
            .iter()
            .map(|l| l.matcher.entropy() * (l.channels.len() * self.n) as f64)
            .sum();
        total / (self.num_channels() * self.n) as f64
    }

    /// Rate loss per channel use.
    pub fn rate_loss(&self) -> f64 {
        (self.entropy_rate() - self.rate()).max(0.0)
    }

    /// `P(B_j = 0)` per level.
    pub fn level_p0s(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.matcher.p0()).collect()
    }

    /// Amplitude distribution generated on channel `l`.
    pub fn channel_distribution(&self, l: usize) -> Result<InputDistribution> {
        let m = self.channel_bits[l];
        InputDistribution::from_levels(Labeling::nbbc(m)?, &self.level_p0s()[..m - 1])
    }

    /// Maps `k` data bits to `L` amplitude sequences of length `n`.
    pub fn match_bits(&self, data: &[u8]) -> Result<Vec<Vec<u32>>> {
        let k = self.input_len();
        if data.len() != k {
            return Err(Error::domain(format!("extended PDM expects {k} bits, got {}", data.len())));
        }
        let mut chunks = Vec::with_capacity(self.levels.len());
        let mut offset = 0;
        for len in self.level_input_lengths() {
            chunks.push(&data[offset..offset + len]);
            offset += len;
        }
        let columns = self
            .levels
            .par_iter()
            .zip(chunks.into_par_iter())
            .map(|(level, chunk)| level.matcher.run(chunk))
            .collect::<Result<Vec<_>>>()?;
        let n = self.n;
        let mut labels: Vec<Vec<usize>> = vec![vec![0; n]; self.num_channels()];
        for (level, column) in self.levels.iter().zip(&columns) {
            for (block, &l) in level.channels.iter().enumerate() {
                let shift = self.channel_bits[l] - level.j;
                for (i, &b) in column[block * n..(block + 1) * n].iter().enumerate() {
                    labels[l][i] |= (b as usize) << shift;
                }
            }
        }
        labels
            .into_iter()
            .enumerate()
            .map(|(l, row)| {
                let nbbc = Labeling::nbbc(self.channel_bits[l])?;
                Ok(row
                    .into_iter()
                    .map(|label| 2 * nbbc.amplitude_index_of_label(label) as u32 + 1)
                    .collect())
            })
            .collect()
    }

    /// Inverse of [`ExtendedPdmPlan::match_bits`].
    pub fn dematch(&self, sequences: &[Vec<u32>]) -> Result<Vec<u8>> {
        if sequences.len() != self.num_channels() {
            return Err(Error::domain(format!(
                "expected {} amplitude sequences, got {}",
                self.num_channels(),
                sequences.len()
            )));
        }
        let n = self.n;
        let mut labels = Vec::with_capacity(sequences.len());
        for (l, seq) in sequences.iter().enumerate() {
            let m = self.channel_bits[l];
            if seq.len() != n {
                return Err(Error::domain(format!(
                    "channel {l}: expected {n} amplitudes, got {}",
                    seq.len()
                )));
            }
            let nbbc = Labeling::nbbc(m)?;
            let row = seq
                .iter()
                .map(|&a| {
                    if nbbc.constellation().contains_amplitude(a) {
                        Ok(nbbc.amplitude_label_index((a as usize - 1) / 2))
                    } else {
                        Err(Error::domain(format!("channel {l}: {a} is not a {}-ASK amplitude", 1 << m)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            labels.push(row);
        }
        let recovered = self
            .levels
            .par_iter()
            .map(|level| {
                let mut column = Vec::with_capacity(level.channels.len() * n);
                for &l in &level.channels {
                    let shift = self.channel_bits[l] - level.j;
                    column.extend(labels[l].iter().map(|&label| ((label >> shift) & 1) as u8));
                }
                level.matcher.invert(&column, level.j)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(recovered.concat())
    }

    pub fn to_document(&self) -> PlanDocument {
        PlanDocument {
            channels: self
                .channel_bits
                .iter()
                .map(|&m| ChannelEntry { m, n: self.n })
                .collect(),
            levels: self
                .levels
                .iter()
                .zip(self.level_input_lengths())
                .map(|(level, k_j)| LevelEntry {
                    j: level.j,
                    n_j: level.channels.len() * self.n,
                    counts: match &level.matcher {
                        LevelMatcher::Shaped(c) => Some(c.composition().counts().to_vec()),
                        LevelMatcher::Uniform => None,
                    },
                    k_j,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &PlanDocument) -> Result<Self> {
        let n = doc
            .channels
            .first()
            .ok_or_else(|| Error::config("plan has no channels"))?
            .n;
        if doc.channels.iter().any(|c| c.n != n) {
            return Err(Error::config("all channels must use the same n"));
        }
        let channel_bits: Vec<usize> = doc.channels.iter().map(|c| c.m).collect();
        let mut levels: Vec<&LevelEntry> = doc.levels.iter().collect();
        levels.sort_by_key(|l| l.j);
        let expected = Self::level_lengths(&channel_bits, n);
        if levels.len() != expected.len() || levels.iter().enumerate().any(|(i, l)| l.j != i + 2) {
            return Err(Error::config("plan must list levels 2..=max m exactly once"));
        }
        let matchers = levels
            .iter()
            .map(|l| match &l.counts {
                Some(c) => Ok(LevelMatcher::Shaped(CcdmConfig::from_counts(c.clone())?)),
                None => Ok(LevelMatcher::Uniform),
            })
            .collect::<Result<Vec<_>>>()?;
        let plan = Self::new(channel_bits, n, matchers)?;
        for ((entry, n_j), k_j) in levels.iter().zip(plan.output_lengths()).zip(plan.level_input_lengths()) {
            if entry.n_j != n_j || entry.k_j != k_j {
                return Err(Error::config(format!(
                    "level {}: document says n_j={}, k_j={} but the matcher gives n_j={n_j}, k_j={k_j}",
                    entry.j, entry.n_j, entry.k_j
                )));
            }
        }
        Ok(plan)
    }
}

/// Serialized form of an [`ExtendedPdmPlan`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub channels: Vec<ChannelEntry>,
    pub levels: Vec<LevelEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub m: usize,
    pub n: usize,
}

/// One level; `counts` is absent for uniform levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelEntry {
    pub j: usize,
    pub n_j: usize,
    pub counts: Option<Vec<usize>>,
    pub k_j: usize,
}

/// Single-channel PDM for `2^m`-ASK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdmConfig {
    inner: ExtendedPdmPlan,
}

impl PdmConfig {
    /// `levels[j - 2]` drives level `j`.
    pub fn new(m: usize, n: usize, levels: Vec<LevelMatcher>) -> Result<Self> {
        Ok(Self {
            inner: ExtendedPdmPlan::new(vec![m], n, levels)?,
        })
    }

    /// All levels uniform.
    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![LevelMatcher::Uniform; m.saturating_sub(1)])
    }

    pub fn bits(&self) -> usize {
        self.inner.channel_bits[0]
    }

    /// Amplitudes per frame.
    pub fn output_len(&self) -> usize {
        self.inner.n
    }

    pub fn input_len(&self) -> usize {
        self.inner.input_len()
    }

    pub fn level_input_lengths(&self) -> Vec<usize> {
        self.inner.level_input_lengths()
    }

    pub fn levels(&self) -> impl Iterator<Item = &LevelMatcher> {
        self.inner.levels.iter().map(|l| &l.matcher)
    }

    /// `k / n`.
    pub fn rate(&self) -> f64 {
        self.inner.rate()
    }

    /// `Σ_j [H(B_j) − k_j / n]`.
    pub fn rate_loss(&self) -> f64 {
        self.inner.rate_loss()
    }

    pub fn level_p0s(&self) -> Vec<f64> {
        self.inner.level_p0s()
    }

    pub fn amplitude_distribution(&self) -> Result<InputDistribution> {
        self.inner.channel_distribution(0)
    }

    pub fn as_extended(&self) -> &ExtendedPdmPlan {
        &self.inner
    }

    pub fn match_bits(&self, data: &[u8]) -> Result<Vec<u32>> {
        Ok(self.inner.match_bits(data)?.pop().unwrap())
    }

    pub fn dematch(&self, amplitudes: &[u32]) -> Result<Vec<u8>> {
        self.inner.dematch(std::slice::from_ref(&amplitudes.to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| rng.gen_range(0..2)).collect()
    }

    #[test]
    fn degenerate_level_gives_large_amplitude() {
        let level = LevelMatcher::Shaped(CcdmConfig::from_counts(vec![5, 0]).unwrap());
        let pdm = PdmConfig::new(2, 5, vec![level]).unwrap();
        assert_eq!(pdm.input_len(), 0);
        assert_eq!(pdm.match_bits(&[]).unwrap(), vec![3; 5]);
        assert_eq!(pdm.rate_loss(), 0.0);
    }

    #[test]
    fn uniform_levels_are_nbc_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 16;
        let pdm = PdmConfig::uniform(3, n).unwrap();
        assert_eq!(pdm.rate_loss(), 0.0);
        let data = random_bits(&mut rng, 2 * n);
        let amps = pdm.match_bits(&data).unwrap();
        let nbbc = Labeling::nbbc(3).unwrap();
        for i in 0..n {
            assert_eq!(amps[i], nbbc.amplitude_map(&[data[i], data[n + i]]).unwrap());
        }
        assert_eq!(pdm.dematch(&amps).unwrap(), data);
    }

    #[test]
    fn rate_loss_of_single_shaped_level() {
        let level = LevelMatcher::Shaped(CcdmConfig::from_counts(vec![2, 2]).unwrap());
        let pdm = PdmConfig::new(2, 4, vec![level]).unwrap();
        assert!((pdm.rate_loss() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn broken_composition_names_level() {
        let levels = vec![
            LevelMatcher::Uniform,
            LevelMatcher::Shaped(CcdmConfig::from_counts(vec![3, 5]).unwrap()),
        ];
        let pdm = PdmConfig::new(3, 8, levels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = random_bits(&mut rng, pdm.input_len());
        let mut amps = pdm.match_bits(&data).unwrap();
        // flip the level-3 bit of the first amplitude: 1 <-> 3, 5 <-> 7
        amps[0] = match amps[0] {
            1 => 3,
            3 => 1,
            5 => 7,
            _ => 5,
        };
        match pdm.dematch(&amps) {
            Err(Error::Decode { level: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_channel_sharing_lengths() {
        let n = 6;
        let plan = ExtendedPdmPlan::new(
            vec![2, 3],
            n,
            vec![
                LevelMatcher::Shaped(CcdmConfig::from_counts(vec![4, 8]).unwrap()),
                LevelMatcher::Shaped(CcdmConfig::from_counts(vec![2, 4]).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(plan.output_lengths(), vec![2 * n, n]);
        assert_eq!(plan.levels()[0].channels(), &[0, 1]);
        assert_eq!(plan.levels()[1].channels(), &[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_bits(&mut rng, plan.input_len());
        let seqs = plan.match_bits(&data).unwrap();
        assert!(seqs[0].iter().all(|a| [1, 3].contains(a)));
        assert_eq!(plan.dematch(&seqs).unwrap(), data);
        // wrong length
        assert!(plan.match_bits(&data[1..]).is_err());
    }

    #[test]
    fn table_lengths() {
        assert_eq!(
            ExtendedPdmPlan::level_lengths(&[5, 4, 3], 432),
            vec![1296, 1296, 864, 432]
        );
    }

    #[test]
    fn document_round_trip() {
        let plan = ExtendedPdmPlan::new(
            vec![3, 2],
            4,
            vec![
                LevelMatcher::Shaped(CcdmConfig::from_counts(vec![3, 5]).unwrap()),
                LevelMatcher::Uniform,
            ],
        )
        .unwrap();
        let doc = plan.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: PlanDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(ExtendedPdmPlan::from_document(&back).unwrap(), plan);
        let mut bad = doc.clone();
        bad.levels[0].k_j += 1;
        assert!(ExtendedPdmPlan::from_document(&bad).is_err());
        assert!(serde_json::from_str::<PlanDocument>(r#"{"channels":[],"levels":[],"extra":1}"#).is_err());
    }
}
