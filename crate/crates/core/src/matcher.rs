//! Constant-composition distribution matching.
//!
//! A [`Ccdm`] maps `k` uniform input bits to one of the
//! `M = n! / (c_0! c_1! … c_{q-1}!)` sequences with composition `c`, where
//! `k = floor(log2 M)`. The input is read as the point `d / 2^k` of the unit
//! interval and arithmetic decoding with exact integer widths selects the
//! sequence whose subinterval contains it. At each position the subinterval
//! of symbol `s` has width `(remaining count of s) / (remaining length)` of
//! the current interval, candidates ordered by symbol index. Working in units
//! of `1 / M` every width is an integer, so no renormalization is needed and
//! the map is exactly invertible.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_biguint, biguint_to_bits};
use crate::error::{Error, Result};
use crate::infotheory::entropy;

/// Symbol counts of a constant-composition sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition {
    counts: Vec<usize>,
}

impl Composition {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::domain("a composition needs at least two symbols"));
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(Error::domain("a composition needs a positive length"));
        }
        Ok(Self { counts })
    }

    /// Output length `n`.
    pub fn len(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Empirical distribution `counts / n`.
    pub fn distribution(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Composition of `symbols` over an alphabet of size `q`.
    pub fn of_sequence(symbols: &[u8], q: usize) -> Result<Self> {
        let mut counts = vec![0usize; q];
        for &s in symbols {
            *counts
                .get_mut(s as usize)
                .ok_or_else(|| Error::domain(format!("symbol {s} outside alphabet of size {q}")))? += 1;
        }
        Self::new(counts)
    }
}

/// Quantizes `target` to a composition of length `n` with the
/// largest-remainder rule: `floor(n p)` per symbol, leftover slots go to the
/// largest fractional parts, ties to the smaller symbol index.
pub fn quantize_distribution(target: &[f64], n: usize) -> Result<Composition> {
    if n == 0 {
        return Err(Error::domain("output length must be positive"));
    }
    if target.len() < 2 {
        return Err(Error::domain("need at least two symbols"));
    }
    if target.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::domain("probabilities must be finite and non-negative"));
    }
    let total: f64 = target.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
    }
    let scaled: Vec<f64> = target.iter().map(|p| p / total * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..target.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Composition::new(counts)
}

/// Primes up to and including `n`.
fn primes_up_to(n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(p, &is)| is.then_some(p))
        .collect()
}

/// Exponent of prime `p` in `n!`.
fn legendre(mut n: usize, p: usize) -> usize {
    let mut e = 0;
    while n > 0 {
        n /= p;
        e += n;
    }
    e
}

fn product_tree(mut factors: Vec<BigUint>) -> BigUint {
    if factors.is_empty() {
        return BigUint::one();
    }
    while factors.len() > 1 {
        factors = factors
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a * b,
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    factors.pop().unwrap()
}

/// Exact multinomial coefficient `n! / prod(c_i!)`.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let n: usize = counts.iter().sum();
    let mut factors = Vec::new();
    for p in primes_up_to(n) {
        let e = legendre(n, p) - counts.iter().map(|&c| legendre(c, p)).sum::<usize>();
        if e > 0 {
            factors.push(BigUint::from(p).pow(e as u32));
        }
    }
    product_tree(factors)
}

/// Number of input bits `k = floor(log2 multinomial(counts))`.
pub fn input_length(comp: &Composition) -> usize {
    multinomial(comp.counts()).bits() as usize - 1
}

/// A constant-composition matcher configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcdmConfig {
    composition: Composition,
    k: usize,
    num_sequences: BigUint,
}

/// Binary CCDM descriptor used in serialized plans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcdmSpec {
    pub counts: Vec<usize>,
}

impl CcdmConfig {
    pub fn new(composition: Composition) -> Self {
        let num_sequences = multinomial(composition.counts());
        let k = num_sequences.bits() as usize - 1;
        Self {
            composition,
            k,
            num_sequences,
        }
    }

    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        Ok(Self::new(Composition::new(counts)?))
    }

    /// Quantizes `target` at length `n` and builds the matcher.
    pub fn for_distribution(target: &[f64], n: usize) -> Result<Self> {
        Ok(Self::new(quantize_distribution(target, n)?))
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    /// Input length in bits.
    pub fn input_len(&self) -> usize {
        self.k
    }

    /// Output length in symbols.
    pub fn output_len(&self) -> usize {
        self.composition.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.composition.alphabet_size()
    }

    /// Number of sequences with the configured composition.
    pub fn num_sequences(&self) -> &BigUint {
        &self.num_sequences
    }

    /// Matcher rate `k / n` in bits per output symbol.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.output_len() as f64
    }

    /// Output entropy minus rate, in bits per output symbol.
    pub fn rate_loss(&self) -> f64 {
        (entropy(&self.composition.distribution()) - self.rate()).max(0.0)
    }

    /// Maps exactly `k` bits to a sequence with the configured composition.
    pub fn match_bits(&self, data: &[u8]) -> Result<Vec<u8>> {
        if data.len() != self.k {
            return Err(Error::domain(format!(
                "matcher expects {} input bits, got {}",
                self.k,
                data.len()
            )));
        }
        if self.alphabet_size() > 256 {
            return Err(Error::domain("alphabets larger than 256 are not supported"));
        }
        let point = bits_to_biguint(data);
        // Index of the sequence whose interval [r/M, (r+1)/M) holds d/2^k.
        let mut target = (point * &self.num_sequences) >> self.k;
        let mut remaining = self.composition.counts.clone();
        let mut width = self.num_sequences.clone();
        let n = self.output_len();
        let mut out = Vec::with_capacity(n);
        for pos in 0..n {
            let left = n - pos;
            let mut chosen = None;
            for (s, &c) in remaining.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let sub = (&width * c) / left;
                if target < sub {
                    width = sub;
                    chosen = Some(s);
                    break;
                }
                target -= sub;
            }
            let s = chosen.expect("target lies inside the current interval");
            remaining[s] -= 1;
            out.push(s as u8);
        }
        debug_assert!(target.is_zero());
        Ok(out)
    }

    /// Inverse of [`CcdmConfig::match_bits`].
    pub fn dematch(&self, symbols: &[u8]) -> Result<Vec<u8>> {
        self.dematch_at_level(symbols, None)
    }

    pub(crate) fn dematch_at_level(&self, symbols: &[u8], level: Option<usize>) -> Result<Vec<u8>> {
        let n = self.output_len();
        if symbols.len() != n {
            return Err(Error::decode(
                level,
                format!("expected {n} symbols, got {}", symbols.len()),
            ));
        }
        let q = self.alphabet_size();
        let comp = Composition::of_sequence(symbols, q).map_err(|e| Error::decode(level, e.to_string()))?;
        if comp != self.composition {
            return Err(Error::decode(
                level,
                format!(
                    "composition {:?} differs from configured {:?}",
                    comp.counts(),
                    self.composition.counts()
                ),
            ));
        }
        let mut remaining = self.composition.counts.clone();
        let mut width = self.num_sequences.clone();
        let mut rank = BigUint::zero();
        for (pos, &sym) in symbols.iter().enumerate() {
            let left = n - pos;
            let sym = sym as usize;
            for (s, &c) in remaining.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let sub = (&width * c) / left;
                if s == sym {
                    width = sub;
                    break;
                }
                rank += sub;
            }
            remaining[sym] -= 1;
        }
        // d = ceil(r 2^k / M); r is in the image iff floor(d M / 2^k) == r.
        let d = Integer::div_ceil(&(&rank << self.k), &self.num_sequences);
        if d.bits() > self.k as u64 || (&d * &self.num_sequences) >> self.k != rank {
            return Err(Error::decode(level, "sequence is not in the image of the matcher"));
        }
        Ok(biguint_to_bits(&d, self.k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantization_examples() {
        assert_eq!(quantize_distribution(&[0.5, 0.5], 4).unwrap().counts(), &[2, 2]);
        assert_eq!(quantize_distribution(&[1.0, 0.0], 7).unwrap().counts(), &[7, 0]);
        // 1296 * 0.2522 = 326.85, 1296 * 0.7478 = 969.15
        assert_eq!(quantize_distribution(&[0.2522, 0.7478], 1296).unwrap().counts(), &[327, 969]);
        // ties go to the smaller index
        assert_eq!(quantize_distribution(&[0.5, 0.5], 3).unwrap().counts(), &[2, 1]);
        assert!(quantize_distribution(&[0.5, 0.6], 3).is_err());
        assert!(quantize_distribution(&[1.5, -0.5], 3).is_err());
        assert!(quantize_distribution(&[1.0], 3).is_err());
    }

    #[test]
    fn multinomial_small_values() {
        assert_eq!(multinomial(&[2, 2]), BigUint::from(6u32));
        assert_eq!(multinomial(&[3, 5]), BigUint::from(56u32));
        assert_eq!(multinomial(&[1, 2, 3]), BigUint::from(60u32));
        assert_eq!(multinomial(&[7, 0]), BigUint::one());
        assert_eq!(input_length(&Composition::new(vec![2, 2]).unwrap()), 2);
        assert_eq!(input_length(&Composition::new(vec![5, 0]).unwrap()), 0);
    }

    #[test]
    fn degenerate_composition() {
        let cfg = CcdmConfig::from_counts(vec![6, 0]).unwrap();
        assert_eq!(cfg.input_len(), 0);
        assert_eq!(cfg.match_bits(&[]).unwrap(), vec![0; 6]);
        assert_eq!(cfg.dematch(&[0; 6]).unwrap(), Vec::<u8>::new());
        assert_eq!(cfg.rate_loss(), 0.0);
    }

    #[test]
    fn n4_outputs_distinct() {
        let cfg = CcdmConfig::from_counts(vec![2, 2]).unwrap();
        assert_eq!(cfg.input_len(), 2);
        assert!((cfg.rate_loss() - 0.5).abs() < 1e-12);
        let mut seen = std::collections::HashSet::new();
        for d in 0..4u8 {
            let bits = vec![d >> 1, d & 1];
            let out = cfg.match_bits(&bits).unwrap();
            assert_eq!(out.iter().filter(|&&s| s == 0).count(), 2);
            assert!(seen.insert(out.clone()));
            assert_eq!(cfg.dematch(&out).unwrap(), bits);
        }
    }

    #[test]
    fn errors() {
        let cfg = CcdmConfig::from_counts(vec![3, 5]).unwrap();
        assert!(matches!(cfg.match_bits(&[0; 4]), Err(Error::Domain(_))));
        assert!(matches!(cfg.dematch(&[0, 0, 0, 0, 1, 1, 1, 0]), Err(Error::Decode { .. })));
        assert!(matches!(cfg.dematch(&[0; 3]), Err(Error::Decode { .. })));
        // 56 sequences, 32 used: the last sequence in index order is outside the image
        // for at least one of the unused ranks.
        let used: std::collections::HashSet<Vec<u8>> = (0..32u32)
            .map(|d| cfg.match_bits(&biguint_to_bits(&BigUint::from(d), 5)).unwrap())
            .collect();
        let mut rejected = 0;
        for mask in 0u32..256 {
            if mask.count_ones() != 5 {
                continue;
            }
            let seq: Vec<u8> = (0..8).map(|i| ((mask >> (7 - i)) & 1) as u8).collect();
            match cfg.dematch(&seq) {
                Ok(_) => assert!(used.contains(&seq)),
                Err(Error::Decode { .. }) => rejected += 1,
                Err(e) => panic!("{e}"),
            }
        }
        assert_eq!(rejected, 56 - 32);
    }

    #[test]
    fn random_round_trips_q_ary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let q = rng.gen_range(2..=32);
            let counts: Vec<usize> = (0..q).map(|_| rng.gen_range(0..6)).collect();
            let Ok(comp) = Composition::new(counts) else { continue };
            let cfg = CcdmConfig::new(comp);
            let data: Vec<u8> = (0..cfg.input_len()).map(|_| rng.gen_range(0..2)).collect();
            let out = cfg.match_bits(&data).unwrap();
            assert_eq!(Composition::of_sequence(&out, q).unwrap(), *cfg.composition());
            assert_eq!(cfg.dematch(&out).unwrap(), data);
        }
    }
}
