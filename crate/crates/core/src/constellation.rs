//! ASK constellations and their binary labels.
//!
//! A `2^m`-ASK constellation has the signal points `±1, ±3, …, ±(2^m − 1)`.
//! Every label `B1 B2 … Bm` in this crate uses `B1` for the sign and
//! `B2 … Bm` for the amplitude, with `B2` the most significant amplitude bit.
//! Labels are anchored so that the most negative point carries `00…0`; for
//! 8-ASK this gives
//!
//! | point | −7  | −5  | −3  | −1  | +1  | +3  | +5  | +7  |
//! |-------|-----|-----|-----|-----|-----|-----|-----|-----|
//! | BRGC  | 000 | 001 | 011 | 010 | 110 | 111 | 101 | 100 |
//! | NBBC  | 000 | 001 | 010 | 011 | 111 | 110 | 101 | 100 |
//!
//! so the sign bit is 1 on the positive half. The NBBC amplitude label is
//! the complemented natural binary index, i.e. amplitude 1 is `11…1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of bits per symbol.
pub const MAX_BITS: usize = 16;

/// A `2^m`-ASK constellation with unit half-spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AskConstellation {
    m: usize,
}

impl AskConstellation {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_BITS {
            return Err(Error::domain(format!(
                "bits per symbol must be in 1..={MAX_BITS}, got {m}"
            )));
        }
        Ok(Self { m })
    }

    /// Bits per symbol.
    pub fn bits(&self) -> usize {
        self.m
    }

    /// Number of signal points, `2^m`.
    pub fn order(&self) -> usize {
        1 << self.m
    }

    /// Number of amplitudes, `2^(m-1)`.
    pub fn num_amplitudes(&self) -> usize {
        1 << (self.m - 1)
    }

    /// Signal points in ascending order.
    pub fn points(&self) -> Vec<i32> {
        (0..self.order()).map(|i| self.point(i)).collect()
    }

    /// Amplitudes `1, 3, …, 2^m − 1`.
    pub fn amplitudes(&self) -> Vec<u32> {
        (0..self.num_amplitudes()).map(|v| 2 * v as u32 + 1).collect()
    }

    /// The `i`-th point in ascending order.
    pub fn point(&self, index: usize) -> i32 {
        2 * index as i32 - (self.order() as i32 - 1)
    }

    /// Position of `x` in ascending order, if `x` is a signal point.
    pub fn index_of(&self, x: i32) -> Option<usize> {
        let top = self.order() as i32 - 1;
        if x % 2 == 0 || x.abs() > top {
            return None;
        }
        Some(((x + top) / 2) as usize)
    }

    /// Returns true if `a` is one of the amplitudes.
    pub fn contains_amplitude(&self, a: u32) -> bool {
        a % 2 == 1 && (a as usize) < self.order()
    }
}

/// Supported label functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    /// Binary reflected Gray code.
    Brgc,
    /// Sign bit followed by the (complemented) natural binary amplitude code.
    Nbbc,
}

impl std::str::FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "brgc" => Ok(LabelKind::Brgc),
            "nbbc" | "nbc" => Ok(LabelKind::Nbbc),
            other => Err(Error::domain(format!("unknown labeling `{other}`"))),
        }
    }
}

/// A label function on a `2^m`-ASK constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Labeling {
    kind: LabelKind,
    constellation: AskConstellation,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

impl Labeling {
    pub fn new(kind: LabelKind, m: usize) -> Result<Self> {
        Ok(Self {
            kind,
            constellation: AskConstellation::new(m)?,
        })
    }

    pub fn brgc(m: usize) -> Result<Self> {
        Self::new(LabelKind::Brgc, m)
    }

    pub fn nbbc(m: usize) -> Result<Self> {
        Self::new(LabelKind::Nbbc, m)
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn bits(&self) -> usize {
        self.constellation.bits()
    }

    pub fn constellation(&self) -> AskConstellation {
        self.constellation
    }

    /// Amplitude label of amplitude index `v` (amplitude `2v + 1`) packed
    /// into the low `m − 1` bits, `B2` most significant.
    pub fn amplitude_label_index(&self, v: usize) -> usize {
        let m = self.bits();
        let mask = (1usize << (m - 1)) - 1;
        match self.kind {
            LabelKind::Nbbc => !v & mask,
            LabelKind::Brgc => gray((1 << (m - 1)) + v) & mask,
        }
    }

    /// Inverse of [`Labeling::amplitude_label_index`].
    pub fn amplitude_index_of_label(&self, label: usize) -> usize {
        let m = self.bits();
        let mask = (1usize << (m - 1)) - 1;
        match self.kind {
            LabelKind::Nbbc => !label & mask,
            LabelKind::Brgc => gray_inverse((1 << (m - 1)) | (label & mask)) - (1 << (m - 1)),
        }
    }

    /// Full label of the point with ascending index `i`, packed with `B1`
    /// in bit `m − 1`.
    pub fn label_index(&self, i: usize) -> usize {
        let m = self.bits();
        let half = 1usize << (m - 1);
        let (sign, v) = if i >= half {
            (1, i - half)
        } else {
            (0, half - 1 - i)
        };
        (sign << (m - 1)) | self.amplitude_label_index(v)
    }

    /// Ascending point index carrying the packed `label`.
    pub fn index_of_label(&self, label: usize) -> usize {
        let m = self.bits();
        let half = 1usize << (m - 1);
        let v = self.amplitude_index_of_label(label);
        if (label >> (m - 1)) & 1 == 1 {
            half + v
        } else {
            half - 1 - v
        }
    }

    /// Label of signal point `x`, `B1` first.
    pub fn label_symbol(&self, x: i32) -> Result<Vec<u8>> {
        let i = self
            .constellation
            .index_of(x)
            .ok_or_else(|| Error::domain(format!("{x} is not a {}-ASK point", self.constellation.order())))?;
        Ok(unpack(self.label_index(i), self.bits()))
    }

    /// Signal point carrying the label `bits`.
    pub fn map_bits(&self, bits: &[u8]) -> Result<i32> {
        let label = pack(bits, self.bits())?;
        Ok(self.constellation.point(self.index_of_label(label)))
    }

    /// Amplitude label `B2 … Bm` of amplitude `a`.
    pub fn amplitude_label(&self, a: u32) -> Result<Vec<u8>> {
        if !self.constellation.contains_amplitude(a) {
            return Err(Error::domain(format!(
                "{a} is not an amplitude of {}-ASK",
                self.constellation.order()
            )));
        }
        Ok(unpack(
            self.amplitude_label_index((a as usize - 1) / 2),
            self.bits() - 1,
        ))
    }

    /// Amplitude carrying the amplitude label `bits` (`m − 1` bits).
    pub fn amplitude_map(&self, bits: &[u8]) -> Result<u32> {
        let label = pack(bits, self.bits() - 1)?;
        Ok(2 * self.amplitude_index_of_label(label) as u32 + 1)
    }
}

fn unpack(label: usize, len: usize) -> Vec<u8> {
    (0..len).map(|b| ((label >> (len - 1 - b)) & 1) as u8).collect()
}

fn pack(bits: &[u8], len: usize) -> Result<usize> {
    if bits.len() != len {
        return Err(Error::domain(format!(
            "expected {len} bits, got {}",
            bits.len()
        )));
    }
    bits.iter().try_fold(0usize, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as usize),
        _ => Err(Error::domain(format!("bit value {b} is not 0 or 1"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(bits: &[u8]) -> String {
        bits.iter().map(|b| char::from(b'0' + b)).collect()
    }

    #[test]
    fn eight_ask_table() {
        let brgc = Labeling::brgc(3).unwrap();
        let nbbc = Labeling::nbbc(3).unwrap();
        let expected_brgc = ["000", "001", "011", "010", "110", "111", "101", "100"];
        let expected_nbbc = ["000", "001", "010", "011", "111", "110", "101", "100"];
        for (i, x) in [-7, -5, -3, -1, 1, 3, 5, 7].into_iter().enumerate() {
            assert_eq!(s(&brgc.label_symbol(x).unwrap()), expected_brgc[i], "brgc {x}");
            assert_eq!(s(&nbbc.label_symbol(x).unwrap()), expected_nbbc[i], "nbbc {x}");
        }
    }

    #[test]
    fn table_examples() {
        let nbbc = Labeling::nbbc(3).unwrap();
        let brgc = Labeling::brgc(3).unwrap();
        assert_eq!(nbbc.label_symbol(7).unwrap(), vec![1, 0, 0]);
        assert_eq!(brgc.label_symbol(-3).unwrap(), vec![0, 1, 1]);
        assert_eq!(nbbc.map_bits(&[1, 1, 1]).unwrap(), 1);
        assert_eq!(nbbc.map_bits(&[0, 0, 0]).unwrap(), -7);
        assert_eq!(brgc.map_bits(&[1, 1, 0]).unwrap(), 1);
        assert_eq!(nbbc.amplitude_map(&[1, 1]).unwrap(), 1);
        assert_eq!(nbbc.amplitude_map(&[0, 0]).unwrap(), 7);
        assert_eq!(Labeling::nbbc(4).unwrap().amplitude_map(&[1, 1, 1]).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let l = Labeling::brgc(3).unwrap();
        assert!(matches!(l.label_symbol(9), Err(Error::Domain(_))));
        assert!(matches!(l.label_symbol(2), Err(Error::Domain(_))));
        assert!(matches!(l.map_bits(&[1, 0]), Err(Error::Domain(_))));
        assert!(matches!(l.amplitude_map(&[1, 0, 1]), Err(Error::Domain(_))));
        assert!(matches!(l.amplitude_label(8), Err(Error::Domain(_))));
        assert!(AskConstellation::new(0).is_err());
    }

    #[test]
    fn bijection_and_gray_property() {
        for m in 2..=8 {
            let c = AskConstellation::new(m).unwrap();
            assert_eq!(c.points().len(), 1 << m);
            assert_eq!(c.amplitudes().len(), 1 << (m - 1));
            for kind in [LabelKind::Brgc, LabelKind::Nbbc] {
                let l = Labeling::new(kind, m).unwrap();
                let mut seen = std::collections::HashSet::new();
                for x in c.points() {
                    let bits = l.label_symbol(x).unwrap();
                    assert_eq!(bits.len(), m);
                    assert_eq!(l.map_bits(&bits).unwrap(), x);
                    assert_eq!(bits[0] == 1, x > 0, "sign bit for {x}");
                    assert!(seen.insert(bits));
                }
                for a in c.amplitudes() {
                    let bits = l.amplitude_label(a).unwrap();
                    assert_eq!(l.amplitude_map(&bits).unwrap(), a);
                }
            }
            let brgc = Labeling::brgc(m).unwrap();
            let pts = c.points();
            for w in pts.windows(2) {
                let a = brgc.label_symbol(w[0]).unwrap();
                let b = brgc.label_symbol(w[1]).unwrap();
                let d = a.iter().zip(&b).filter(|(x, y)| x != y).count();
                assert_eq!(d, 1, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn nbbc_grouping_collapses_neighbours() {
        for m in 3..=8 {
            let hi = Labeling::nbbc(m).unwrap();
            let lo = Labeling::nbbc(m - 1).unwrap();
            for a in AskConstellation::new(m).unwrap().amplitudes() {
                let mut bits = hi.amplitude_label(a).unwrap();
                bits.pop();
                let grouped = lo.amplitude_map(&bits).unwrap();
                // {1,3} -> 1, {5,7} -> 3, ...
                assert_eq!(grouped, 2 * ((a - 1) / 4) + 1);
            }
        }
    }
}
