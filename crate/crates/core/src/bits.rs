//! Bit vector helpers.
//!
//! Bits are carried as `u8` values restricted to 0 and 1. Packed payloads
//! are most significant bit first.

use num_bigint::BigUint;

/// Unpacks bytes into bits, most significant bit first.
pub fn unpack_bytes(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Packs bits into bytes, most significant bit first. A trailing partial
/// byte is padded with zeros.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))
        })
        .collect()
}

/// Interprets `bits` as an unsigned integer, first bit most significant.
pub fn bits_to_biguint(bits: &[u8]) -> BigUint {
    if bits.is_empty() {
        return BigUint::default();
    }
    let mut padded = vec![0u8; (8 - bits.len() % 8) % 8];
    padded.extend_from_slice(bits);
    BigUint::from_bytes_be(&pack_bits(&padded))
}

/// Writes `value` as exactly `len` bits, most significant first.
///
/// Panics if `value` does not fit.
pub fn biguint_to_bits(value: &BigUint, len: usize) -> Vec<u8> {
    assert!(value.bits() <= len as u64, "value does not fit in {len} bits");
    let mut out = vec![0u8; len];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = value.bit((len - 1 - i) as u64) as u8;
    }
    out
}

/// Returns true if every entry is 0 or 1.
pub fn is_binary(bits: &[u8]) -> bool {
    bits.iter().all(|&b| b <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_packing() {
        assert_eq!(unpack_bytes(&[0b1010_0001]), vec![1, 0, 1, 0, 0, 0, 0, 1]);
        assert_eq!(pack_bits(&[1, 1]), vec![0b1100_0000]);
    }

    #[test]
    fn bigint_round_trip() {
        let bits = vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1];
        let v = bits_to_biguint(&bits);
        assert_eq!(v, BigUint::from(0b101_1001_0111u32));
        assert_eq!(biguint_to_bits(&v, bits.len()), bits);
        assert_eq!(biguint_to_bits(&BigUint::default(), 3), vec![0, 0, 0]);
    }
}
