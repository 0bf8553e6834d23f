//! Finite 0/1 sequences: Hamming-cube vertices and binary-tree nodes.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{argument, Error, Result};

/// A finite sequence of bits. The empty sequence is the tree root.
///
/// Ordering is shortlex: shorter strings first, then lexicographic. On
/// strings of one common length this is plain lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    /// Builds a string from 0/1 values; any other value is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(argument(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self {
            bits: bits.to_vec(),
        })
    }

    pub(crate) fn from_vec_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self { bits }
    }

    /// The `len`-bit big-endian binary expansion of `value`.
    pub fn from_value(value: u64, len: usize) -> Self {
        let bits = (0..len)
            .map(|i| {
                let shift = len - 1 - i;
                if shift >= 64 {
                    0
                } else {
                    ((value >> shift) & 1) as u8
                }
            })
            .collect();
        Self { bits }
    }

    pub fn constant(bit: u8, len: usize) -> Self {
        Self {
            bits: vec![bit.min(1); len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    /// Big-endian value; only meaningful for strings of at most 64 bits.
    pub fn value(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Initial segment of length `i` (`s|_i`).
    pub fn prefix(&self, i: usize) -> Result<Self> {
        if i > self.len() {
            return Err(argument(format!(
                "prefix length {i} exceeds string length {}",
                self.len()
            )));
        }
        Ok(Self {
            bits: self.bits[..i].to_vec(),
        })
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            bits: self.bits[start..end].to_vec(),
        }
    }

    pub fn concat(&self, other: &BitString) -> Self {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    pub fn push(&self, bit: u8) -> Self {
        let mut bits = self.bits.clone();
        bits.push(bit.min(1));
        Self { bits }
    }

    /// The maximal proper initial segment `s^-`; `None` for the empty string.
    pub fn parent(&self) -> Option<Self> {
        if self.is_empty() {
            None
        } else {
            Some(Self {
                bits: self.bits[..self.len() - 1].to_vec(),
            })
        }
    }

    /// `self ≺ other`: a proper initial segment.
    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && other.bits.starts_with(&self.bits)
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn common_prefix_len(&self, other: &BitString) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[i] ^= 1;
        Self { bits }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Number of differing coordinates; errors on unequal lengths.
    pub fn hamming(&self, other: &BitString) -> Result<usize> {
        if self.len() != other.len() {
            return Err(argument(format!(
                "Hamming distance needs equal lengths, got {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Repeats every symbol `factor` times.
    pub fn repeat_each(&self, factor: usize) -> Self {
        let bits = self
            .bits
            .iter()
            .flat_map(|&b| std::iter::repeat(b).take(factor))
            .collect();
        Self { bits }
    }

    /// `(k_1,…,k_m) ↦ (k_1,k_1,…,k_m,k_m)`.
    pub fn doubling(&self) -> Self {
        self.repeat_each(2)
    }

    /// `(a_1,…,a_m) ↦ (a_1,a_1,a_1,a_1,…,a_m,a_m,a_m,a_m)`.
    pub fn quadrupling(&self) -> Self {
        self.repeat_each(4)
    }
}

/// Shortlex comparison.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("∅")
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(argument(format!("invalid bit character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self { bits })
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn doubling_examples() {
        assert_eq!(bs("01").doubling(), bs("0011"));
        assert_eq!(bs("1").doubling(), bs("11"));
        assert_eq!(BitString::empty().doubling(), BitString::empty());
    }

    #[test]
    fn quadrupling_examples() {
        assert_eq!(bs("1").quadrupling(), bs("1111"));
        assert_eq!(bs("01").quadrupling(), bs("00001111"));
        assert_eq!(BitString::empty().quadrupling(), BitString::empty());
    }

    #[test]
    fn prefix_parent_and_order() {
        let s = bs("0110");
        assert_eq!(s.prefix(2).unwrap(), bs("01"));
        assert!(s.prefix(5).is_err());
        assert_eq!(s.parent(), Some(bs("011")));
        assert_eq!(BitString::empty().parent(), None);
        assert!(bs("01").is_proper_prefix_of(&s));
        assert!(!s.is_proper_prefix_of(&s));
        assert!(bs("11") < bs("000"));
        assert!(bs("01") < bs("10"));
        assert_eq!(bs("0110").value(), 6);
        assert_eq!(BitString::from_value(6, 4), bs("0110"));
    }

    #[test]
    fn hamming_requires_equal_lengths() {
        assert_eq!(bs("0011").hamming(&bs("0110")).unwrap(), 2);
        assert!(bs("0").hamming(&bs("00")).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!("012".parse::<BitString>().is_err());
        assert!(BitString::from_bits(&[0, 2]).is_err());
    }

    #[test]
    fn serde_as_string() {
        let json = serde_json::to_string(&bs("101")).unwrap();
        assert_eq!(json, "\"101\"");
        let back: BitString = serde_json::from_str("\"\"").unwrap();
        assert!(back.is_empty());
    }
}
