//! Fixed-length bit strings, most-significant level first.
//!
//! `x_1` is the leftmost character of the textual form and the highest bit of
//! the packed integer, so `"10"` has `bit(1) == 1` and `bit(2) == 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest supported string. Keeps `2^len` representable as a leaf count.
pub const MAX_BITS: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit string length {0} outside 1..={MAX_BITS}")]
    BadLength(usize),
    #[error("invalid character {0:?} in bit string (expected '0' or '1')")]
    BadChar(char),
    #[error("value {value} does not fit in {len} bits")]
    Overflow { value: u64, len: u32 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: u64,
    len: u32,
}

impl BitString {
    pub fn new(value: u64, len: u32) -> Result<Self, BitsError> {
        if len == 0 || len > MAX_BITS {
            return Err(BitsError::BadLength(len as usize));
        }
        if value >> len != 0 {
            return Err(BitsError::Overflow { value, len });
        }
        Ok(Self { value, len })
    }

    pub fn zeros(len: u32) -> Result<Self, BitsError> {
        Self::new(0, len)
    }

    pub fn ones(len: u32) -> Result<Self, BitsError> {
        Self::new(mask(len), len)
    }

    /// Builds a string from per-level bits, `bits[0]` being level 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self, BitsError> {
        let len = bits.len();
        if len == 0 || len > MAX_BITS as usize {
            return Err(BitsError::BadLength(len));
        }
        let mut value = 0u64;
        for &b in bits {
            value = (value << 1) | u64::from(b & 1);
        }
        Ok(Self { value, len: len as u32 })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at level `k`, 1-based. Panics if `k` is out of range.
    pub fn bit(&self, k: u32) -> u8 {
        assert!(k >= 1 && k <= self.len, "level {k} outside 1..={}", self.len);
        ((self.value >> (self.len - k)) & 1) as u8
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.len).map(move |k| self.bit(k))
    }

    pub fn xor(&self, other: &Self) -> Result<Self, BitsError> {
        self.check_len(other)?;
        Ok(Self { value: self.value ^ other.value, len: self.len })
    }

    /// Bitwise complement within the string's length.
    pub fn complement(&self) -> Self {
        Self { value: !self.value & mask(self.len), len: self.len }
    }

    pub fn count_ones(&self) -> u32 {
        self.value.count_ones()
    }

    /// Every string of length `len`, in increasing numeric order.
    pub fn all(len: u32) -> Result<impl Iterator<Item = BitString>, BitsError> {
        let first = Self::zeros(len)?;
        Ok((0..=mask(len)).map(move |value| BitString { value, len: first.len }))
    }

    fn check_len(&self, other: &Self) -> Result<(), BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch { left: self.len, right: other.len });
        }
        Ok(())
    }
}

pub(crate) fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(BitsError::BadChar(other)),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Self::from_bits(&bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-level parities `p_k = x_k ^ y_k`. A set bit means the pair disagrees
/// at that level and the photon takes the odd path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParityString(BitString);

impl ParityString {
    pub fn of(x: &BitString, y: &BitString) -> Result<Self, BitsError> {
        Ok(Self(x.xor(y)?))
    }

    pub fn from_bits(bits: BitString) -> Self {
        Self(bits)
    }

    pub fn as_bits(&self) -> &BitString {
        &self.0
    }

    pub fn levels(&self) -> u32 {
        self.0.len()
    }

    pub fn is_odd(&self, k: u32) -> bool {
        self.0.bit(k) == 1
    }
}

impl fmt::Display for ParityString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
