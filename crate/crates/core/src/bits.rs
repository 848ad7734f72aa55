use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A candidate solution `x ∈ {0,1}^N`, one byte per bit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        BitString(vec![1; n])
    }

    /// Builds from arbitrary bytes; any nonzero byte is a 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitString(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitString(bits.iter().map(|&b| b as u8).collect())
    }

    /// The `n` low bits of `value`, most significant bit first. Enumerating
    /// `0..2^n` therefore walks strings in lexicographic order.
    pub fn from_index(value: u64, n: usize) -> Self {
        BitString((0..n).map(|i| ((value >> (n - 1 - i)) & 1) as u8).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        BitString((0..n).map(|_| rng.random::<bool>() as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit as u8;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// `self` reindexed so that position `k` holds `self[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> BitString {
        BitString(perm.iter().map(|&p| self.0[p]).collect())
    }

    /// Inverse of [`permuted`](Self::permuted).
    pub fn unpermuted(&self, perm: &[usize]) -> BitString {
        let mut out = vec![0; self.0.len()];
        for (k, &p) in perm.iter().enumerate() {
            out[p] = self.0[k];
        }
        BitString(out)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::invalid(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_enumeration_is_lexicographic() {
        let all: Vec<BitString> = (0..8).map(|v| BitString::from_index(v, 3)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[6].to_string(), "110");
    }

    #[test]
    fn permutation_round_trip() {
        let x: BitString = "110010".parse().unwrap();
        let perm = [3, 0, 5, 1, 4, 2];
        assert_eq!(x.permuted(&perm).unpermuted(&perm), x);
        assert_eq!(x.permuted(&perm).get(0), x.get(3));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("01x".parse::<BitString>().is_err());
    }
}
