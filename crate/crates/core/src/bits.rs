//! Bit-packed vectors over GF(2).
//!
//! Shared by finite sets, grid sets and lattice cochains. The text form is a
//! lowercase hex string of `ceil(len / 8)` bytes; bit `i` lives in byte `i / 8`
//! at position `i % 8` (LSB-first), and each byte is written high nibble first.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; len.div_ceil(WORD)],
        };
        v.clear_padding();
        v
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, n: len });
            }
            v.set(i, true);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Each bit set independently with probability `p`.
    pub fn random<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            if rng.random::<f64>() < p {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn not(&self) -> BitVector {
        let mut out = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_padding();
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// Index of the highest set bit.
    pub fn last_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * WORD + (WORD - 1 - w.leading_zeros() as usize))
    }

    /// `v'[i] = v[map[i]]`, i.e. composition of the indicator with `map`.
    pub fn compose(&self, map: &[usize]) -> BitVector {
        assert_eq!(map.len(), self.len);
        let mut out = BitVector::zeros(self.len);
        for (i, &j) in map.iter().enumerate() {
            if self.get(j) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let mut s = String::with_capacity(2 * nbytes);
        for b in 0..nbytes {
            let byte = (self.words[b / 8] >> ((b % 8) * 8)) as u8;
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        let hex = hex.trim();
        let nbytes = len.div_ceil(8);
        if hex.len() != 2 * nbytes {
            return Err(Error::Parse(format!(
                "hex string for {len} bits must have {} digits, got {}",
                2 * nbytes,
                hex.len()
            )));
        }
        let mut v = Self::zeros(len);
        for b in 0..nbytes {
            let byte = u8::from_str_radix(&hex[2 * b..2 * b + 2], 16)
                .map_err(|e| Error::Parse(format!("bad hex digit: {e}")))?;
            v.words[b / 8] |= (byte as u64) << ((b % 8) * 8);
        }
        let before = v.words.clone();
        v.clear_padding();
        if before != v.words {
            return Err(Error::Parse("hex string sets bits beyond the length".into()));
        }
        Ok(v)
    }

    fn clear_padding(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}]{{", self.len)?;
        for (k, i) in self.iter_ones().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
