//! Binary hypervectors and the integer accumulators built from them.
//!
//! A [`Hypervector`] is stored bit-packed, 64 elements per word, element `i`
//! at bit `i % 64` of word `i / 64`. Bits past `dim` in the last word are
//! always zero, so population counts over whole words are exact.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{check_dim, Error, Result};

pub(crate) const WORD_BITS: usize = 64;

pub(crate) fn words_for(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

fn tail_mask(dim: usize) -> u64 {
    match dim % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Deterministic 64-bit seeded generator (ChaCha8).
///
/// Independent streams of the same seed are used for the position and color
/// codebooks so that changing one encoder never perturbs the other.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    dim: usize,
    words: Vec<u64>,
}

impl Hypervector {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("hypervector dimension must be at least 1"));
        }
        Ok(Hypervector {
            dim,
            words: vec![0; words_for(dim)],
        })
    }

    /// Every element drawn independently with probability one half.
    pub fn random(dim: usize, rng: &mut Rng) -> Result<Self> {
        let mut hv = Self::zeros(dim)?;
        for w in hv.words.iter_mut() {
            *w = rng.next_u64();
        }
        hv.clear_tail();
        Ok(hv)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut hv = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                hv.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(hv)
    }

    pub(crate) fn from_words(dim: usize, mut words: Vec<u64>) -> Result<Self> {
        check_dim(words_for(dim), words.len())?;
        if dim == 0 {
            return Err(Error::config("hypervector dimension must be at least 1"));
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(dim);
        }
        Ok(Hypervector { dim, words })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.dim, "bit index {i} out of range for dim {}", self.dim);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.dim).map(move |i| self.get(i))
    }

    pub fn xor(&self, other: &Hypervector) -> Result<Hypervector> {
        check_dim(self.dim, other.dim)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Hypervector {
            dim: self.dim,
            words,
        })
    }

    /// Returns a copy with elements `[start, start + len)` inverted.
    pub fn flip_range(&self, start: usize, len: usize) -> Result<Hypervector> {
        let mut out = self.clone();
        out.flip_range_in_place(start, len)?;
        Ok(out)
    }

    pub(crate) fn flip_range_in_place(&mut self, start: usize, len: usize) -> Result<()> {
        let end = start.checked_add(len).ok_or(Error::OutOfRange {
            what: "flip range end",
            value: usize::MAX,
            limit: self.dim,
        })?;
        if end > self.dim {
            return Err(Error::OutOfRange {
                what: "flip range end",
                value: end,
                limit: self.dim,
            });
        }
        let mut i = start;
        while i < end {
            let word = i / WORD_BITS;
            let lo = i % WORD_BITS;
            let hi = (end - word * WORD_BITS).min(WORD_BITS);
            let width = hi - lo;
            let mask = if width == WORD_BITS {
                u64::MAX
            } else {
                ((1u64 << width) - 1) << lo
            };
            self.words[word] ^= mask;
            i += width;
        }
        Ok(())
    }

    pub fn hamming(&self, other: &Hypervector) -> Result<usize> {
        check_dim(self.dim, other.dim)?;
        Ok(xor_popcount(&self.words, &other.words))
    }

    /// Joins `parts` end to end, preserving argument order.
    pub fn concat(parts: &[Hypervector]) -> Result<Hypervector> {
        if parts.is_empty() {
            return Err(Error::Invalid("cannot concatenate zero hypervectors".into()));
        }
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut out = Self::zeros(dim)?;
        let mut offset = 0;
        for part in parts {
            xor_words_at(&mut out.words, offset, &part.words);
            offset += part.dim;
        }
        Ok(out)
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.dim);
        }
    }
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim <= 64 {
            write!(f, "Hypervector({self})")
        } else {
            write!(
                f,
                "Hypervector {{ dim: {}, ones: {} }}",
                self.dim,
                self.count_ones()
            )
        }
    }
}

impl fmt::Display for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses a string of `0`/`1` characters, element 0 first.
impl FromStr for Hypervector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Invalid(format!(
                    "invalid hypervector element {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Hypervector::from_bits(&bits)
    }
}

/// Non-negative integer vector, typically a sum of hypervectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntVector {
    values: Vec<u32>,
}

impl IntVector {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("vector dimension must be at least 1"));
        }
        Ok(IntVector {
            values: vec![0; dim],
        })
    }

    pub fn from_values(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("vector dimension must be at least 1"));
        }
        Ok(IntVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Adds the bits of `h` element-wise.
    pub fn accumulate(&mut self, h: &Hypervector) -> Result<()> {
        check_dim(self.dim(), h.dim())?;
        accumulate_words(&mut self.values, h.words());
        Ok(())
    }

    pub(crate) fn values_mut(&mut self) -> &mut [u32] {
        &mut self.values
    }
}

impl From<&Hypervector> for IntVector {
    fn from(h: &Hypervector) -> Self {
        IntVector {
            values: h.bits().map(u32::from).collect(),
        }
    }
}

/// Anything with non-negative integer coordinates that cosine distance can
/// be taken over.
pub trait Coordinates {
    fn dim(&self) -> usize;
    fn coordinates(&self) -> Cow<'_, [u32]>;
}

impl Coordinates for Hypervector {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coordinates(&self) -> Cow<'_, [u32]> {
        Cow::Owned(self.bits().map(u32::from).collect())
    }
}

impl Coordinates for IntVector {
    fn dim(&self) -> usize {
        self.values.len()
    }

    fn coordinates(&self) -> Cow<'_, [u32]> {
        Cow::Borrowed(&self.values)
    }
}

/// `1 - y·z / (|y| |z|)`, with the distance defined as exactly 1 when either
/// side is the zero vector.
pub fn cosine_distance<Y, Z>(y: &Y, z: &Z) -> Result<f64>
where
    Y: Coordinates + ?Sized,
    Z: Coordinates + ?Sized,
{
    check_dim(y.dim(), z.dim())?;
    let (y, z) = (y.coordinates(), z.coordinates());
    let mut dot = 0u128;
    let mut yy = 0u128;
    let mut zz = 0u128;
    for (&a, &b) in y.iter().zip(z.iter()) {
        let (a, b) = (a as u128, b as u128);
        dot += a * b;
        yy += a * a;
        zz += b * b;
    }
    if yy == 0 || zz == 0 {
        return Ok(1.0);
    }
    let sim = dot as f64 / ((yy as f64).sqrt() * (zz as f64).sqrt());
    Ok((1.0 - sim).clamp(0.0, 1.0))
}

/// XORs the packed bits `src` into `dst` starting at bit `offset`.
pub(crate) fn xor_words_at(dst: &mut [u64], offset: usize, src: &[u64]) {
    let shift = offset % WORD_BITS;
    let base = offset / WORD_BITS;
    for (k, &w) in src.iter().enumerate() {
        dst[base + k] ^= w << shift;
        if shift != 0 {
            if let Some(next) = dst.get_mut(base + k + 1) {
                *next ^= w >> (WORD_BITS - shift);
            }
        }
    }
}

pub(crate) fn xor_popcount(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

pub(crate) fn accumulate_words(acc: &mut [u32], words: &[u64]) {
    for (chunk, &w) in acc.chunks_mut(WORD_BITS).zip(words) {
        let mut bits = w;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            chunk[t] += 1;
            bits &= bits - 1;
        }
    }
}

/// Dot product of a packed binary vector with integer coordinates.
pub(crate) fn dot_words(words: &[u64], values: &[u32]) -> u64 {
    let mut dot = 0u64;
    for (chunk, &w) in values.chunks(WORD_BITS).zip(words) {
        let mut bits = w;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            dot += chunk[t] as u64;
            bits &= bits - 1;
        }
    }
    dot
}
