//! Packed finite bit strings.
//!
//! Position 0 is the first (leftmost) bit of the sequence. Internally bit `i`
//! lives in word `i / 64` at bit `i % 64` (LSB first); the on-disk format is
//! MSB-first within each byte.

use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    len: usize,
    words: Vec<u64>,
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitSequence({})", self.to_bit_string())
        } else {
            write!(f, "BitSequence(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl BitSequence {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        s.clear_tail();
        s
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::zeros(0);
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parses a string of `0`/`1` characters; other characters are rejected.
    pub fn from_bit_str(text: &str) -> Result<Self> {
        let mut s = Self::zeros(0);
        for c in text.chars() {
            match c {
                '0' => s.push(false),
                '1' => s.push(true),
                _ => return Err(Error::Parse(format!("unexpected character {c:?} in bit string"))),
            }
        }
        Ok(s)
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    /// Fair-coin bits.
    pub fn coin<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self {
            len,
            words: (0..words_for(len)).map(|_| rng.gen()).collect(),
        };
        s.clear_tail();
        s
    }

    /// Independent bits that are 1 with probability `p`.
    pub fn bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len {
            if rng.gen::<f64>() < p {
                s.set(i, true);
            }
        }
        s
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
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let m = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn extend_from(&mut self, other: &BitSequence) {
        self.extend_range(other, 0..other.len);
    }

    /// Appends `other[range]`.
    pub fn extend_range(&mut self, other: &BitSequence, range: Range<usize>) {
        assert!(range.end <= other.len);
        let mut pos = range.start;
        while pos < range.end {
            let take = (range.end - pos).min(64);
            let chunk = other.read_bits(pos, take);
            self.append_bits(chunk, take);
            pos += take;
        }
    }

    /// Appends the low `count` bits of `value` (bit 0 first).
    pub fn append_bits(&mut self, value: u64, count: usize) {
        debug_assert!(count <= 64);
        if count == 0 {
            return;
        }
        let value = value & low_mask(count);
        let offset = self.len % 64;
        if offset == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << offset;
            if offset + count > 64 {
                self.words.push(value >> (64 - offset));
            }
        }
        self.len += count;
    }

    /// Reads `count <= 64` bits starting at `start`, bit `start` landing in bit 0.
    #[inline]
    pub fn read_bits(&self, start: usize, count: usize) -> u64 {
        debug_assert!(count <= 64 && start + count <= self.len);
        if count == 0 {
            return 0;
        }
        let w = start / 64;
        let off = start % 64;
        let mut v = self.words[w] >> off;
        if off != 0 && off + count > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & low_mask(count)
    }

    pub fn slice(&self, range: Range<usize>) -> BitSequence {
        let mut out = BitSequence::zeros(0);
        out.words.reserve(words_for(range.len()));
        out.extend_range(self, range);
        out
    }

    /// Overwrites `self[start..start + src.len()]` with `src`.
    pub fn write_range(&mut self, start: usize, src: &BitSequence) {
        assert!(start + src.len <= self.len);
        for i in 0..src.len {
            self.set(start + i, src.get(i));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_ones_in(&self, range: Range<usize>) -> usize {
        let mut pos = range.start;
        let mut total = 0;
        while pos < range.end {
            let take = (range.end - pos).min(64);
            total += self.read_bits(pos, take).count_ones() as usize;
            pos += take;
        }
        total
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming(&self, other: &BitSequence) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Mismatch count restricted to `range`; both sequences must cover it.
    pub fn hamming_in(&self, other: &BitSequence, range: Range<usize>) -> usize {
        let mut pos = range.start;
        let mut total = 0;
        while pos < range.end {
            let take = (range.end - pos).min(64);
            total += (self.read_bits(pos, take) ^ other.read_bits(pos, take)).count_ones() as usize;
            pos += take;
        }
        total
    }

    pub fn complement(&self) -> BitSequence {
        let mut s = Self {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.clear_tail();
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bytes with the first sequence bit in the most significant position.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes_msb(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::TooShort {
                needed: len,
                got: bytes.len() * 8,
            });
        }
        let mut s = Self::zeros(len);
        for i in 0..len {
            if bytes[i / 8] & (0x80 >> (i % 8)) != 0 {
                s.set(i, true);
            }
        }
        Ok(s)
    }

    /// Path of the one-line `len=<bits>` sidecar for a sequence file.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut os = path.as_os_str().to_owned();
        os.push(".hdr");
        PathBuf::from(os)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes_msb())?;
        fs::write(Self::sidecar_path(path), format!("len={}\n", self.len))?;
        Ok(())
    }

    /// Reads a sequence file; without a sidecar the length is `8 * bytes`.
    pub fn read_file(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let side = Self::sidecar_path(path);
        let len = if side.exists() {
            parse_sidecar(&fs::read_to_string(side)?)?
        } else {
            bytes.len() * 8
        };
        Self::from_bytes_msb(&bytes, len)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(rem);
            }
        }
    }
}

pub fn parse_sidecar(text: &str) -> Result<usize> {
    let line = text.lines().next().unwrap_or("").trim();
    line.strip_prefix("len=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad sidecar header {line:?}, expected len=<bits>")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn push_get_and_slices() {
        let s = BitSequence::from_bit_str("1011001110001").unwrap();
        assert_eq!(s.len(), 13);
        assert_eq!(s.count_ones(), 7);
        assert_eq!(s.slice(2..7).to_bit_string(), "11001");
        assert_eq!(s.complement().to_bit_string(), "0100110001110");
    }

    #[test]
    fn unaligned_ranges_match_per_bit_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = BitSequence::coin(1000, &mut rng);
        let b = BitSequence::coin(1000, &mut rng);
        for (lo, hi) in [(0, 1000), (3, 200), (63, 65), (64, 128), (100, 999), (500, 500)] {
            let naive = (lo..hi).filter(|&i| a.get(i) != b.get(i)).count();
            assert_eq!(a.hamming_in(&b, lo..hi), naive);
            let ones = (lo..hi).filter(|&i| a.get(i)).count();
            assert_eq!(a.count_ones_in(lo..hi), ones);
            let sl = a.slice(lo..hi);
            assert!((lo..hi).all(|i| sl.get(i - lo) == a.get(i)));
        }
    }

    #[test]
    fn msb_first_bytes() {
        let s = BitSequence::from_bit_str("100000001").unwrap();
        assert_eq!(s.to_bytes_msb(), vec![0x80, 0x80]);
        let back = BitSequence::from_bytes_msb(&[0x80, 0x80], 9).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn file_round_trip_with_sidecar() {
        let dir = std::env::temp_dir().join(format!("bits-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.bits");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = BitSequence::coin(77, &mut rng);
        s.write_file(&path).unwrap();
        assert_eq!(fs::read_to_string(BitSequence::sidecar_path(&path)).unwrap(), "len=77\n");
        assert_eq!(BitSequence::read_file(&path).unwrap(), s);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = BitSequence::zeros(3);
        let b = BitSequence::zeros(4);
        assert!(matches!(a.hamming(&b), Err(Error::LengthMismatch { .. })));
    }
}
