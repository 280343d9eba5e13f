//! Hamming space `{0,1}^n` for `n <= 64`.
//!
//! A word is stored in a `u64`; sequence position `i` (0 = leftmost) is bit
//! `n - 1 - i`, so the integer's binary expansion reads the word left to
//! right. Set-level algorithms work directly on these integers.

use std::fmt;

use crate::bits::BitSequence;
use crate::error::{Error, Result};

pub mod cover;
pub mod harper;
pub mod sphere;
pub mod volume;

pub use cover::{
    best_subcode, delsarte_piret_bound, farthest_point_code, greedy_cover, random_cover, Codebook,
    NearestTable, SubcodeReport,
};
pub use harper::{
    brute_force_set_distance, harper_far_count, set_distance_bits, verify_harper, HarperInstance,
    HarperReport,
};
pub use sphere::{opposite_sphere_distance, opposite_sphere_distance_bits, sphere_for_size, Center, LayerOrder, SphereDescriptor};
pub use volume::{ball_volume, check_volume_entropy_bounds, log2_biguint};

/// Largest `n` for which whole-space tables (one entry per word) are built.
pub const TABLE_GUARD_BITS: usize = 22;

/// Pair budget of the quadratic brute-force set distance.
pub const BRUTE_FORCE_PAIRS: u128 = 1 << 30;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    n: usize,
    bits: u64,
}

#[inline]
pub(crate) fn word_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl BitWord {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidArgument(format!("word length {n} exceeds 64")));
        }
        if bits & !word_mask(n) != 0 {
            return Err(Error::InvalidArgument(format!("value {bits:#x} has bits beyond length {n}")));
        }
        Ok(Self { n, bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, bits: 0 }
    }

    pub fn ones(n: usize) -> Self {
        Self { n, bits: word_mask(n) }
    }

    pub fn from_bit_str(text: &str) -> Result<Self> {
        let seq = BitSequence::from_bit_str(text)?;
        Self::from_seq(&seq, 0, seq.len())
    }

    /// Reads `seq[start..start + n]`.
    pub fn from_seq(seq: &BitSequence, start: usize, n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidArgument(format!("word length {n} exceeds 64")));
        }
        if start + n > seq.len() {
            return Err(Error::TooShort {
                needed: start + n,
                got: seq.len(),
            });
        }
        Ok(Self {
            n,
            bits: seq_to_word(seq, start, n),
        })
    }

    pub fn write_to(&self, seq: &mut BitSequence, start: usize) {
        write_word(seq, start, self.n, self.bits);
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Bit at sequence position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n);
        (self.bits >> (self.n - 1 - i)) & 1 == 1
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn distance(&self, other: &BitWord) -> Result<usize> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok((self.bits ^ other.bits).count_ones() as usize)
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            bits: !self.bits & word_mask(self.n),
        }
    }

    /// Hex, most significant digit first, padded to `ceil(n/4)` digits.
    pub fn to_hex(&self) -> String {
        format!("{:0width$x}", self.bits, width = self.n.div_ceil(4).max(1))
    }

    pub fn from_hex(n: usize, text: &str) -> Result<Self> {
        let bits = u64::from_str_radix(text.trim(), 16)
            .map_err(|e| Error::Parse(format!("bad hex word {text:?}: {e}")))?;
        Self::new(n, bits)
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord(")?;
        for i in 0..self.n {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, ")")
    }
}

/// Word value of `seq[start..start + n]`, first position most significant.
#[inline]
pub(crate) fn seq_to_word(seq: &BitSequence, start: usize, n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    seq.read_bits(start, n).reverse_bits() >> (64 - n)
}

#[inline]
pub(crate) fn write_word(seq: &mut BitSequence, start: usize, n: usize, word: u64) {
    for i in 0..n {
        seq.set(start + i, (word >> (n - 1 - i)) & 1 == 1);
    }
}

pub(crate) fn check_table_size(n: usize) -> Result<()> {
    if n > TABLE_GUARD_BITS {
        return Err(Error::SizeGuard {
            what: "word length for whole-space tables",
            got: n as u128,
            limit: TABLE_GUARD_BITS as u128,
        });
    }
    Ok(())
}

/// All masks of weight `<= r` among `n` bits, ordered by weight.
pub(crate) fn ball_masks(n: usize, r: usize) -> Vec<u64> {
    let r = r.min(n);
    let mut out = vec![0u64];
    let mut layer = vec![0u64];
    for _ in 0..r {
        let mut next = Vec::new();
        for &m in &layer {
            // extend by bits above the highest set bit to enumerate each set once
            let start = if m == 0 { 0 } else { 64 - m.leading_zeros() as usize };
            for b in start..n {
                next.push(m | (1u64 << b));
            }
        }
        out.extend_from_slice(&next);
        layer = next;
    }
    out
}

pub(crate) const UNREACHED: u8 = u8::MAX;

/// Multi-source BFS distances over `{0,1}^n`, stopping after `max_radius`
/// layers; unreached words keep [`UNREACHED`].
pub(crate) fn bfs_distances(n: usize, sources: &[u64], max_radius: usize) -> Vec<u8> {
    let size = 1usize << n;
    let mut dist = vec![UNREACHED; size];
    let mut frontier: Vec<u32> = Vec::new();
    for &s in sources {
        if dist[s as usize] != 0 {
            dist[s as usize] = 0;
            frontier.push(s as u32);
        }
    }
    let mut d = 0usize;
    while !frontier.is_empty() && d < max_radius.min(n) {
        let mut next = Vec::new();
        for &u in &frontier {
            for b in 0..n {
                let v = (u ^ (1 << b)) as usize;
                if dist[v] == UNREACHED {
                    dist[v] = (d + 1) as u8;
                    next.push(v as u32);
                }
            }
        }
        frontier = next;
        d += 1;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_read_left_to_right() {
        let w = BitWord::from_bit_str("1100").unwrap();
        assert_eq!(w.bits(), 0b1100);
        assert!(w.get(0) && w.get(1) && !w.get(2));
        assert_eq!(w.to_hex(), "c");
        assert_eq!(BitWord::from_bit_str("00001").unwrap().to_hex(), "01");
        assert_eq!(BitWord::from_hex(5, "01").unwrap(), BitWord::from_bit_str("00001").unwrap());
        assert_eq!(w.complement(), BitWord::from_bit_str("0011").unwrap());
        assert!(BitWord::new(3, 8).is_err());
    }

    #[test]
    fn word_round_trip_through_sequence() {
        let mut s = BitSequence::from_bit_str("0110100111").unwrap();
        let w = BitWord::from_seq(&s, 2, 6).unwrap();
        assert_eq!(format!("{w:?}"), "BitWord(101001)");
        w.complement().write_to(&mut s, 2);
        assert_eq!(s.to_bit_string(), "0101011011");
    }

    #[test]
    fn ball_masks_are_distinct_and_counted() {
        for n in 0..10 {
            for r in 0..=n {
                let m = ball_masks(n, r);
                let mut sorted = m.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), m.len());
                let expect = (0u64..1 << n).filter(|x| x.count_ones() as usize <= r).count();
                assert_eq!(m.len(), expect);
            }
        }
    }

    #[test]
    fn bfs_matches_direct_distance() {
        let n = 8;
        let sources = [3u64, 77, 200];
        let d = bfs_distances(n, &sources, n);
        for w in 0u64..256 {
            let direct = sources.iter().map(|s| (s ^ w).count_ones()).min().unwrap();
            assert_eq!(d[w as usize] as u32, direct);
        }
        let limited = bfs_distances(n, &sources, 1);
        assert!(limited.iter().all(|&x| x <= 1 || x == UNREACHED));
    }
}
