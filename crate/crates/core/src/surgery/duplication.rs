//! Description of a duplicated sequence `Y` (every pair `Y(2i) = Y(2i+1)`)
//! relative to a nearby `X`: `X` itself, then `Y(2i)` for every pair on which
//! `X` disagrees with itself, then the set of agreeing pairs where `Y` takes
//! the other value.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicationDescription {
    pub x_bits: BitSequence,
    /// `Y(2i)` for each pair with `X(2i) != X(2i+1)`, in order.
    pub mismatch_bits: Vec<bool>,
    /// Size of the subset, written in `header_width` bits.
    pub subset_size: usize,
    pub header_width: usize,
    /// Colex rank of the subset among the agreeing pairs, in
    /// `ceil(log2 C(m, k))` bits.
    pub subset_code: BitSequence,
    pub total_length_bits: usize,
}

/// `max(16, bit length of n/2)`.
pub fn header_width(n: usize) -> usize {
    let half = n / 2;
    let bits = (usize::BITS - half.leading_zeros()) as usize;
    bits.max(16)
}

fn binomial(m: usize, k: usize) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    let k = k.min(m - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c *= m - i;
        c /= i + 1;
    }
    c
}

/// Bits needed to write any rank below `C(m, k)`.
fn code_width(m: usize, k: usize) -> usize {
    let c = binomial(m, k);
    if c <= BigUint::one() {
        0
    } else {
        (c - 1u32).bits() as usize
    }
}

/// Colex rank `sum_i C(c_i, i)` of the sorted `k`-subset `set` of `[0, m)`,
/// walking positions downward with one running binomial.
fn colex_rank(set: &[usize], m: usize) -> BigUint {
    let k = set.len();
    if k == 0 || m == 0 {
        return BigUint::zero();
    }
    let mut rank = BigUint::zero();
    let mut left = k;
    // b = C(x, left)
    let mut b = binomial(m - 1, k);
    let mut idx = k;
    for x in (0..m).rev() {
        if left == 0 {
            break;
        }
        if idx > 0 && set[idx - 1] == x {
            rank += &b;
            idx -= 1;
            if x > 0 {
                b = b * left / x;
            }
            left -= 1;
        } else if x > 0 {
            b = b * (x - left.min(x)) / x;
        }
    }
    rank
}

fn colex_unrank(rank: &BigUint, m: usize, k: usize) -> Result<Vec<usize>> {
    if *rank >= binomial(m, k) {
        return Err(Error::Malformed(format!("subset rank exceeds C({m}, {k})")));
    }
    let mut rank = rank.clone();
    let mut out = Vec::with_capacity(k);
    let mut left = k;
    if k == 0 {
        return Ok(out);
    }
    let mut b = binomial(m - 1, k);
    for x in (0..m).rev() {
        if left == 0 {
            break;
        }
        if rank >= b {
            rank -= &b;
            out.push(x);
            if x > 0 {
                b = b * left / x;
            }
            left -= 1;
        } else if x > 0 {
            b = b * (x - left.min(x)) / x;
        }
    }
    if left != 0 || !rank.is_zero() {
        return Err(Error::Malformed("subset rank does not decode".into()));
    }
    out.reverse();
    Ok(out)
}

fn biguint_to_bits(v: &BigUint, width: usize) -> BitSequence {
    let mut out = BitSequence::zeros(width);
    for i in 0..width {
        out.set(i, v.bit((width - 1 - i) as u64));
    }
    out
}

fn bits_to_biguint(bits: &BitSequence) -> BigUint {
    let mut v = BigUint::zero();
    for i in 0..bits.len() {
        if bits.get(i) {
            v.set_bit((bits.len() - 1 - i) as u64, true);
        }
    }
    v
}

pub fn duplication_encode(x: &BitSequence, y: &BitSequence) -> Result<DuplicationDescription> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::LengthMismatch { left: n, right: y.len() });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("length {n} is odd")));
    }
    let mut mismatch_bits = Vec::new();
    let mut agreeing = 0usize;
    let mut subset = Vec::new();
    for i in 0..n / 2 {
        let (y0, y1) = (y.get(2 * i), y.get(2 * i + 1));
        if y0 != y1 {
            return Err(Error::InvalidArgument(format!("Y is not duplicated at pair {i}")));
        }
        let (x0, x1) = (x.get(2 * i), x.get(2 * i + 1));
        if x0 != x1 {
            mismatch_bits.push(y0);
        } else {
            if x0 != y0 {
                subset.push(agreeing);
            }
            agreeing += 1;
        }
    }
    let k = subset.len();
    let width = code_width(agreeing, k);
    let subset_code = biguint_to_bits(&colex_rank(&subset, agreeing), width);
    let header_width = header_width(n);
    let total_length_bits = n + mismatch_bits.len() + header_width + width;
    Ok(DuplicationDescription {
        x_bits: x.clone(),
        mismatch_bits,
        subset_size: k,
        header_width,
        subset_code,
        total_length_bits,
    })
}

pub fn duplication_decode(desc: &DuplicationDescription) -> Result<BitSequence> {
    let x = &desc.x_bits;
    let n = x.len();
    if !n.is_multiple_of(2) {
        return Err(Error::Malformed(format!("length {n} is odd")));
    }
    let agreeing = (0..n / 2).filter(|&i| x.get(2 * i) == x.get(2 * i + 1)).count();
    if n / 2 - agreeing != desc.mismatch_bits.len() {
        return Err(Error::Malformed(format!(
            "{} disagreeing pairs but {} stored bits",
            n / 2 - agreeing,
            desc.mismatch_bits.len()
        )));
    }
    if desc.subset_size > agreeing {
        return Err(Error::Malformed(format!("subset of {} among {agreeing} pairs", desc.subset_size)));
    }
    if desc.subset_code.len() != code_width(agreeing, desc.subset_size) {
        return Err(Error::Malformed("subset code has the wrong width".into()));
    }
    let subset = colex_unrank(&bits_to_biguint(&desc.subset_code), agreeing, desc.subset_size)?;
    let mut y = BitSequence::zeros(n);
    let (mut mi, mut ai, mut si) = (0, 0, 0);
    for i in 0..n / 2 {
        let (x0, x1) = (x.get(2 * i), x.get(2 * i + 1));
        let v = if x0 != x1 {
            mi += 1;
            desc.mismatch_bits[mi - 1]
        } else {
            let flip = subset.get(si) == Some(&ai);
            if flip {
                si += 1;
            }
            ai += 1;
            x0 ^ flip
        };
        y.set(2 * i, v);
        y.set(2 * i + 1, v);
    }
    Ok(y)
}

impl DuplicationDescription {
    /// `X`, stored bits, `k` header, subset rank, concatenated; numbers are
    /// written most significant bit first.
    pub fn to_bits(&self) -> BitSequence {
        let mut out = self.x_bits.clone();
        for &b in &self.mismatch_bits {
            out.push(b);
        }
        for i in (0..self.header_width).rev() {
            out.push((self.subset_size >> i) & 1 == 1);
        }
        out.extend_from(&self.subset_code);
        out
    }

    /// Parses [`to_bits`](Self::to_bits) output, given the sequence length `n`.
    pub fn from_bits(bits: &BitSequence, n: usize) -> Result<Self> {
        let need = |end: usize| -> Result<()> {
            if bits.len() < end {
                Err(Error::Malformed(format!("description ends at {} bits, need {end}", bits.len())))
            } else {
                Ok(())
            }
        };
        need(n)?;
        let x_bits = bits.slice(0..n);
        let unequal = (0..n / 2).filter(|&i| x_bits.get(2 * i) != x_bits.get(2 * i + 1)).count();
        let mut pos = n;
        need(pos + unequal)?;
        let mismatch_bits: Vec<bool> = (pos..pos + unequal).map(|i| bits.get(i)).collect();
        pos += unequal;
        let header_width = header_width(n);
        need(pos + header_width)?;
        let mut k = 0usize;
        for i in pos..pos + header_width {
            k = k.checked_mul(2).ok_or_else(|| Error::Malformed("subset size overflows".into()))? | bits.get(i) as usize;
        }
        pos += header_width;
        let agreeing = n / 2 - unequal;
        if k > agreeing {
            return Err(Error::Malformed(format!("subset of {k} among {agreeing} pairs")));
        }
        let width = code_width(agreeing, k);
        need(pos + width)?;
        if bits.len() != pos + width {
            return Err(Error::Malformed(format!("{} trailing bits", bits.len() - pos - width)));
        }
        let subset_code = bits.slice(pos..pos + width);
        Ok(Self {
            x_bits,
            mismatch_bits,
            subset_size: k,
            header_width,
            subset_code,
            total_length_bits: pos + width,
        })
    }
}
