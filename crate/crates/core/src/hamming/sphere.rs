//! Opposite-centre spheres: a full Hamming ball plus an initial segment of the
//! next layer.
//!
//! The partial layer is filled in lexicographic order of support sets (sets
//! containing position 0 first). Lex-initial families of two layers are the
//! extremal cross-intersecting pairs, so this order makes the two spheres as
//! far apart as any boundary-layer choice can.

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::volume::ball_volume;
use super::{check_table_size, word_mask, BRUTE_FORCE_PAIRS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Center {
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerOrder {
    /// Lexicographic order of support sets, position 0 most significant.
    Lex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereDescriptor {
    pub n: usize,
    pub center: Center,
    pub inner_radius: usize,
    pub partial_layer: BigUint,
    pub layer_order: LayerOrder,
}

impl SphereDescriptor {
    pub fn size(&self) -> BigUint {
        ball_volume(self.n, self.inner_radius).expect("radius within length") + &self.partial_layer
    }

    /// Members as word values (position `i` is bit `n-1-i`).
    pub fn members(&self) -> Result<Vec<u64>> {
        check_table_size(self.n)?;
        let n = self.n;
        let mut out: Vec<u64> = (0u64..1 << n)
            .filter(|w| w.count_ones() as usize <= self.inner_radius)
            .collect();
        let p = self.partial_layer.to_usize().unwrap_or(usize::MAX);
        out.extend(lex_layer(n, self.inner_radius + 1).take(p));
        if self.center == Center::One {
            for w in &mut out {
                *w = !*w & word_mask(n);
            }
        }
        Ok(out)
    }
}

/// Weight-`k` words in lex order of their support sets.
fn lex_layer(n: usize, k: usize) -> impl Iterator<Item = u64> {
    (0..n)
        .combinations(k)
        .map(move |set| set.iter().fold(0u64, |acc, &i| acc | 1u64 << (n - 1 - i)))
}

/// Sphere of exactly `size` words around `0^n` or `1^n`.
pub fn sphere_for_size(n: usize, size: &BigUint, center: Center) -> Result<SphereDescriptor> {
    let whole = BigUint::from(1u8) << n;
    if size.is_zero() || *size > whole {
        return Err(Error::InvalidArgument(format!("sphere size {size} outside [1, 2^{n}]")));
    }
    let mut k = 0;
    let mut vol = BigUint::from(1u8);
    let mut layer = BigUint::from(1u8);
    while k < n {
        layer = layer * (n - k) / (k + 1);
        let next = &vol + &layer;
        if next > *size {
            break;
        }
        vol = next;
        k += 1;
    }
    Ok(SphereDescriptor {
        n,
        center,
        inner_radius: k,
        partial_layer: size - vol,
        layer_order: LayerOrder::Lex,
    })
}

fn binom_table(n: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0 };
        }
    }
    t
}

/// Lex rank among `k`-subsets of `[n]` of the sorted set `set`.
fn lex_rank(set: &[usize], n: usize, binom: &[Vec<u128>]) -> u128 {
    let k = set.len();
    let mut rank = 0u128;
    let mut prev: isize = -1;
    for (i, &s) in set.iter().enumerate() {
        for x in (prev + 1) as usize..s {
            rank += binom[n - 1 - x][k - 1 - i];
        }
        prev = s as isize;
    }
    rank
}

/// Whether some `S` among the first `pa` lex `alpha`-sets is disjoint from
/// some `T` among the first `pb` lex `beta`-sets.
///
/// For a fixed `T` the lex-least `alpha`-set avoiding `T` is the first
/// `alpha` elements of its complement, and an initial segment contains a
/// set avoiding `T` exactly when it contains that one.
fn lex_segments_have_disjoint_pair(n: usize, alpha: usize, pa: u128, beta: usize, pb: u128) -> Result<bool> {
    if pa == 0 || pb == 0 || alpha + beta > n {
        return Ok(false);
    }
    let binom = binom_table(n);
    // both segments inside the star of position 0
    if pa <= binom[n - 1][alpha - 1] && pb <= binom[n - 1][beta - 1] {
        return Ok(false);
    }
    let (alpha, pa, beta, pb) = if pb <= pa { (alpha, pa, beta, pb) } else { (beta, pb, alpha, pa) };
    if pb > BRUTE_FORCE_PAIRS {
        return Err(Error::SizeGuard {
            what: "boundary-layer search",
            got: pb,
            limit: BRUTE_FORCE_PAIRS,
        });
    }
    let mut comp = Vec::with_capacity(n);
    for t in (0..n).combinations(beta).take(pb as usize) {
        comp.clear();
        let mut it = t.iter().peekable();
        for x in 0..n {
            if it.peek() == Some(&&x) {
                it.next();
            } else {
                comp.push(x);
                if comp.len() == alpha {
                    break;
                }
            }
        }
        if lex_rank(&comp, n, &binom) < pa {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Minimum Hamming distance, in bits, between the canonical sphere of
/// `size_a` words around `0^n` and that of `size_b` words around `1^n`.
pub fn opposite_sphere_distance_bits(n: usize, size_a: &BigUint, size_b: &BigUint) -> Result<usize> {
    let sa = sphere_for_size(n, size_a, Center::Zero)?;
    let sb = sphere_for_size(n, size_b, Center::One)?;
    let (a, b) = (sa.inner_radius, sb.inner_radius);
    let pa = sa.partial_layer.to_u128().unwrap_or(u128::MAX);
    let pb = sb.partial_layer.to_u128().unwrap_or(u128::MAX);
    // d(S, complement(T)) = n - |S| - |T| + 2|S & T| for supports S, T
    let gap = |x: usize| n.saturating_sub(x);
    let mut best = gap(a + b);
    if pa > 0 {
        best = best.min(gap(a + 1 + b));
    }
    if pb > 0 {
        best = best.min(gap(a + b + 1));
    }
    if pa > 0 && pb > 0 && a + b + 2 <= n && lex_segments_have_disjoint_pair(n, a + 1, pa, b + 1, pb)? {
        best = best.min(n - a - b - 2);
    }
    Ok(best)
}

/// [`opposite_sphere_distance_bits`] normalized by `n`.
pub fn opposite_sphere_distance(n: usize, size_a: &BigUint, size_b: &BigUint) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    Ok(opposite_sphere_distance_bits(n, size_a, size_b)? as f64 / n as f64)
}
