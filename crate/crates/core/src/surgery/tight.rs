use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lower::{balanced_blocks, MAX_BLOCK_BITS};
use crate::bits::BitSequence;
use crate::entropy::h_inv;
use crate::error::{check_unit, Error, Result};
use crate::hamming::cover::{best_subcode, greedy_cover, NearestTable};
use crate::hamming::{ball_volume, bfs_distances, log2_biguint, write_word, UNREACHED};
use crate::proxy::{chunk_boundary, chunk_range};

/// Per-length codes used by [`build_tight_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct TightBlockCode {
    pub m: usize,
    pub radius: usize,
    pub cover_size: usize,
    /// Subcode `D`.
    pub words: Vec<u64>,
    /// `|S(D)|`, the words within `radius` of `D`.
    pub covered: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightPairReport {
    pub s: f64,
    pub t: f64,
    /// `H^-1(t - s)`
    pub target_distance: f64,
    pub distance: f64,
    /// `sum log2 |D| / len`
    pub dim_x: f64,
    /// `sum log2 |S(D)| / len`
    pub dim_y: f64,
    pub blocks: usize,
    pub codes: Vec<TightBlockCode>,
}

struct Prepared {
    code: TightBlockCode,
    near: NearestTable,
    members: Vec<u64>,
}

/// Smallest `r <= m/2` with `log2 V(m, r) >= bits`.
fn radius_for(m: usize, bits: f64) -> usize {
    (0..=m / 2)
        .find(|&r| log2_biguint(&ball_volume(m, r).expect("r <= m")) >= bits - 1e-12)
        .unwrap_or(m / 2)
}

fn prepare(m: usize, s: f64, t: f64) -> Result<Prepared> {
    let radius = radius_for(m, (t - s) * m as f64);
    let cover = greedy_cover(m, radius)?;
    let want = ((s * m as f64 - 1e-9).ceil().max(0.0)).exp2() as usize;
    let sub = best_subcode(&cover, want.clamp(1, cover.len()))?;
    let words = sub.code.words;
    let dist = bfs_distances(m, &words, radius);
    let members: Vec<u64> = (0..1u64 << m).filter(|&w| dist[w as usize] != UNREACHED).collect();
    Ok(Prepared {
        near: NearestTable::build(m, &words)?,
        code: TightBlockCode {
            m,
            radius,
            cover_size: cover.len(),
            covered: members.len() as u64,
            words,
        },
        members,
    })
}

/// Pair `(X, Y)` over `chunks` chunks: every block of `Y` is uniform in the
/// radius-`r` neighbourhood `S(D)` of a subcode `D` of about `2^(s m)`
/// words, and the matching block of `X` is its nearest word of `D`.
pub fn build_tight_pair(s: f64, t: f64, chunks: usize, seed: u64) -> Result<(BitSequence, BitSequence, TightPairReport)> {
    let s = check_unit("build_tight_pair s", s)?;
    let t = check_unit("build_tight_pair t", t)?;
    if s >= t {
        return Err(Error::Domain {
            what: "build_tight_pair requires s < t; s",
            value: s,
        });
    }
    let len = chunk_boundary(chunks + 1);
    let mut x = BitSequence::zeros(len);
    let mut y = BitSequence::zeros(len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prepared: HashMap<usize, Prepared> = HashMap::new();
    let (mut x_bits, mut y_bits) = (0.0, 0.0);
    let mut blocks = 0;
    let mut flips = 0usize;
    for j in 1..=chunks {
        let mut start = chunk_range(j).start;
        for m in balanced_blocks(j * j, MAX_BLOCK_BITS) {
            if let std::collections::hash_map::Entry::Vacant(e) = prepared.entry(m) {
                e.insert(prepare(m, s, t)?);
            }
            let p = &prepared[&m];
            let yw = p.members[rng.gen_range(0..p.members.len())];
            let xw = p.code.words[p.near.owner[yw as usize] as usize];
            write_word(&mut x, start, m, xw);
            write_word(&mut y, start, m, yw);
            flips += (xw ^ yw).count_ones() as usize;
            x_bits += (p.code.words.len() as f64).log2();
            y_bits += (p.code.covered as f64).log2();
            blocks += 1;
            start += m;
        }
    }
    let mut codes: Vec<TightBlockCode> = prepared.into_values().map(|p| p.code).collect();
    codes.sort_by_key(|c| c.m);
    let lenf = len.max(1) as f64;
    let report = TightPairReport {
        s,
        t,
        target_distance: h_inv(t - s),
        distance: flips as f64 / lenf,
        dim_x: x_bits / lenf,
        dim_y: y_bits / lenf,
        blocks,
        codes,
    };
    Ok((x, y, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_choice() {
        // V(20,2) = 211 < 2^10 <= V(20,3) = 1351
        assert_eq!(radius_for(20, 10.0), 3);
        assert_eq!(radius_for(20, 0.0), 0);
        assert_eq!(radius_for(20, 20.0), 10);
    }

    #[test]
    fn degenerate_zero_to_one() {
        let (x, y, rep) = build_tight_pair(0.0, 1.0, 6, 1).unwrap();
        assert!(rep.codes.iter().all(|c| c.words.len() == 1));
        assert!(rep.distance <= 0.5);
        assert_eq!(x.len(), y.len());
        assert_eq!(rep.dim_x, 0.0);
        assert!(build_tight_pair(0.5, 0.5, 3, 0).is_err());
    }

    #[test]
    fn small_pair_blocks_stay_in_radius() {
        let (x, y, rep) = build_tight_pair(0.3, 0.8, 8, 4).unwrap();
        let mut start = 0;
        for j in 1..=8 {
            for m in balanced_blocks(j * j, MAX_BLOCK_BITS) {
                let r = rep.codes.iter().find(|c| c.m == m).unwrap().radius;
                let d = x.hamming_in(&y, start..start + m);
                assert!(d <= r);
                start += m;
            }
        }
        assert!(rep.dim_x < rep.dim_y);
    }
}
