//! Set distances in `{0,1}^n` and brute-force checks of the opposite-sphere
//! bound on them.

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sphere::opposite_sphere_distance_bits;
use super::{bfs_distances, check_table_size, word_mask, BitWord, BRUTE_FORCE_PAIRS, UNREACHED};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`verify_harper`].
pub const HARPER_MAX_BITS: usize = 14;

/// Exact `min d(a, b) / n` by the pairwise double loop.
pub fn brute_force_set_distance(a: &[BitWord], b: &[BitWord]) -> Result<f64> {
    let (Some(first), false) = (a.first(), b.is_empty()) else {
        return Err(Error::InvalidArgument("set distance needs nonempty sets".into()));
    };
    let n = first.len();
    if let Some(w) = a.iter().chain(b).find(|w| w.len() != n) {
        return Err(Error::LengthMismatch { left: n, right: w.len() });
    }
    let xs: Vec<u64> = a.iter().map(BitWord::bits).collect();
    let ys: Vec<u64> = b.iter().map(BitWord::bits).collect();
    let d = brute_force_distance_bits(&xs, &ys)?;
    Ok(if n == 0 { 0.0 } else { d as f64 / n as f64 })
}

/// Pairwise minimum distance in bits, guarded at [`BRUTE_FORCE_PAIRS`].
pub fn brute_force_distance_bits(a: &[u64], b: &[u64]) -> Result<usize> {
    let pairs = a.len() as u128 * b.len() as u128;
    if pairs > BRUTE_FORCE_PAIRS {
        return Err(Error::SizeGuard {
            what: "pairwise set distance",
            got: pairs,
            limit: BRUTE_FORCE_PAIRS,
        });
    }
    let mut best = u32::MAX;
    for x in a {
        for y in b {
            best = best.min((x ^ y).count_ones());
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best as usize)
}

/// Minimum distance in bits by BFS from `a`; `O(n 2^n)` regardless of set sizes.
pub fn set_distance_bits(n: usize, a: &[u64], b: &[u64]) -> Result<usize> {
    check_table_size(n)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("set distance needs nonempty sets".into()));
    }
    let dist = bfs_distances(n, a, n);
    Ok(b.iter().map(|&w| dist[w as usize]).min().unwrap() as usize)
}

/// Number of words farther than `eps` (normalized) from the set `a`.
pub fn harper_far_count(n: usize, a: &[u64], eps: f64) -> Result<u64> {
    check_table_size(n)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("harper_far_count needs a nonempty set".into()));
    }
    let eps = crate::error::check_unit("harper_far_count eps", eps)?;
    let radius = (eps * n as f64 + 1e-9).floor() as usize;
    let dist = bfs_distances(n, a, radius);
    Ok(dist.iter().filter(|&&d| d == UNREACHED).count() as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarperInstance {
    pub kind: &'static str,
    pub size_a: u64,
    pub size_b: u64,
    /// `d(A, B)` in bits.
    pub distance: usize,
    /// Opposite-sphere distance for the same sizes, in bits.
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarperReport {
    pub n: usize,
    pub checked: usize,
    pub failures: Vec<HarperInstance>,
    /// Passing instance with the least slack `bound - distance`; ties go to
    /// the larger distance, then the larger `|A| |B|`.
    pub tightest: Option<HarperInstance>,
}

impl HarperReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_subset(rng: &mut ChaCha8Rng, universe: &[u64], size: usize) -> Vec<u64> {
    sample(rng, universe.len(), size.min(universe.len()))
        .into_iter()
        .map(|i| universe[i])
        .collect()
}

fn ball_around(n: usize, centre: u64, r: usize) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|w| ((w ^ centre).count_ones() as usize) <= r)
        .collect()
}

/// One random or adversarial pair `(A, B)`; the kind cycles with `t`.
fn draw_pair(n: usize, t: usize, rng: &mut ChaCha8Rng) -> (&'static str, Vec<u64>, Vec<u64>) {
    let all: Vec<u64> = (0u64..1 << n).collect();
    let full = word_mask(n);
    match t % 6 {
        0 => {
            let sa = rng.gen_range(1..=all.len());
            let sb = rng.gen_range(1..=all.len());
            ("random", random_subset(rng, &all, sa), random_subset(rng, &all, sb))
        }
        1 => {
            // small sets, so distances are usually positive
            let cap = (all.len() / 8).max(1);
            let sa = rng.gen_range(1..=cap);
            let sb = rng.gen_range(1..=cap);
            ("random_small", random_subset(rng, &all, sa), random_subset(rng, &all, sb))
        }
        2 => {
            let c = rng.gen_range(0..=full);
            let a = rng.gen_range(0..=n);
            let b = rng.gen_range(0..=n);
            ("antipodal_balls", ball_around(n, c, a), ball_around(n, c ^ full, b))
        }
        3 => {
            // ball plus a random (not lex) part of the next layer, both sides
            let c = rng.gen_range(0..=full);
            let side = |centre: u64, rng: &mut ChaCha8Rng| {
                let k = rng.gen_range(0..n);
                let mut set = ball_around(n, centre, k);
                let layer: Vec<u64> = all
                    .iter()
                    .copied()
                    .filter(|w| (w ^ centre).count_ones() as usize == k + 1)
                    .collect();
                let p = rng.gen_range(0..=layer.len());
                set.extend(random_subset(rng, &layer, p));
                set
            };
            let a = side(c, rng);
            let b = side(c ^ full, rng);
            ("split_layers", a, b)
        }
        4 => {
            let c = rng.gen_range(0..=full);
            let ra = rng.gen_range(0..=n / 2);
            let rb = rng.gen_range(0..=n / 2);
            let ba = ball_around(n, c, ra);
            let bb = ball_around(n, c ^ full, rb);
            let sa = rng.gen_range(1..=ba.len());
            let sb = rng.gen_range(1..=bb.len());
            ("ball_subsets", random_subset(rng, &ba, sa), random_subset(rng, &bb, sb))
        }
        _ => {
            // subcubes fixing the same leading positions to 0 and to 1
            let i = rng.gen_range(0..=n);
            let j = rng.gen_range(0..=n);
            let lead = |k: usize| if k == 0 { 0 } else { full & !(word_mask(n - k)) };
            let (ma, mb) = (lead(i), lead(j));
            let a = all.iter().copied().filter(|w| w & ma == 0).collect();
            let b = all.iter().copied().filter(|w| w & mb == mb).collect();
            ("subcubes", a, b)
        }
    }
}

/// Checks `d(A, B) <= d(A', B')` for opposite canonical spheres `A', B'` of
/// the same sizes, over `trials` random and adversarial pairs.
pub fn verify_harper(n: usize, trials: usize, seed: u64) -> Result<HarperReport> {
    if n == 0 || n > HARPER_MAX_BITS {
        return Err(Error::SizeGuard {
            what: "verify_harper word length",
            got: n as u128,
            limit: HARPER_MAX_BITS as u128,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32));
    let mut report = HarperReport {
        n,
        checked: 0,
        failures: Vec::new(),
        tightest: None,
    };
    for t in 0..trials {
        let (kind, a, b) = draw_pair(n, t, &mut rng);
        let distance = set_distance_bits(n, &a, &b)?;
        let bound = opposite_sphere_distance_bits(n, &BigUint::from(a.len()), &BigUint::from(b.len()))?;
        let inst = HarperInstance {
            kind,
            size_a: a.len() as u64,
            size_b: b.len() as u64,
            distance,
            bound,
        };
        report.checked += 1;
        if distance > bound {
            report.failures.push(inst);
            continue;
        }
        let better = match &report.tightest {
            None => true,
            Some(cur) => {
                let (s_new, s_cur) = (bound - distance, cur.bound - cur.distance);
                let (p_new, p_cur) = (inst.size_a * inst.size_b, cur.size_a * cur.size_b);
                (s_new, cur.distance, p_cur) < (s_cur, distance, p_new)
            }
        };
        if better {
            report.tightest = Some(inst);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_examples() {
        let a = vec![BitWord::from_bit_str("000").unwrap()];
        let b = vec![BitWord::from_bit_str("111").unwrap()];
        assert_eq!(brute_force_set_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(brute_force_set_distance(&a, &a).unwrap(), 0.0);
        let c = vec![BitWord::from_bit_str("0000").unwrap()];
        assert!(brute_force_set_distance(&a, &c).is_err());
        assert!(brute_force_set_distance(&a, &[]).is_err());
    }

    #[test]
    fn bfs_distance_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let all: Vec<u64> = (0..1 << 10).collect();
        for _ in 0..300 {
            let sa = rng.gen_range(1..40);
            let sb = rng.gen_range(1..40);
            let a = random_subset(&mut rng, &all, sa);
            let b = random_subset(&mut rng, &all, sb);
            assert_eq!(set_distance_bits(10, &a, &b).unwrap(), brute_force_distance_bits(&a, &b).unwrap());
        }
    }

    #[test]
    fn brute_force_guard() {
        let big: Vec<u64> = (0..1 << 16).collect();
        assert!(matches!(brute_force_distance_bits(&big, &big), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn verify_harper_small() {
        for n in 1..=8 {
            let rep = verify_harper(n, 2_000, 1).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures.first());
            assert_eq!(rep.checked, 2_000);
        }
    }

    #[test]
    fn antipodal_balls_meet_the_bound() {
        for n in 2..=10 {
            for a in 0..=n {
                for b in 0..=n {
                    let full = word_mask(n);
                    let (x, y) = (ball_around(n, 0, a), ball_around(n, full, b));
                    let d = set_distance_bits(n, &x, &y).unwrap();
                    let bound = opposite_sphere_distance_bits(n, &BigUint::from(x.len()), &BigUint::from(y.len())).unwrap();
                    assert_eq!(d, bound);
                }
            }
        }
    }

    #[test]
    fn far_count_examples() {
        let all: Vec<u64> = (0..1 << 8).collect();
        assert_eq!(harper_far_count(8, &all, 0.3).unwrap(), 0);
        assert_eq!(harper_far_count(8, &[0], 0.0).unwrap(), 255);
        // radius floor(0.25 * 8) = 2: far words have weight >= 3
        assert_eq!(harper_far_count(8, &[0], 0.25).unwrap(), 256 - 37);
    }
}
