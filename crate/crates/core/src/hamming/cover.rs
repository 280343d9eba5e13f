//! Covering codes: greedy covers, random codes, max-coverage subcodes, and
//! nearest-codeword tables.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::f64::consts::LN_2;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::volume::ball_volume;
use super::{ball_masks, bfs_distances, check_table_size, log2_biguint, word_mask, BitWord, UNREACHED};
use crate::error::{Error, Result};

/// Sample size for coverage estimates beyond the table guard.
const COVERAGE_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub n: usize,
    pub radius: usize,
    pub words: Vec<u64>,
    /// Fraction of `{0,1}^n` within `radius` of some word; exact when
    /// `n <= TABLE_GUARD_BITS`, sampled otherwise.
    pub coverage_fraction: f64,
}

impl Codebook {
    pub fn new(n: usize, radius: usize, words: Vec<u64>) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidArgument(format!("word length {n} exceeds 64")));
        }
        if let Some(w) = words.iter().find(|&&w| w & !word_mask(n) != 0) {
            return Err(Error::InvalidArgument(format!("word {w:#x} longer than {n} bits")));
        }
        let coverage_fraction = if words.is_empty() {
            0.0
        } else if check_table_size(n).is_ok() {
            coverage_count(n, radius, &words)? as f64 / (1u64 << n) as f64
        } else {
            sampled_coverage(n, radius, &words)
        };
        Ok(Self {
            n,
            radius,
            words,
            coverage_fraction,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_covering(&self) -> bool {
        self.coverage_fraction == 1.0
    }

    /// `log2 |C| / n`.
    pub fn rate(&self) -> f64 {
        if self.words.is_empty() || self.n == 0 {
            return 0.0;
        }
        (self.words.len() as f64).log2() / self.n as f64
    }

    pub fn word(&self, i: usize) -> BitWord {
        BitWord::new(self.n, self.words[i]).expect("codebook words fit their length")
    }

    /// Index of the nearest word to `w` (lowest index on ties), by scanning.
    pub fn nearest(&self, w: u64) -> Option<(usize, usize)> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, c)| ((c ^ w).count_ones() as usize, i))
            .min()
            .map(|(d, i)| (i, d))
    }

    pub fn nearest_table(&self) -> Result<NearestTable> {
        NearestTable::build(self.n, &self.words)
    }

    /// `n r count` header, then one hex word per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.radius, self.words.len());
        for &w in &self.words {
            let _ = writeln!(out, "{}", BitWord::new(self.n, w).expect("fits").to_hex());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty codebook".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| Error::Parse(format!("bad codebook header {header:?}"))))
            .collect::<Result<_>>()?;
        let [n, radius, count] = fields[..] else {
            return Err(Error::Parse(format!("codebook header needs `n r count`, got {header:?}")));
        };
        let words: Vec<u64> = lines
            .map(|l| BitWord::from_hex(n, l).map(|w| w.bits()))
            .collect::<Result<_>>()?;
        if words.len() != count {
            return Err(Error::Parse(format!("codebook declares {count} words, found {}", words.len())));
        }
        Self::new(n, radius, words)
    }
}

/// Distance to, and index of, the nearest codeword for every word of
/// `{0,1}^n`; ties go to the lowest index.
#[derive(Debug, Clone)]
pub struct NearestTable {
    pub n: usize,
    pub dist: Vec<u8>,
    pub owner: Vec<u32>,
}

impl NearestTable {
    pub fn build(n: usize, words: &[u64]) -> Result<Self> {
        check_table_size(n)?;
        if words.is_empty() {
            return Err(Error::InvalidArgument("nearest table of an empty codebook".into()));
        }
        let size = 1usize << n;
        let mut dist = vec![UNREACHED; size];
        let mut owner = vec![u32::MAX; size];
        let mut frontier = Vec::new();
        for (i, &w) in words.iter().enumerate() {
            if dist[w as usize] == UNREACHED {
                dist[w as usize] = 0;
                owner[w as usize] = i as u32;
                frontier.push(w as u32);
            }
        }
        let mut d = 0u8;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &u in &frontier {
                let o = owner[u as usize];
                for b in 0..n {
                    let v = (u ^ (1 << b)) as usize;
                    if dist[v] == UNREACHED {
                        dist[v] = d + 1;
                        owner[v] = o;
                        next.push(v as u32);
                    } else if dist[v] == d + 1 && o < owner[v] {
                        owner[v] = o;
                    }
                }
            }
            frontier = next;
            d += 1;
        }
        Ok(Self { n, dist, owner })
    }

    /// Mean distance (in bits) from a uniform word to the code.
    pub fn mean_distance(&self) -> f64 {
        self.dist.iter().map(|&d| d as u64).sum::<u64>() as f64 / self.dist.len() as f64
    }
}

/// Words within `r` of some codeword, by radius-limited BFS.
pub fn coverage_count(n: usize, r: usize, words: &[u64]) -> Result<u64> {
    check_table_size(n)?;
    let dist = bfs_distances(n, words, r);
    Ok(dist.iter().filter(|&&d| d != UNREACHED).count() as u64)
}

fn sampled_coverage(n: usize, r: usize, words: &[u64]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de ^ n as u64);
    let mask = word_mask(n);
    let hits = (0..COVERAGE_SAMPLES)
        .filter(|_| {
            let x = rng.gen::<u64>() & mask;
            words.iter().any(|w| ((w ^ x).count_ones() as usize) <= r)
        })
        .count();
    hits as f64 / COVERAGE_SAMPLES as f64
}

/// `1 + n 2^n ln 2 / V(n, r)`.
pub fn delsarte_piret_bound(n: usize, r: usize) -> f64 {
    let v = ball_volume(n, r.min(n)).expect("radius clamped");
    1.0 + n as f64 * LN_2 * (n as f64 - log2_biguint(&v)).exp2()
}

/// In-place Walsh-Hadamard transform (unnormalized).
fn wht(a: &mut [i64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// Greedy covering code: each step takes the word covering the most
/// still-uncovered words, lowest index on ties.
///
/// Gains are kept exact. After a step that newly covers `k` words they are
/// either decremented ball by ball (`k V` updates) or recomputed as the XOR
/// convolution of the uncovered set with the ball (two transforms), whichever
/// is cheaper. A lazy max-heap finds the best word.
pub fn greedy_cover(n: usize, r: usize) -> Result<Codebook> {
    check_table_size(n)?;
    if r >= n {
        return Codebook::new(n, r, vec![0]);
    }
    let size = 1usize << n;
    let masks = ball_masks(n, r);
    let v = masks.len();
    let transform_cost = 2 * n * size + size;
    let mut ball_hat: Option<Vec<i64>> = None;

    let mut covered = vec![false; size];
    let mut uncovered = size;
    let mut gain = vec![v as u32; size];
    let mut heap: BinaryHeap<(u32, Reverse<u32>)> = (0..size as u32).map(|w| (v as u32, Reverse(w))).collect();
    let mut words = Vec::new();
    let mut newly = Vec::with_capacity(v);

    while uncovered > 0 {
        let c = loop {
            let (g, Reverse(w)) = heap.pop().expect("uncovered words remain, so some gain is positive");
            let cur = gain[w as usize];
            if g == cur {
                break w as u64;
            }
            if cur > 0 {
                heap.push((cur, Reverse(w)));
            }
        };
        words.push(c);
        newly.clear();
        for &m in &masks {
            let u = (c ^ m) as usize;
            if !covered[u] {
                covered[u] = true;
                newly.push(u);
            }
        }
        uncovered -= newly.len();
        if uncovered == 0 {
            break;
        }
        if newly.len() * v <= transform_cost {
            for &u in &newly {
                for &m in &masks {
                    gain[u ^ m as usize] -= 1;
                }
            }
        } else {
            let bh = ball_hat.get_or_insert_with(|| {
                let mut b = vec![0i64; size];
                for &m in &masks {
                    b[m as usize] = 1;
                }
                wht(&mut b);
                b
            });
            let mut u: Vec<i64> = covered.iter().map(|&c| if c { 0 } else { 1 }).collect();
            wht(&mut u);
            for (x, y) in u.iter_mut().zip(bh.iter()) {
                *x *= y;
            }
            wht(&mut u);
            for (g, x) in gain.iter_mut().zip(&u) {
                *g = (x >> n) as u32;
            }
        }
    }

    let code = Codebook::new(n, r, words)?;
    if !code.is_covering() {
        return Err(Error::InvalidArgument(format!(
            "greedy cover n={n} r={r} left words uncovered"
        )));
    }
    let bound = delsarte_piret_bound(n, r);
    if code.len() as f64 >= bound {
        return Err(Error::CoverBound {
            size: code.len(),
            bound,
        });
    }
    Ok(code)
}

/// `size` distinct uniformly drawn words.
pub fn random_cover(n: usize, r: usize, size: usize, seed: u64) -> Result<Codebook> {
    if size == 0 || n > 64 {
        return Err(Error::InvalidArgument(format!("random_cover needs size >= 1 and n <= 64 (size {size}, n {n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<u64> = if n < 32 {
        let space = 1usize << n;
        if size > space {
            return Err(Error::InvalidArgument(format!("cannot draw {size} distinct words of length {n}")));
        }
        sample(&mut rng, space, size).into_iter().map(|i| i as u64).collect()
    } else {
        let mask = word_mask(n);
        let mut seen = HashSet::with_capacity(size);
        let mut out = Vec::with_capacity(size);
        while out.len() < size {
            let w = rng.gen::<u64>() & mask;
            if seen.insert(w) {
                out.push(w);
            }
        }
        out
    };
    Codebook::new(n, r, words)
}

/// Lazy greedy max coverage: picks `k` of `candidates` (indices returned in
/// pick order), marking their radius balls in `covered`.
pub(crate) fn lazy_max_coverage(masks: &[u64], candidates: &[u64], k: usize, covered: &mut [bool]) -> Vec<usize> {
    let gain_of = |w: u64, covered: &[bool]| masks.iter().filter(|&&m| !covered[(w ^ m) as usize]).count() as u32;
    // ball size is an upper bound on every gain; exact values are computed on pop
    let v = masks.len() as u32;
    let mut heap: BinaryHeap<(u32, Reverse<u32>)> = (0..candidates.len() as u32).map(|i| (v, Reverse(i))).collect();
    let mut picked = Vec::with_capacity(k);
    while picked.len() < k {
        let Some((_, Reverse(i))) = heap.pop() else { break };
        let w = candidates[i as usize];
        let g = gain_of(w, covered);
        if heap.peek().is_none_or(|&top| (g, Reverse(i)) >= top) {
            picked.push(i as usize);
            for &m in masks {
                covered[(w ^ m) as usize] = true;
            }
        } else {
            heap.push((g, Reverse(i)));
        }
    }
    picked
}

/// Greedy choice of `k` words out of all of `{0,1}^n` maximizing radius-`r`
/// coverage.
pub fn greedy_max_coverage(n: usize, r: usize, k: usize) -> Result<Vec<u64>> {
    check_table_size(n)?;
    let all: Vec<u64> = (0..1u64 << n).collect();
    let mut covered = vec![false; 1 << n];
    let picked = lazy_max_coverage(&ball_masks(n, r), &all, k.min(all.len()), &mut covered);
    Ok(picked.into_iter().map(|i| all[i]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubcodeReport {
    pub code: Codebook,
    /// Words covered by the subcode.
    pub covered: u64,
    /// `(1 - (1 - 1/|C|)^m) 2^n`, guaranteed by greedy selection.
    pub greedy_floor: f64,
    /// `(m / |C|) 2^n`, attained by some subcode but not promised by greedy.
    pub average_floor: f64,
    pub below_average: bool,
}

/// Greedy max-coverage subcode of `m` words, keeping `c`'s radius.
pub fn best_subcode(c: &Codebook, m: usize) -> Result<SubcodeReport> {
    check_table_size(c.n)?;
    if m == 0 || m > c.len() {
        return Err(Error::InvalidArgument(format!("subcode size {m} outside 1..={}", c.len())));
    }
    let size = 1u64 << c.n;
    let mut covered = vec![false; size as usize];
    let picked = lazy_max_coverage(&ball_masks(c.n, c.radius), &c.words, m, &mut covered);
    let covered_count = covered.iter().filter(|&&x| x).count() as u64;
    let words: Vec<u64> = picked.into_iter().map(|i| c.words[i]).collect();
    let code = Codebook {
        n: c.n,
        radius: c.radius,
        words,
        coverage_fraction: covered_count as f64 / size as f64,
    };
    let frac = 1.0 / c.len() as f64;
    let greedy_floor = (1.0 - (1.0 - frac).powi(m as i32)) * size as f64;
    let average_floor = m as f64 * frac * size as f64;
    if c.is_covering() && (covered_count as f64) < greedy_floor * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "subcode covers {covered_count} < greedy guarantee {greedy_floor}"
        )));
    }
    Ok(SubcodeReport {
        code,
        covered: covered_count,
        greedy_floor,
        average_floor,
        below_average: (covered_count as f64) < average_floor,
    })
}

/// Farthest-point code: starts at a random word, then repeatedly adds a
/// uniformly chosen word among those farthest from the code so far.
///
/// Distances are kept in a table and lowered by a BFS from each new word that
/// stops where the table is already as small. The farthest words form a
/// candidate pool, rebuilt by one scan whenever the maximum drops.
pub fn farthest_point_code(n: usize, k: usize, seed: u64) -> Result<Vec<u64>> {
    check_table_size(n)?;
    let size = 1usize << n;
    if k == 0 {
        return Err(Error::InvalidArgument("farthest_point_code needs k >= 1".into()));
    }
    if k >= size {
        return Ok((0..size as u64).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = vec![UNREACHED; size];
    let mut words = Vec::with_capacity(k);
    let mut pool: Vec<u32> = Vec::new();
    let mut level = 0u8;
    let mut c = rng.gen_range(0..size) as u32;
    loop {
        words.push(c as u64);
        dist[c as usize] = 0;
        let mut frontier = vec![c];
        let mut d = 0u8;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &u in &frontier {
                for b in 0..n {
                    let v = u ^ (1 << b);
                    if dist[v as usize] > d + 1 {
                        dist[v as usize] = d + 1;
                        next.push(v);
                    }
                }
            }
            frontier = next;
            d += 1;
        }
        if words.len() == k {
            return Ok(words);
        }
        c = loop {
            if pool.is_empty() {
                level = *dist.iter().max().expect("nonempty space");
                pool = (0..size as u32).filter(|&w| dist[w as usize] == level).collect();
            }
            let w = pool.swap_remove(rng.gen_range(0..pool.len()));
            if dist[w as usize] == level {
                break w;
            }
        };
    }
}
