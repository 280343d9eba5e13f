use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitSequence;
use crate::entropy::h_inv;
use crate::error::{check_unit, Error, Result};
use crate::proxy::{estimate_chunk_dim, DimEstimator};

/// Redraws allowed to [`Searcher::RandomFill`].
pub const RANDOM_FILL_ATTEMPTS: usize = 8;

/// Estimator evaluations allowed to [`Searcher::SteepestAscent`], per bit.
pub const STEEPEST_EVALS_PER_BIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Searcher {
    /// Flip majority-value bits in seeded random order toward balance.
    Greedy,
    /// Overwrite a random subset of the budget's size with fair coins.
    RandomFill,
    /// Best single flip per step.
    SteepestAscent,
}

impl fmt::Display for Searcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Searcher::Greedy => "greedy",
            Searcher::RandomFill => "random-fill",
            Searcher::SteepestAscent => "steepest",
        })
    }
}

impl FromStr for Searcher {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "greedy" => Searcher::Greedy,
            "random-fill" => Searcher::RandomFill,
            "steepest" => Searcher::SteepestAscent,
            other => return Err(Error::Parse(format!("unknown searcher {other:?}"))),
        })
    }
}

fn estimate(chunk: &BitSequence, context: &BitSequence, est: &DimEstimator) -> Result<f64> {
    Ok(estimate_chunk_dim(chunk, context, est)?)
}

/// Flips in a chunk of length `len` under `radius`.
pub fn flip_budget(radius: f64, len: usize) -> usize {
    let mut k = (radius * len as f64).floor() as usize;
    while k > 0 && k as f64 > radius * len as f64 {
        k -= 1;
    }
    k.min(len)
}

/// Moves `chunk` within normalized distance `radius` so as to raise the
/// estimate, stopping early once a target dimension is met.
///
/// The result never has a lower estimate than `chunk`.
pub fn raise_chunk(
    chunk: &BitSequence,
    context: &BitSequence,
    radius: f64,
    est: &DimEstimator,
    searcher: Searcher,
    seed: u64,
    target: Option<f64>,
) -> Result<BitSequence> {
    let radius = check_unit("raise_chunk radius", radius)?;
    if let Some(t) = target {
        check_unit("raise_chunk target", t)?;
    }
    let budget = flip_budget(radius, chunk.len());
    if budget == 0 {
        return Ok(chunk.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match searcher {
        Searcher::Greedy => greedy(chunk, context, est, budget, target, &mut rng),
        Searcher::RandomFill => random_fill(chunk, context, est, budget, &mut rng),
        Searcher::SteepestAscent => steepest(chunk, context, est, budget, target),
    }
}

fn greedy(
    chunk: &BitSequence,
    context: &BitSequence,
    est: &DimEstimator,
    budget: usize,
    target: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<BitSequence> {
    let len = chunk.len();
    let ones = chunk.count_ones();
    let majority = ones * 2 > len;
    let minority_count = ones.min(len - ones);
    let goal = match target {
        Some(t) if t < 1.0 => ((h_inv(t) * len as f64).ceil() as usize).min(len / 2),
        _ => len / 2,
    };
    let k = goal.saturating_sub(minority_count).min(budget);
    if k == 0 {
        return Ok(chunk.clone());
    }
    let positions: Vec<usize> = (0..len).filter(|&i| chunk.get(i) == majority).collect();
    let mut out = chunk.clone();
    for idx in sample(rng, positions.len(), k) {
        out.flip(positions[idx]);
    }
    if est.is_frequency() || estimate(&out, context, est)? >= estimate(chunk, context, est)? {
        Ok(out)
    } else {
        Ok(chunk.clone())
    }
}

fn random_fill(
    chunk: &BitSequence,
    context: &BitSequence,
    est: &DimEstimator,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BitSequence> {
    let base = estimate(chunk, context, est)?;
    let mut best: Option<(f64, BitSequence)> = None;
    for _ in 0..RANDOM_FILL_ATTEMPTS {
        let mut cand = chunk.clone();
        for i in sample(rng, chunk.len(), budget) {
            cand.set(i, rng.gen());
        }
        let v = estimate(&cand, context, est)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, cand));
        }
        if v >= base {
            break;
        }
    }
    match best {
        Some((v, cand)) if v >= base => Ok(cand),
        _ => Ok(chunk.clone()),
    }
}

/// Positions with equal class give equal estimates after a single flip: the
/// bit value for frequency estimators, the `2k-1` bits around an interior
/// position for block entropy. Edge positions are their own class.
fn flip_class(x: &BitSequence, i: usize, est: &DimEstimator) -> (u64, usize) {
    match est {
        DimEstimator::BlockEntropy(k) => {
            let k = (*k).min(x.len()).max(1);
            if i + 1 >= k && i + k <= x.len() {
                (x.read_bits(i + 1 - k, 2 * k - 1), usize::MAX)
            } else {
                (0, i)
            }
        }
        _ => (u64::from(x.get(i)), usize::MAX),
    }
}

fn steepest(
    chunk: &BitSequence,
    context: &BitSequence,
    est: &DimEstimator,
    budget: usize,
    target: Option<f64>,
) -> Result<BitSequence> {
    let len = chunk.len();
    let cap = STEEPEST_EVALS_PER_BIT * len;
    let mut cur = chunk.clone();
    let mut cur_v = estimate(&cur, context, est)?;
    let mut evals = 1;
    let mut changed = vec![false; len];
    let mut used = 0;
    while evals < cap && target.is_none_or(|t| cur_v < t) {
        // positions whose flip stays within the budget
        let mut cands: Vec<usize> = (0..len).filter(|&i| changed[i] || used < budget).collect();
        if !matches!(est, DimEstimator::Compressor(_)) {
            // flips in the same class score the same; keep the first of each
            let mut seen = HashSet::new();
            cands.retain(|&i| seen.insert((flip_class(&cur, i, est), changed[i])));
        }
        cands.truncate(cap - evals);
        evals += cands.len();
        let scored: Vec<(f64, usize)> = cands
            .par_iter()
            .map(|&i| {
                let mut c = cur.clone();
                c.flip(i);
                estimate(&c, context, est).map(|v| (v, i))
            })
            .collect::<Result<_>>()?;
        let Some(&(v, i)) = scored
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
        else {
            break;
        };
        if v <= cur_v {
            break;
        }
        cur.flip(i);
        if changed[i] {
            used -= 1;
        } else {
            used += 1;
        }
        changed[i] = !changed[i];
        cur_v = v;
    }
    Ok(cur)
}
