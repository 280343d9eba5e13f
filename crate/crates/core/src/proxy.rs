//! Computable stand-ins for effective dimension on finite prefixes.
//!
//! Sequences are cut into chunks of size `j^2` starting at
//! `n_j = sum_{i<j} i^2`; each chunk gets a conditional dimension estimate
//! `s_j`, and weighted running averages `A_j = (1/n_j) sum_{i<j} s_i i^2`
//! stand in for dimension (and, with per-chunk mismatch densities, for
//! distance).

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use rayon::prelude::*;

use crate::bits::BitSequence;
use crate::entropy::h;
use crate::error::{Error, EstimatorError, Result};

/// Conditioning window of the compressor estimator, in bits.
pub const CONTEXT_WINDOW: usize = 1 << 16;

/// Chunks below this index never enter tail statistics.
pub const MIN_TAIL_CHUNK: usize = 10;

/// `n_j = sum_{i=1}^{j-1} i^2 = (j-1) j (2j-1) / 6`; `n_0 = n_1 = 0`.
#[inline]
pub fn chunk_boundary(j: usize) -> usize {
    if j == 0 {
        return 0;
    }
    (j - 1) * j * (2 * j - 1) / 6
}

/// Bit range of chunk `j` (length `j^2`).
#[inline]
pub fn chunk_range(j: usize) -> Range<usize> {
    chunk_boundary(j)..chunk_boundary(j + 1)
}

/// Complete chunks that fit in `len` bits.
pub fn chunk_count(len: usize) -> usize {
    let mut j = 0;
    while chunk_boundary(j + 2) <= len {
        j += 1;
    }
    j
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkSchedule {
    /// `boundaries[j-1] = n_j` for `j = 1..=count+1`.
    pub boundaries: Vec<usize>,
    pub count: usize,
}

impl ChunkSchedule {
    pub fn for_length(len: usize) -> Self {
        let count = chunk_count(len);
        Self {
            boundaries: (1..=count + 1).map(chunk_boundary).collect(),
            count,
        }
    }

    pub fn covered_bits(&self) -> usize {
        *self.boundaries.last().unwrap_or(&0)
    }
}

/// First running-average index used by tail statistics when the caller does
/// not pick one: half the chunk count, never below [`MIN_TAIL_CHUNK`] unless
/// the sequence is too short to have any such chunk.
pub fn default_tail_start(chunks: usize) -> usize {
    if chunks < MIN_TAIL_CHUNK {
        2
    } else {
        MIN_TAIL_CHUNK.max(chunks / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DimEstimator {
    /// `H` of the fraction of ones; only meaningful for Bernoulli-type sources.
    BernoulliOracle,
    /// Smoothed entropy of overlapping `k`-grams, divided by `k`.
    BlockEntropy(usize),
    /// Conditional compressed length per bit.
    Compressor(String),
}

impl DimEstimator {
    /// Frequency-type estimators depend only on the count of ones.
    pub fn is_frequency(&self) -> bool {
        matches!(self, DimEstimator::BernoulliOracle)
    }
}

impl fmt::Display for DimEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimEstimator::BernoulliOracle => write!(f, "bernoulli"),
            DimEstimator::BlockEntropy(k) => write!(f, "block:{k}"),
            DimEstimator::Compressor(name) => write!(f, "compressor:{name}"),
        }
    }
}

impl FromStr for DimEstimator {
    type Err = EstimatorError;

    fn from_str(spec: &str) -> std::result::Result<Self, Self::Err> {
        let spec = spec.trim();
        if spec == "bernoulli" {
            return Ok(DimEstimator::BernoulliOracle);
        }
        if spec == "block" {
            return Ok(DimEstimator::BlockEntropy(8));
        }
        if let Some(k) = spec.strip_prefix("block:") {
            let k: usize = k.parse().map_err(|_| EstimatorError::UnknownSpec(spec.into()))?;
            if !(1..=20).contains(&k) {
                return Err(EstimatorError::BadBlockSize(k));
            }
            return Ok(DimEstimator::BlockEntropy(k));
        }
        if let Some(name) = spec.strip_prefix("compressor:") {
            return match name {
                "deflate" => Ok(DimEstimator::Compressor(name.into())),
                _ => Err(EstimatorError::UnknownCompressor(name.into())),
            };
        }
        Err(EstimatorError::UnknownSpec(spec.into()))
    }
}

fn block_entropy_rate(chunk: &BitSequence, k: usize) -> f64 {
    let k = k.min(chunk.len()).max(1);
    let cells = 1usize << k;
    let grams = chunk.len() + 1 - k;
    let mut counts = vec![0u32; cells];
    let mask = (cells - 1) as u64;
    let mut window = chunk.read_bits(0, k - 1) << 1;
    for i in (k - 1)..chunk.len() {
        window = ((window >> 1) | ((chunk.get(i) as u64) << (k - 1))) & mask;
        counts[window as usize] += 1;
    }
    let total = (grams + cells) as f64;
    let mut ent = 0.0;
    let mut empty = 0usize;
    for &c in &counts {
        if c == 0 {
            empty += 1;
        } else {
            let p = (c as f64 + 1.0) / total;
            ent -= p * p.log2();
        }
    }
    let p0 = 1.0 / total;
    ent -= empty as f64 * p0 * p0.log2();
    ent / k as f64
}

fn deflate_bits(bytes: &[u8]) -> std::result::Result<usize, EstimatorError> {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
    enc.write_all(bytes)
        .map_err(|e| EstimatorError::Compressor(e.to_string()))?;
    let out = enc
        .finish()
        .map_err(|e| EstimatorError::Compressor(e.to_string()))?;
    Ok(out.len() * 8)
}

fn compressor_rate(
    name: &str,
    chunk: &BitSequence,
    context: &BitSequence,
) -> std::result::Result<f64, EstimatorError> {
    if name != "deflate" {
        return Err(EstimatorError::UnknownCompressor(name.into()));
    }
    let start = context.len().saturating_sub(CONTEXT_WINDOW);
    let ctx = context.slice(start..context.len());
    let mut joined = ctx.clone();
    joined.extend_from(chunk);
    let with = deflate_bits(&joined.to_bytes_msb())?;
    let without = if ctx.is_empty() {
        0
    } else {
        deflate_bits(&ctx.to_bytes_msb())?
    };
    Ok((with as f64 - without as f64) / chunk.len() as f64)
}

/// Conditional dimension estimate of `chunk` given the preceding `context`,
/// clamped to `[0, 1]`.
pub fn estimate_chunk_dim(
    chunk: &BitSequence,
    context: &BitSequence,
    est: &DimEstimator,
) -> std::result::Result<f64, EstimatorError> {
    if chunk.is_empty() {
        return Ok(0.0);
    }
    let raw = match est {
        DimEstimator::BernoulliOracle => h(chunk.count_ones() as f64 / chunk.len() as f64),
        DimEstimator::BlockEntropy(k) => {
            if !(1..=20).contains(k) {
                return Err(EstimatorError::BadBlockSize(*k));
            }
            block_entropy_rate(chunk, *k)
        }
        DimEstimator::Compressor(name) => compressor_rate(name, chunk, context)?,
    };
    Ok(raw.clamp(0.0, 1.0))
}

/// Per-chunk estimates `s_1..s_J` of `x`, each conditioned on the prefix
/// before its chunk.
pub fn chunk_dims(x: &BitSequence, est: &DimEstimator) -> Result<Vec<f64>> {
    let chunks = chunk_count(x.len());
    (1..=chunks)
        .into_par_iter()
        .map(|j| {
            let r = chunk_range(j);
            let ctx_start = r.start.saturating_sub(CONTEXT_WINDOW);
            let ctx = if est.is_frequency() || matches!(est, DimEstimator::BlockEntropy(_)) {
                BitSequence::zeros(0)
            } else {
                x.slice(ctx_start..r.start)
            };
            estimate_chunk_dim(&x.slice(r), &ctx, est).map_err(Error::from)
        })
        .collect()
}

/// `A_j = (1/n_j) sum_{i<j} v_i i^2` for `j = 2..=J+1`, with `v[i-1] = v_i`.
pub fn running_averages(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let i = idx + 1;
            acc += v * (i * i) as f64;
            acc / chunk_boundary(i + 1) as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimSeries {
    /// `s_1..s_J`
    pub chunk_values: Vec<f64>,
    /// `series[k] = A_{k+2}`
    pub series: Vec<f64>,
    pub final_value: f64,
    pub tail_min: f64,
    pub tail_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    /// `delta_1..delta_J`
    pub chunk_values: Vec<f64>,
    /// `series[k] = A_{k+2}`
    pub series: Vec<f64>,
    /// `d(X|n_j, Y|n_j)` computed directly, same indexing as `series`
    pub prefix: Vec<f64>,
    pub final_value: f64,
    pub tail_max: f64,
    pub tail_start: usize,
}

fn tail_slice(series: &[f64], tail_start: Option<usize>) -> Result<(usize, &[f64])> {
    let chunks = series.len();
    let ts = tail_start.unwrap_or_else(|| default_tail_start(chunks)).max(2);
    if chunks == 0 || ts > chunks + 1 {
        return Err(Error::TooShort {
            needed: chunk_boundary(ts.max(2)),
            got: chunk_boundary(chunks + 1),
        });
    }
    Ok((ts, &series[ts - 2..]))
}

/// Weighted dimension series with its final value and tail minimum.
pub fn sequence_dim(x: &BitSequence, est: &DimEstimator, tail_start: Option<usize>) -> Result<DimSeries> {
    let s = chunk_dims(x, est)?;
    dim_series_from_values(s, tail_start)
}

pub fn dim_series_from_values(chunk_values: Vec<f64>, tail_start: Option<usize>) -> Result<DimSeries> {
    let series = running_averages(&chunk_values);
    let (ts, tail) = tail_slice(&series, tail_start)?;
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DimSeries {
        final_value: *series.last().unwrap(),
        tail_min,
        tail_start: ts,
        chunk_values,
        series,
    })
}

/// Weighted distance series. Sums are formed from integer mismatch counts, so
/// `series` equals `prefix` exactly.
pub fn sequence_distance(x: &BitSequence, y: &BitSequence, tail_start: Option<usize>) -> Result<DistanceSeries> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let chunks = chunk_count(x.len());
    let mut chunk_values = Vec::with_capacity(chunks);
    let mut series = Vec::with_capacity(chunks);
    let mut prefix = Vec::with_capacity(chunks);
    let mut mismatches = 0usize;
    for j in 1..=chunks {
        let m = x.hamming_in(y, chunk_range(j));
        chunk_values.push(m as f64 / (j * j) as f64);
        mismatches += m;
        let nj = chunk_boundary(j + 1);
        series.push(mismatches as f64 / nj as f64);
        prefix.push(x.hamming_in(y, 0..nj) as f64 / nj as f64);
    }
    let (ts, tail) = tail_slice(&series, tail_start)?;
    let tail_max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DistanceSeries {
        final_value: *series.last().unwrap(),
        tail_max,
        tail_start: ts,
        chunk_values,
        series,
        prefix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn boundary_examples() {
        assert_eq!(chunk_boundary(1), 0);
        assert_eq!(chunk_boundary(4), 14);
        assert_eq!(chunk_boundary(100), 99 * 100 * 199 / 6);
        assert_eq!(chunk_boundary(100), 328_350);
    }

    #[test]
    fn boundary_increments_are_squares() {
        for j in 1..=1_000_000usize {
            assert_eq!(chunk_boundary(j + 1) - chunk_boundary(j), j * j);
        }
    }

    #[test]
    fn schedule_counts_complete_chunks() {
        assert_eq!(chunk_count(0), 0);
        assert_eq!(chunk_count(1), 1);
        assert_eq!(chunk_count(4), 1);
        assert_eq!(chunk_count(5), 2);
        let s = ChunkSchedule::for_length(1_000_000);
        assert_eq!(s.count, 143);
        assert!(s.covered_bits() <= 1_000_000);
        assert!(chunk_boundary(s.count + 2) > 1_000_000);
        assert_eq!(s.boundaries[0], 0);
    }

    #[test]
    fn estimator_specs() {
        assert_eq!("bernoulli".parse::<DimEstimator>().unwrap(), DimEstimator::BernoulliOracle);
        assert_eq!("block:8".parse::<DimEstimator>().unwrap(), DimEstimator::BlockEntropy(8));
        assert_eq!(
            "compressor:deflate".parse::<DimEstimator>().unwrap(),
            DimEstimator::Compressor("deflate".into())
        );
        assert!(matches!(
            "compressor:zstd".parse::<DimEstimator>(),
            Err(EstimatorError::UnknownCompressor(_))
        ));
        assert!(matches!("block:0".parse::<DimEstimator>(), Err(EstimatorError::BadBlockSize(0))));
        assert!("lz".parse::<DimEstimator>().is_err());
        for e in ["bernoulli", "block:3", "compressor:deflate"] {
            assert_eq!(e.parse::<DimEstimator>().unwrap().to_string(), e);
        }
    }

    #[test]
    fn unknown_compressor_is_an_error_not_a_value() {
        let c = BitSequence::zeros(16);
        let r = estimate_chunk_dim(&c, &c, &DimEstimator::Compressor("nope".into()));
        assert!(matches!(r, Err(EstimatorError::UnknownCompressor(_))));
    }

    #[test]
    fn bernoulli_oracle_examples() {
        let est = DimEstimator::BernoulliOracle;
        let empty = BitSequence::zeros(0);
        assert_eq!(estimate_chunk_dim(&BitSequence::zeros(100), &empty, &est).unwrap(), 0.0);
        let alt = BitSequence::from_bools((0..100).map(|i| i % 2 == 1));
        assert_eq!(estimate_chunk_dim(&alt, &empty, &est).unwrap(), 1.0);
    }

    #[test]
    fn block_entropy_sees_structure() {
        let est = DimEstimator::BlockEntropy(8);
        let empty = BitSequence::zeros(0);
        let alt = BitSequence::from_bools((0..10_000).map(|i| i % 2 == 1));
        assert!(estimate_chunk_dim(&alt, &empty, &est).unwrap() < 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coin = BitSequence::coin(10_000, &mut rng);
        assert!((estimate_chunk_dim(&coin, &empty, &est).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn compressor_uses_context() {
        let est = DimEstimator::Compressor("deflate".into());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let chunk = BitSequence::coin(8192, &mut rng);
        let fresh = estimate_chunk_dim(&chunk, &BitSequence::zeros(0), &est).unwrap();
        let repeat = estimate_chunk_dim(&chunk, &chunk, &est).unwrap();
        assert!(fresh > 0.95, "{fresh}");
        assert!(repeat < 0.1, "{repeat}");
        let zeros = BitSequence::zeros(8192);
        assert!(estimate_chunk_dim(&zeros, &BitSequence::zeros(0), &est).unwrap() < 0.05);
    }

    #[test]
    fn constant_values_average_to_the_constant() {
        let a = running_averages(&vec![0.37; 50]);
        assert!(a.iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn parity_values_average_to_one_half() {
        let v: Vec<f64> = (1..=400).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let a = running_averages(&v);
        for (k, x) in a.iter().enumerate() {
            let j = k + 2;
            // even squares below j over n_j, computed independently
            let even: usize = (1..j).filter(|i| i % 2 == 0).map(|i| i * i).sum();
            let expect = even as f64 / chunk_boundary(j) as f64;
            assert!((x - expect).abs() < 1e-12);
            if j > 20 {
                assert!((x - 0.5).abs() <= 2.0 / j as f64, "j={j} {x}");
            }
        }
    }

    #[test]
    fn distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = BitSequence::coin(chunk_boundary(60), &mut rng);
        let d = sequence_distance(&x, &x, None).unwrap();
        assert!(d.series.iter().all(|&v| v == 0.0));
        let d = sequence_distance(&x, &x.complement(), None).unwrap();
        assert!(d.series.iter().all(|&v| v == 1.0));
        let mut y = x.clone();
        for j in 1..=chunk_count(x.len()) {
            y.flip(chunk_boundary(j));
        }
        let d = sequence_distance(&x, &y, None).unwrap();
        for (k, v) in d.chunk_values.iter().enumerate() {
            let i = k + 1;
            assert_eq!(*v, 1.0 / (i * i) as f64);
        }
        // A_j = (j-1)/n_j
        for (k, v) in d.series.iter().enumerate() {
            let j = k + 2;
            assert!((v - (j - 1) as f64 / chunk_boundary(j) as f64).abs() < 1e-15);
        }
        assert!(d.final_value < 1e-3);
    }

    #[test]
    fn weighted_distance_equals_prefix_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = BitSequence::coin(100_000, &mut rng);
        let y = BitSequence::bernoulli(100_000, 0.2, &mut rng);
        let d = sequence_distance(&x, &y, None).unwrap();
        assert_eq!(d.series, d.prefix);
    }

    #[test]
    fn too_short_and_mismatch() {
        let x = BitSequence::zeros(30);
        assert!(matches!(
            sequence_dim(&x, &DimEstimator::BernoulliOracle, Some(50)),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            sequence_distance(&x, &BitSequence::zeros(31), None),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn bernoulli_dim_concentrates() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = 0.2;
        let x = BitSequence::bernoulli(1_000_000, p, &mut rng);
        let d = sequence_dim(&x, &DimEstimator::BernoulliOracle, None).unwrap();
        assert!((d.tail_min - h(p)).abs() < 0.02, "{}", d.tail_min);
        assert_eq!(d.series.len(), 143);
    }
}
