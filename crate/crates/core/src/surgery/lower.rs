use std::collections::HashMap;

use crate::bits::BitSequence;
use crate::error::{check_unit, Error, Result};
use crate::hamming::cover::{farthest_point_code, Codebook, NearestTable};
use crate::hamming::{seq_to_word, write_word};

/// Longest block handled by one codebook.
pub const MAX_BLOCK_BITS: usize = 20;

/// Rate allowance above the target: a block of `m` bits gets
/// `floor(2^((s + LOWER_RATE_SLACK) m))` codewords.
pub const LOWER_RATE_SLACK: f64 = 0.045;

/// `q` block lengths differing by at most one, summing to `len`, each at most
/// `max_block`.
pub fn balanced_blocks(len: usize, max_block: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let q = len.div_ceil(max_block.max(1));
    let (base, extra) = (len / q, len % q);
    (0..q).map(|i| base + usize::from(i < extra)).collect()
}

#[derive(Debug, Clone)]
pub struct BlockCover {
    /// Radius is the covering radius of the code.
    pub code: Codebook,
    pub table: NearestTable,
    /// `log2 |code|`
    pub index_bits: f64,
}

impl BlockCover {
    pub fn from_words(m: usize, words: Vec<u64>) -> Result<Self> {
        let table = NearestTable::build(m, &words)?;
        let radius = table.dist.iter().copied().max().unwrap_or(0) as usize;
        let index_bits = (words.len() as f64).log2();
        let code = Codebook::new(m, radius, words)?;
        Ok(Self {
            code,
            table,
            index_bits,
        })
    }

    /// Nearest codeword and its distance in bits.
    pub fn nearest(&self, w: u64) -> (u64, usize) {
        let i = self.table.owner[w as usize] as usize;
        (self.code.words[i], self.table.dist[w as usize] as usize)
    }
}

/// Codebooks for each block length, built on demand and cached.
#[derive(Debug, Clone)]
pub struct CoverProvider {
    pub target_s: f64,
    pub rate_slack: f64,
    pub max_block: usize,
    pub seed: u64,
    cache: HashMap<usize, BlockCover>,
}

impl CoverProvider {
    pub fn new(target_s: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            target_s: check_unit("cover target s", target_s)?,
            rate_slack: LOWER_RATE_SLACK,
            max_block: MAX_BLOCK_BITS,
            seed,
            cache: HashMap::new(),
        })
    }

    /// Codewords for blocks of `m` bits.
    pub fn size_for(&self, m: usize) -> usize {
        let bits = ((self.target_s + self.rate_slack) * m as f64).min(m as f64);
        (bits.exp2().floor() as usize).max(1)
    }

    pub fn cover(&mut self, m: usize) -> Result<&BlockCover> {
        if m == 0 || m > self.max_block {
            return Err(Error::InvalidArgument(format!("block length {m} outside 1..={}", self.max_block)));
        }
        if !self.cache.contains_key(&m) {
            let k = self.size_for(m);
            let words = farthest_point_code(m, k, self.seed ^ ((m as u64) << 32))?;
            self.cache.insert(m, BlockCover::from_words(m, words)?);
        }
        Ok(&self.cache[&m])
    }
}

/// Nearest codeword of `cover` to `chunk` (lowest index on ties).
pub fn lower_chunk(chunk: &BitSequence, target_s: f64, cover: &Codebook) -> Result<BitSequence> {
    check_unit("lower_chunk target_s", target_s)?;
    if cover.n != chunk.len() {
        return Err(Error::LengthMismatch {
            left: cover.n,
            right: chunk.len(),
        });
    }
    if chunk.len() > 64 {
        return Err(Error::InvalidArgument(format!("chunk of {} bits is longer than a word", chunk.len())));
    }
    let w = seq_to_word(chunk, 0, chunk.len());
    let (i, _) = cover.nearest(w).ok_or_else(|| Error::InvalidArgument("empty codebook".into()))?;
    let mut out = BitSequence::zeros(chunk.len());
    write_word(&mut out, 0, chunk.len(), cover.words[i]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoweredChunk {
    pub bits: BitSequence,
    /// Codeword index bits plus raw bits of reverted blocks.
    pub description_bits: f64,
    pub reverted_blocks: usize,
}

/// Replaces every block by its nearest codeword, then restores the worst
/// blocks until at most `budget` bits differ.
pub fn lower_blocks(chunk: &BitSequence, provider: &mut CoverProvider, budget: usize) -> Result<LoweredChunk> {
    let mut out = chunk.clone();
    let mut blocks = Vec::new();
    let mut start = 0;
    for m in balanced_blocks(chunk.len(), provider.max_block) {
        let cover = provider.cover(m)?;
        let (word, d) = cover.nearest(seq_to_word(chunk, start, m));
        write_word(&mut out, start, m, word);
        blocks.push((d, start, m, cover.index_bits));
        start += m;
    }
    let mut total: usize = blocks.iter().map(|b| b.0).sum();
    let mut description_bits: f64 = blocks.iter().map(|b| b.3).sum();
    let mut reverted_blocks = 0;
    if total > budget {
        blocks.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(d, s, m, bits) in &blocks {
            if total <= budget {
                break;
            }
            out.write_range(s, &chunk.slice(s..s + m));
            total -= d;
            description_bits += m as f64 - bits;
            reverted_blocks += 1;
        }
    }
    Ok(LoweredChunk {
        bits: out,
        description_bits,
        reverted_blocks,
    })
}
