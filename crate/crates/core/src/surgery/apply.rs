use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lower::{lower_blocks, CoverProvider};
use super::plan::{Strategy, SurgeryPlan};
use super::search::{flip_budget, raise_chunk, Searcher};
use crate::bits::BitSequence;
use crate::entropy::h_inv;
use crate::error::{Error, Result};
use crate::proxy::{
    chunk_range, estimate_chunk_dim, sequence_dim, sequence_distance, DimEstimator,
    CONTEXT_WINDOW,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkRecord {
    pub j: usize,
    pub s_planned: f64,
    /// Estimate of the source chunk given the constructed prefix.
    pub s_measured: f64,
    pub delta_planned: f64,
    pub delta_achieved: f64,
    pub t_planned: f64,
    pub t_achieved: f64,
    pub reverted_blocks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryReport {
    pub plan: SurgeryPlan,
    pub estimator: DimEstimator,
    pub searcher: Searcher,
    pub chunks: Vec<ChunkRecord>,
    pub dim_before: f64,
    pub dim_after: f64,
    pub distance: f64,
    pub planned_distance: f64,
    /// Distance bound the strategy is measured against.
    pub bound: f64,
    /// Description bits per bit of the lowered chunks (codeword indices plus
    /// reverted blocks); `None` for raise strategies.
    pub codebook_rate: Option<f64>,
}

impl SurgeryReport {
    pub fn slack(&self) -> f64 {
        self.bound - self.distance
    }

    pub const CHUNK_CSV_HEADER: &'static str = "j,s_j,delta_planned,delta_achieved,t_planned,t_achieved";
    pub const SUMMARY_CSV_HEADER: &'static str = "dim_before,dim_after,distance,bound,slack";

    pub fn chunk_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CHUNK_CSV_HEADER);
        for c in &self.chunks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.j, c.s_measured, c.delta_planned, c.delta_achieved, c.t_planned, c.t_achieved
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{}\n",
            Self::SUMMARY_CSV_HEADER,
            self.dim_before,
            self.dim_after,
            self.distance,
            self.bound,
            self.slack()
        )
    }

    /// The plan's text format with achieved radii and targets.
    pub fn to_text(&self) -> String {
        let p = &self.plan;
        let mut out = format!("{} {} {} {}\n", p.strategy, p.s, p.t, p.seed);
        for c in &self.chunks {
            let _ = writeln!(out, "{} {} {} {}", c.j, c.s_measured, c.delta_achieved, c.t_achieved);
        }
        out
    }
}

/// Bound the measured distance is compared with.
pub fn strategy_bound(plan: &SurgeryPlan) -> f64 {
    match plan.strategy {
        Strategy::Randomize => 0.5 - h_inv(plan.s),
        Strategy::RaiseCase1 | Strategy::RaiseCase2 => h_inv(plan.t) - h_inv(plan.s),
        Strategy::Lower => h_inv(1.0 - plan.s),
        Strategy::WeakSRandom => plan.planned_distance(),
    }
}

fn chunk_seed(seed: u64, j: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    rng.next_u64()
}

fn context_of(y: &BitSequence, start: usize, est: &DimEstimator) -> BitSequence {
    if matches!(est, DimEstimator::Compressor(_)) {
        y.slice(start.saturating_sub(CONTEXT_WINDOW)..start)
    } else {
        BitSequence::zeros(0)
    }
}

/// One left-to-right pass over the planned chunks. Bits past the last chunk
/// are copied unchanged.
///
/// Every chunk ends within its planned radius; a violation is reported as an
/// error rather than clipped. `covers` is only consulted by Lower plans and
/// defaults to a provider for the plan's target.
pub fn apply_plan(
    x: &BitSequence,
    plan: &SurgeryPlan,
    est: &DimEstimator,
    searcher: Searcher,
    covers: Option<&mut CoverProvider>,
) -> Result<(BitSequence, SurgeryReport)> {
    plan.validate()?;
    let span = plan.span();
    if x.len() < span {
        return Err(Error::TooShort {
            needed: span,
            got: x.len(),
        });
    }
    let mut own_covers = None;
    let mut covers = match (plan.strategy, covers) {
        (Strategy::Lower, Some(c)) => Some(c),
        (Strategy::Lower, None) => Some(own_covers.insert(CoverProvider::new(plan.t, plan.seed)?)),
        _ => None,
    };

    let mut y = x.clone();
    let mut records = Vec::with_capacity(plan.chunks());
    let mut lowered_bits = 0usize;
    let mut description_bits = 0.0;
    for e in &plan.entries {
        let r = chunk_range(e.j);
        let len = r.len();
        let ctx = context_of(&y, r.start, est);
        let src = x.slice(r.clone());
        let s_measured = estimate_chunk_dim(&src, &ctx, est)?;
        let (out, reverted_blocks) = match covers.as_deref_mut() {
            Some(provider) => {
                let low = lower_blocks(&src, provider, flip_budget(e.delta_j, len))?;
                lowered_bits += len;
                description_bits += low.description_bits;
                (low.bits, low.reverted_blocks)
            }
            None => {
                let target = Some(e.t_j);
                let seed = chunk_seed(plan.seed, e.j);
                (raise_chunk(&src, &ctx, e.delta_j, est, searcher, seed, target)?, 0)
            }
        };
        let flips = src.hamming(&out)?;
        let delta_achieved = flips as f64 / len as f64;
        if delta_achieved > e.delta_j {
            return Err(Error::PlanInvariant(format!(
                "chunk {} moved {delta_achieved} > planned {}",
                e.j, e.delta_j
            )));
        }
        let t_achieved = estimate_chunk_dim(&out, &ctx, est)?;
        y.write_range(r.start, &out);
        records.push(ChunkRecord {
            j: e.j,
            s_planned: e.s_j,
            s_measured,
            delta_planned: e.delta_j,
            delta_achieved,
            t_planned: e.t_j,
            t_achieved,
            reverted_blocks,
        });
    }

    let (dim_before, dim_after, distance) = if span == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let xs = x.slice(0..span);
        let ys = y.slice(0..span);
        (
            sequence_dim(&xs, est, Some(2))?.final_value,
            sequence_dim(&ys, est, Some(2))?.final_value,
            sequence_distance(&xs, &ys, Some(2))?.final_value,
        )
    };
    let report = SurgeryReport {
        plan: plan.clone(),
        estimator: est.clone(),
        searcher,
        chunks: records,
        dim_before,
        dim_after,
        distance,
        planned_distance: plan.planned_distance(),
        bound: strategy_bound(plan),
        codebook_rate: (plan.strategy == Strategy::Lower && lowered_bits > 0)
            .then(|| description_bits / lowered_bits as f64),
    };
    Ok((y, report))
}
