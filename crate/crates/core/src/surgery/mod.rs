//! Chunk-by-chunk constructions that move a sequence's estimated dimension
//! while keeping every chunk within a planned Hamming radius.
//!
//! A [`SurgeryPlan`] fixes, for each chunk `j`, a target `t_j` and radius
//! `delta_j`; [`apply_plan`] realizes it in one left-to-right pass. The
//! duplication coder and the tight-pair builder are standalone.

mod apply;
mod duplication;
mod lower;
mod plan;
mod search;
mod tight;

pub use apply::{apply_plan, strategy_bound, ChunkRecord, SurgeryReport};
pub use duplication::{duplication_decode, duplication_encode, header_width, DuplicationDescription};
pub use lower::{
    balanced_blocks, lower_blocks, lower_chunk, BlockCover, CoverProvider, LoweredChunk, LOWER_RATE_SLACK,
    MAX_BLOCK_BITS,
};
pub use plan::{
    check_raise_budget, default_eps, default_eps_seq, plan_identity, plan_lower, plan_randomize, plan_raise,
    plan_weak_srandom, PlanEntry, Strategy, SurgeryPlan, DEFAULT_EPS_MIN,
};
pub use search::{flip_budget, raise_chunk, Searcher, RANDOM_FILL_ATTEMPTS, STEEPEST_EVALS_PER_BIT};
pub use tight::{build_tight_pair, TightBlockCode, TightPairReport};
