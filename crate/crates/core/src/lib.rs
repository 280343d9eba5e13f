//! Finite machinery for dimension and distance of binary sequences.
//!
//! * [`entropy`]: binary entropy, its inverse branch, raise profiles, and
//!   grid checks of the convexity facts used by the raise constructions.
//! * [`hamming`]: exact ball volumes, opposite spheres, set distances,
//!   covering codes.
//! * [`proxy`]: chunk schedule and computable dimension estimators.
//! * [`surgery`]: plans that move a sequence's estimated dimension within a
//!   distance budget, plus the pair-duplication coder.

pub mod bits;
pub mod entropy;
pub mod error;
pub mod hamming;
pub mod proxy;
pub mod surgery;

pub use bits::BitSequence;
pub use entropy::{
    bound_curves, buffer_schedule, case_select, chord_line, drop_profile, entropy, entropy_deriv,
    entropy_inv, raise_profile, tangent_line, uplift_gap, verify_concavity_lemma,
    verify_convexity_lemma, BoundCurves, BufferSchedule, ConvexityReport, LineFn, RaiseCase,
    UnitValue,
};
pub use error::{Error, EstimatorError, Result};
pub use proxy::{chunk_boundary, estimate_chunk_dim, sequence_dim, sequence_distance, DimEstimator};
