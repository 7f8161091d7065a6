//! CLEAR-MOT tracking metrics, object-level depth metrics, orientation /
//! dimension / center scores and 3D-IoU average precision.

mod ap;
mod clear;
mod depth;
mod scores;

pub use ap::{ap_3d, average_precision_11, ScoredBox};
pub use clear::{
    compute_clear, evaluate_sequence, match_frame, tracked_by_frame, ClearReport, EvalObject,
    FrameMatching, Gate, MatchPair,
};
pub use depth::{depth_metrics, DepthMetrics};
pub use scores::{center_score, dimension_score, orientation_score};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no matched pairs to evaluate")]
    EmptyInput,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("depths must be positive")]
    NonPositiveDepth,
    #[error("predicted box has zero width or height")]
    DegenerateBox,
}
