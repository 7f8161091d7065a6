//! Per-tracklet motion prediction and update in world coordinates: constant
//! velocity Kalman filters over image boxes (KF2D) and 3D location (KF3D), and
//! a pair of recurrent networks that predict (P-LSTM) and refine (U-LSTM) the
//! 3D location.

mod blend;
mod deep;
mod kalman;
mod lstm;
mod model;
pub mod train;

pub use blend::blend_update;
pub use deep::{
    plstm_predict, ulstm_update, CellState, LstmMotionState, LstmWeights, VelocityHistory,
    EMBED_DIM, HEAD_HIDDEN_DIM, HIDDEN_DIM, HISTORY_LEN, LSTM_WEIGHTS_VERSION,
};
pub use kalman::{KalmanFilter, KalmanNoise, Kf2dState, Kf3dState};
pub use model::{predict_tracklet, MotionModel, Prediction};
pub use train::{
    train_lstm, window_gradient, window_loss, LinearMotionTarget, TrainReport, TrainingHyperparams,
    TrainingSample, Window,
};

use serde::{Deserialize, Serialize};

/// Motion model used by every tracklet of a tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionBackend {
    /// Last state carried forward.
    None,
    Kf2d,
    #[default]
    Kf3d,
    Lstm,
}

impl MotionBackend {
    pub fn as_str(&self) -> &'static str {
        match self {
            MotionBackend::None => "none",
            MotionBackend::Kf2d => "kf2d",
            MotionBackend::Kf3d => "kf3d",
            MotionBackend::Lstm => "lstm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(MotionBackend::None),
            "kf2d" => Some(MotionBackend::Kf2d),
            "kf3d" => Some(MotionBackend::Kf3d),
            "lstm" => Some(MotionBackend::Lstm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MotionError {
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("training loss became non-finite at step {0}")]
    DivergedTraining(usize),
    #[error("training dataset has no usable trajectory")]
    EmptyDataset,
    #[error("invalid training hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
    #[error("lstm weights are malformed: {0}")]
    MalformedWeights(&'static str),
    #[error("lstm backend requires weights")]
    MissingWeights,
}
