//! Frame-to-frame association: affinity fusion, depth-ordered overlaps,
//! Kuhn-Munkres assignment and the occlusion-aware tracklet lifecycle.

mod affinity;
mod assignment;
mod ordering;
mod tracker;

pub use affinity::{
    affinity_2d, affinity_deep, compose_affinity, deep_features, depth_filter, FeatureInput,
};
pub use assignment::{max_weight_matching, solve_assignment, AffinityMatrix, Assignment};
pub use ordering::{
    depth_layers, depth_order_overlap, detect_occlusions, doi_occluders, masked_iou, occluder_sets,
    region_area, visible_region, visible_regions,
};
pub use tracker::{run_sequence, Tracker, Tracklet};

use serde::{Deserialize, Serialize};

use crate::motion::{KalmanNoise, MotionBackend, MotionError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssociationError {
    #[error("feature length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{field} = {value} is out of range")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("motion model: {0}")]
    Motion(#[from] MotionError),
}

/// Weights of appearance, 2D overlap and 3D overlap in the composite affinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityWeights {
    pub w_deep: f64,
    pub w_2d: f64,
    pub w_3d: f64,
}

impl AffinityWeights {
    pub fn sum(&self) -> f64 {
        self.w_deep + self.w_2d + self.w_3d
    }
}

impl Default for AffinityWeights {
    fn default() -> Self {
        Self {
            w_deep: 0.3,
            w_2d: 0.0,
            w_3d: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    #[serde(alias = "w_DEEP")]
    pub w_deep: f64,
    #[serde(alias = "w_2D")]
    pub w_2d: f64,
    #[serde(alias = "w_3D")]
    pub w_3d: f64,
    pub occlusion_cover_threshold: f64,
    #[serde(alias = "max_age")]
    pub max_lost_age: u32,
    /// Allowed camera-frame depth of a tracklet, meters.
    pub range_min: f64,
    pub range_max: f64,
    pub ord_tie_meters: f64,
    pub motion_backend: MotionBackend,
    pub affinity_accept_threshold: f64,
    /// Restricts the 3D overlap to non-occluded regions and applies the
    /// depth gate.
    pub depth_ordering: bool,
    /// Unmatched tracklets covered by nearer ones enter the occluded state
    /// and keep extrapolating; otherwise every unmatched tracklet is simply
    /// lost and held in place.
    pub occlusion_aware: bool,
    pub kalman: KalmanNoise,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        let w = AffinityWeights::default();
        Self {
            w_deep: w.w_deep,
            w_2d: w.w_2d,
            w_3d: w.w_3d,
            occlusion_cover_threshold: 0.7,
            max_lost_age: 20,
            range_min: 0.15,
            range_max: 100.0,
            ord_tie_meters: 1.0,
            motion_backend: MotionBackend::Kf3d,
            affinity_accept_threshold: 0.3,
            depth_ordering: true,
            occlusion_aware: true,
            kalman: KalmanNoise::default(),
        }
    }
}

impl TrackerConfig {
    pub fn weights(&self) -> AffinityWeights {
        AffinityWeights {
            w_deep: self.w_deep,
            w_2d: self.w_2d,
            w_3d: self.w_3d,
        }
    }

    pub fn validate(&self) -> Result<(), AssociationError> {
        let unit = |field: &'static str, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(AssociationError::OutOfRange { field, value })
            }
        };
        unit("w_deep", self.w_deep)?;
        unit("w_2d", self.w_2d)?;
        unit("w_3d", self.w_3d)?;
        if !(self.weights().sum() > 0.0) {
            return Err(AssociationError::OutOfRange {
                field: "w_deep + w_2d + w_3d",
                value: self.weights().sum(),
            });
        }
        unit("occlusion_cover_threshold", self.occlusion_cover_threshold)?;
        unit("affinity_accept_threshold", self.affinity_accept_threshold)?;
        if !(self.range_min.is_finite()
            && self.range_max.is_finite()
            && self.range_min < self.range_max)
        {
            return Err(AssociationError::OutOfRange {
                field: "range_min",
                value: self.range_min,
            });
        }
        if !(self.ord_tie_meters >= 0.0 && self.ord_tie_meters.is_finite()) {
            return Err(AssociationError::OutOfRange {
                field: "ord_tie_meters",
                value: self.ord_tie_meters,
            });
        }
        let k = &self.kalman;
        // the sigma floor keeps the measurement noise positive
        if !(k.depth_noise_ratio >= 0.0 && k.depth_noise_ratio.is_finite()) {
            return Err(AssociationError::OutOfRange {
                field: "kalman.depth_noise_ratio",
                value: k.depth_noise_ratio,
            });
        }
        for (field, value) in [
            ("kalman.process_noise", k.process_noise),
            ("kalman.min_measurement_sigma", k.min_measurement_sigma),
            (
                "kalman.initial_velocity_variance",
                k.initial_velocity_variance,
            ),
            ("kalman.pixel_sigma", k.pixel_sigma),
            ("kalman.pixel_process_scale", k.pixel_process_scale),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AssociationError::OutOfRange { field, value });
            }
        }
        Ok(())
    }
}
