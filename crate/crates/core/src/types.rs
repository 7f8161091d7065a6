//! Records exchanged between the simulator, the tracker and the file formats.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    Box2D, Box3D, CameraFrame, CameraIntrinsics, CameraPose, Dimensions, Vec2, Vec3,
};

/// One per-frame detection as produced by a monocular 3D estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame: u64,
    pub box2d: Box2D,
    /// Projection of the 3D box center; may lie outside `box2d` for truncated
    /// or occluded objects.
    pub center_proj: Vec2,
    pub depth: f64,
    pub yaw_local: f64,
    pub dims: Dimensions,
    pub appearance: Vec<f64>,
    pub score: f64,
}

/// Per-frame object state: location, orientation, extents, appearance and
/// velocity, plus the image-space cues the association uses.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub box3d: Box3D,
    pub velocity: Vec3,
    pub appearance: Vec<f64>,
    pub center_proj: Vec2,
    pub depth: f64,
}

impl ObjectState {
    pub fn position(&self) -> Vec3 {
        self.box3d.center
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Tracked,
    Occluded,
    Lost,
}

impl TrackStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackStatus::Tracked => "tracked",
            TrackStatus::Occluded => "occluded",
            TrackStatus::Lost => "lost",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tracked" => Some(TrackStatus::Tracked),
            "occluded" => Some(TrackStatus::Occluded),
            "lost" => Some(TrackStatus::Lost),
            _ => None,
        }
    }
}

/// One tracklet's output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub frame: u64,
    pub track_id: u64,
    pub box3d: Box3D,
    pub velocity: Vec3,
    pub box2d: Box2D,
    pub status: TrackStatus,
}

/// Calibration, per-frame poses and per-frame detections of one sequence.
/// `poses[i]` and `detections[i]` belong to frame `first_frame + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput {
    pub intrinsics: CameraIntrinsics,
    pub first_frame: u64,
    pub poses: Vec<CameraPose>,
    pub detections: Vec<Vec<DetectionRecord>>,
}

impl SequenceInput {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn camera(&self, index: usize) -> CameraFrame {
        CameraFrame::new(self.intrinsics, self.poses[index])
    }

    /// Frames `[0, k)` only.
    pub fn truncated(&self, k: usize) -> SequenceInput {
        let k = k.min(self.len());
        SequenceInput {
            intrinsics: self.intrinsics,
            first_frame: self.first_frame,
            poses: self.poses[..k].to_vec(),
            detections: self.detections[..k].to_vec(),
        }
    }
}
