use alloc::vec::Vec;

use num_traits::Float;

use super::{AffinityWeights, AssociationError};
use crate::geometry::{angle_diff, iou_2d, Box2D, CameraIntrinsics, Dimensions, Vec2};

/// `exp(-‖a - b‖₁)`.
pub fn affinity_deep(track: &[f64], det: &[f64]) -> Result<f64, AssociationError> {
    if track.len() != det.len() {
        return Err(AssociationError::LengthMismatch {
            expected: track.len(),
            found: det.len(),
        });
    }
    let l1: f64 = track.iter().zip(det).map(|(a, b)| (a - b).abs()).sum();
    Ok((-l1).exp())
}

pub fn affinity_2d(track_box: &Box2D, det_box: &Box2D) -> f64 {
    iou_2d(track_box, det_box)
}

/// Loose depth gate: the depth gap must stay below the summed footprints
/// `l + w` of both boxes.
pub fn depth_filter(
    track_depth: f64,
    track_dims: &Dimensions,
    det_depth: f64,
    det_dims: &Dimensions,
) -> bool {
    (track_depth - det_depth).abs()
        < track_dims.length + track_dims.width + det_dims.length + det_dims.width
}

/// Weighted mean of the three affinities.
pub fn compose_affinity(a_deep: f64, a_2d: f64, a_3d: f64, w: &AffinityWeights) -> f64 {
    (w.w_deep * a_deep + w.w_2d * a_2d + w.w_3d * a_3d) / w.sum()
}

/// Inputs of the deep feature vector of one object.
#[derive(Debug, Clone, Copy)]
pub struct FeatureInput<'a> {
    pub appearance: &'a [f64],
    pub dims: Dimensions,
    pub center_proj: Vec2,
    pub yaw: f64,
    pub depth: f64,
}

/// `[f_app, D / 10 m, c / image diagonal, θ / π, d / range_max]`. The yaw is
/// unwrapped to lie within π of `yaw_reference` so that the L1 distance sees
/// the shorter arc.
pub fn deep_features(
    x: &FeatureInput,
    yaw_reference: f64,
    intrinsics: &CameraIntrinsics,
    range_max: f64,
) -> Vec<f64> {
    let diag = intrinsics.image_diagonal();
    let yaw = yaw_reference + angle_diff(x.yaw, yaw_reference);
    let mut f = Vec::with_capacity(x.appearance.len() + 8);
    f.extend_from_slice(x.appearance);
    f.extend(x.dims.to_array().iter().map(|v| v / 10.0));
    f.push(x.center_proj.x / diag);
    f.push(x.center_proj.y / diag);
    f.push(yaw / core::f64::consts::PI);
    f.push(x.depth / range_max);
    f
}
