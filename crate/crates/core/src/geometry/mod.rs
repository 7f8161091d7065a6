//! Pinhole projection, pose transforms, orientation conversion, box corners and
//! 2D / rotated-BEV 3D overlap.

mod boxes;
mod camera;
mod iou;
mod orientation;

pub use boxes::{box3d_corners, Box2D, Box3D, Dimensions};
pub use camera::{
    backproject, project_box, project_point, CameraFrame, CameraIntrinsics, CameraPose,
};
pub use iou::{bev_intersection_area, iou_2d, iou_3d};
pub use orientation::{
    alpha_to_theta, angle_diff, camera_yaw_from_world, normalize_angle, theta_to_alpha,
    world_yaw_from_camera,
};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Camera-frame depth below which a point counts as behind the camera.
pub const MIN_DEPTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point is behind the camera (camera-frame z = {0})")]
    PointBehindCamera(f64),
    #[error("every box corner is behind the camera")]
    BoxBehindCamera,
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("box dimensions must be positive")]
    InvalidDimensions,
    #[error("box extents are inverted")]
    InvertedBox,
}
