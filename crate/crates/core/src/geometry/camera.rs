use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{box3d_corners, Box2D, Box3D, GeometryError, Mat3, Vec2, Vec3, MIN_DEPTH};

/// Pinhole intrinsics. Pixel coordinates put the origin at the top-left image
/// corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub focal_x: f64,
    pub focal_y: f64,
    pub principal_x: f64,
    pub principal_y: f64,
    pub image_width: f64,
    pub image_height: f64,
}

impl CameraIntrinsics {
    pub fn new(
        focal_x: f64,
        focal_y: f64,
        principal_x: f64,
        principal_y: f64,
        image_width: f64,
        image_height: f64,
    ) -> Result<Self, GeometryError> {
        let k = Self {
            focal_x,
            focal_y,
            principal_x,
            principal_y,
            image_width,
            image_height,
        };
        k.validate()?;
        Ok(k)
    }

    /// Centered principal point, square pixels.
    pub fn centered(
        focal: f64,
        image_width: f64,
        image_height: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(
            focal,
            focal,
            image_width / 2.0,
            image_height / 2.0,
            image_width,
            image_height,
        )
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = [
            self.focal_x,
            self.focal_y,
            self.principal_x,
            self.principal_y,
            self.image_width,
            self.image_height,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(GeometryError::InvalidIntrinsics("non-finite value"));
        }
        if self.focal_x <= 0.0 || self.focal_y <= 0.0 {
            return Err(GeometryError::InvalidIntrinsics(
                "focal lengths must be positive",
            ));
        }
        if self.image_width <= 0.0 || self.image_height <= 0.0 {
            return Err(GeometryError::InvalidIntrinsics(
                "image size must be positive",
            ));
        }
        if !(0.0..=self.image_width).contains(&self.principal_x)
            || !(0.0..=self.image_height).contains(&self.principal_y)
        {
            return Err(GeometryError::InvalidIntrinsics(
                "principal point outside the image",
            ));
        }
        Ok(())
    }

    pub fn image_diagonal(&self) -> f64 {
        self.image_width.hypot(self.image_height)
    }

    pub fn image_rect(&self) -> Box2D {
        Box2D {
            x_min: 0.0,
            y_min: 0.0,
            x_max: self.image_width,
            y_max: self.image_height,
        }
    }
}

/// World-to-camera rigid transform: `x_cam = R x_world + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl CameraPose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        let orthonormal = (rotation.transpose() * rotation - Mat3::identity())
            .abs()
            .max()
            <= 1e-9;
        if !orthonormal
            || (rotation.determinant() - 1.0).abs() > 1e-9
            || !translation.iter().all(|v| v.is_finite())
        {
            return Err(GeometryError::InvalidRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// A level camera placed at `position` (world) looking along world yaw
    /// `heading`: camera `z` is the heading, camera `y` points down.
    pub fn level(position: Vec3, heading: f64) -> Self {
        let (s, c) = heading.sin_cos();
        #[rustfmt::skip]
        let rotation = Mat3::new(
            s, -c, 0.0,
            0.0, 0.0, -1.0,
            c, s, 0.0,
        );
        let translation = -(rotation * position);
        Self {
            rotation,
            translation,
        }
    }

    pub fn to_camera(&self, world: &Vec3) -> Vec3 {
        self.rotation * world + self.translation
    }

    pub fn to_world(&self, camera: &Vec3) -> Vec3 {
        self.rotation.transpose() * (camera - self.translation)
    }

    /// Camera optical center in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }
}

/// Intrinsics and pose of one timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
}

impl CameraFrame {
    pub fn new(intrinsics: CameraIntrinsics, pose: CameraPose) -> Self {
        Self { intrinsics, pose }
    }

    /// Camera-frame depth of a world point (may be negative).
    pub fn depth_of(&self, world: &Vec3) -> f64 {
        self.pose.to_camera(world).z
    }

    fn pixel_of(&self, cam: &Vec3) -> Vec2 {
        let k = &self.intrinsics;
        Vec2::new(
            k.focal_x * cam.x / cam.z + k.principal_x,
            k.focal_y * cam.y / cam.z + k.principal_y,
        )
    }
}

/// Projects a world point to pixel coordinates and returns its camera-frame depth.
pub fn project_point(point: &Vec3, frame: &CameraFrame) -> Result<(Vec2, f64), GeometryError> {
    let cam = frame.pose.to_camera(point);
    if !(cam.z > MIN_DEPTH) {
        return Err(GeometryError::PointBehindCamera(cam.z));
    }
    Ok((frame.pixel_of(&cam), cam.z))
}

/// Lifts a pixel at the given camera-frame depth back into world coordinates.
pub fn backproject(pixel: &Vec2, depth: f64, frame: &CameraFrame) -> Result<Vec3, GeometryError> {
    if !(depth > 0.0) {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    let k = &frame.intrinsics;
    let cam = Vec3::new(
        (pixel.x - k.principal_x) / k.focal_x * depth,
        (pixel.y - k.principal_y) / k.focal_y * depth,
        depth,
    );
    Ok(frame.pose.to_world(&cam))
}

/// Axis-aligned hull of the projected corners that lie in front of the camera,
/// clipped to the image. Boxes straddling the camera plane are truncated rather
/// than rejected; a hull entirely outside the image clips to zero area.
pub fn project_box(b: &Box3D, frame: &CameraFrame) -> Result<Box2D, GeometryError> {
    let mut hull: Option<(f64, f64, f64, f64)> = None;
    for corner in box3d_corners(b).iter() {
        let cam = frame.pose.to_camera(corner);
        if cam.z <= MIN_DEPTH {
            continue;
        }
        let px = frame.pixel_of(&cam);
        hull = Some(match hull {
            None => (px.x, px.y, px.x, px.y),
            Some((x0, y0, x1, y1)) => (x0.min(px.x), y0.min(px.y), x1.max(px.x), y1.max(px.y)),
        });
    }
    let (x0, y0, x1, y1) = hull.ok_or(GeometryError::BoxBehindCamera)?;
    let k = &frame.intrinsics;
    let clamp = |v: f64, hi: f64| v.max(0.0).min(hi);
    Ok(Box2D {
        x_min: clamp(x0, k.image_width),
        y_min: clamp(y0, k.image_height),
        x_max: clamp(x1, k.image_width),
        y_max: clamp(y1, k.image_height),
    })
}
