use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{normalize_angle, GeometryError, Vec2, Vec3};

/// Physical box extents: `length` along the heading, `width` across it,
/// `height` along world up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Dimensions {
    pub const fn new(length: f64, width: f64, height: f64) -> Self {
        Self {
            length,
            width,
            height,
        }
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    pub fn is_valid(&self) -> bool {
        self.length > 0.0
            && self.width > 0.0
            && self.height > 0.0
            && self.length.is_finite()
            && self.width.is_finite()
            && self.height.is_finite()
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.length, self.width, self.height]
    }
}

/// Oriented 3D box in world coordinates. `yaw` is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub center: Vec3,
    pub dims: Dimensions,
    pub yaw: f64,
}

impl Box3D {
    pub fn new(center: Vec3, dims: Dimensions, yaw: f64) -> Result<Self, GeometryError> {
        if !dims.is_valid() {
            return Err(GeometryError::InvalidDimensions);
        }
        Ok(Self {
            center,
            dims,
            yaw: normalize_angle(yaw),
        })
    }

    pub fn volume(&self) -> f64 {
        self.dims.volume()
    }

    /// BEV footprint corners, counter-clockwise.
    pub fn footprint(&self) -> [Vec2; 4] {
        let (s, c) = self.yaw.sin_cos();
        let hl = self.dims.length / 2.0;
        let hw = self.dims.width / 2.0;
        let offsets = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)];
        offsets.map(|(dx, dy)| {
            Vec2::new(
                self.center.x + c * dx - s * dy,
                self.center.y + s * dx + c * dy,
            )
        })
    }

    pub fn z_range(&self) -> (f64, f64) {
        let hh = self.dims.height / 2.0;
        (self.center.z - hh, self.center.z + hh)
    }
}

/// The eight corners of a box: yaw-rotated offsets `(±l/2, ±w/2, ±h/2)` about
/// the center. Bit 0 of the index selects `±l`, bit 1 `±w`, bit 2 `±h`.
pub fn box3d_corners(b: &Box3D) -> [Vec3; 8] {
    let (s, c) = b.yaw.sin_cos();
    let half = Vec3::new(b.dims.length / 2.0, b.dims.width / 2.0, b.dims.height / 2.0);
    core::array::from_fn(|i| {
        let sign = |bit: usize| if i >> bit & 1 == 0 { 1.0 } else { -1.0 };
        let (dx, dy, dz) = (sign(0) * half.x, sign(1) * half.y, sign(2) * half.z);
        b.center + Vec3::new(c * dx - s * dy, s * dx + c * dy, dz)
    })
}

/// Axis-aligned image box in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Box2D {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        if !(x_min <= x_max && y_min <= y_max) {
            return Err(GeometryError::InvertedBox);
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn intersection(&self, other: &Box2D) -> Option<Box2D> {
        let b = Box2D {
            x_min: self.x_min.max(other.x_min),
            y_min: self.y_min.max(other.y_min),
            x_max: self.x_max.min(other.x_max),
            y_max: self.y_max.min(other.y_max),
        };
        (b.x_min < b.x_max && b.y_min < b.y_max).then_some(b)
    }

    pub fn intersection_area(&self, other: &Box2D) -> f64 {
        self.intersection(other).map_or(0.0, |b| b.area())
    }
}
