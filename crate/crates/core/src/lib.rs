//! Online 3D multi-object tracking of vehicles from monocular detections.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic piece of the
//! tracker: camera geometry, the association engine and tracklet lifecycle,
//! Kalman and recurrent motion models, CLEAR-style metrics and a deterministic
//! scenario simulator. File formats and the command line live in the `mono3dt`
//! companion crate.
//!
//! Conventions: the world frame is right-handed with `+z` up, yaw rotates `+x`
//! toward `+y`. Camera frames follow the usual pinhole layout (`x` right, `y`
//! down, `z` forward). Lengths are meters, angles radians, velocities meters
//! per frame.

#![no_std]
// Float methods come from `num_traits::Float` (libm) in no_std builds; when
// std is linked its inherent methods shadow the trait.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod association;
pub mod geometry;
pub mod metrics;
pub mod motion;
pub mod simulator;
pub mod types;

pub use association::{Tracker, TrackerConfig};
pub use geometry::{Box2D, Box3D, CameraFrame, CameraIntrinsics, CameraPose, Dimensions};
pub use types::{DetectionRecord, ObjectState, TrackRecord, TrackStatus};
