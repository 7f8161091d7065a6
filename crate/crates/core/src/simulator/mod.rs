//! Deterministic synthetic driving scenarios: ground-truth trajectories, ego
//! poses and noisy monocular detections with occlusion effects.
//!
//! The ground is flat, every vehicle center sits at half its height. Vehicles
//! move with `P_{t+1} = P_t + ΔP_t`, where `ΔP_t` follows constant speed and
//! turn rate, optionally with a bounded acceleration that reverses at the
//! speed limits. Visibility uses the same box painter's rule as the tracker.

mod presets;
mod render;
mod world;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{CameraIntrinsics, Vec3};
use crate::motion::{KalmanNoise, TrainingSample};
use crate::types::{DetectionRecord, SequenceInput, TrackRecord, TrackStatus};

pub use render::{render_detections, Rendering, VehicleView};
pub use world::{generate_world, VehicleState, WorldFrame, WorldTruth};

/// Camera height above the ground, meters.
pub const CAMERA_HEIGHT: f64 = 1.5;
/// Depth-tie tolerance of the visibility painter, meters.
pub const VISIBILITY_TIE: f64 = 1.0;
/// Vehicles covered at least this much are not detected.
pub const MAX_DETECTABLE_COVER: f64 = 0.95;
/// Boxes smaller than this many pixels are not detected.
pub const MIN_BOX_AREA: f64 = 256.0;
/// Nearest detectable center depth, meters.
pub const MIN_DETECTION_DEPTH: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulatorError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Multi-lane traffic ahead of a driving ego vehicle.
    OpenRoad,
    /// A car crossing behind a parked truck, fully hidden for several frames.
    CrossingOcclusion,
    /// Two vehicles crossing each other's line of sight at different depths.
    Reappearance,
    /// Queues of similar-looking cars crossing the view at several depths.
    Dense,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::OpenRoad,
        Preset::CrossingOcclusion,
        Preset::Reappearance,
        Preset::Dense,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::OpenRoad => "open_road",
            Preset::CrossingOcclusion => "crossing_occlusion",
            Preset::Reappearance => "reappearance",
            Preset::Dense => "dense",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EgoPath {
    Static,
    Straight,
    Turning,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Pixel σ of the projected center and the box edges.
    pub pixel_sigma: f64,
    /// Depth σ as a fraction of the true depth.
    pub depth_sigma_ratio: f64,
    /// Orientation σ, radians.
    pub yaw_sigma: f64,
    /// Per-dimension σ, meters.
    pub dim_sigma: f64,
    /// Per-component appearance σ.
    pub appearance_sigma: f64,
}

impl NoiseConfig {
    pub const NONE: NoiseConfig = NoiseConfig {
        pixel_sigma: 0.0,
        depth_sigma_ratio: 0.0,
        yaw_sigma: 0.0,
        dim_sigma: 0.0,
        appearance_sigma: 0.0,
    };
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            pixel_sigma: 1.0,
            depth_sigma_ratio: 0.05,
            yaw_sigma: 0.05,
            dim_sigma: 0.1,
            appearance_sigma: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub seed: u64,
    pub frames: usize,
    pub n_vehicles: usize,
    pub ego_path: EgoPath,
    /// Ego speed, meters per frame.
    pub ego_speed: f64,
    /// Ego turn rate for [`EgoPath::Turning`], radians per frame.
    pub ego_yaw_rate: f64,
    /// Vehicle speed range, meters per frame.
    pub speed_range: [f64; 2],
    /// Vehicle turn-rate range, radians per frame.
    pub yaw_rate_range: [f64; 2],
    /// Magnitude range of the vehicle acceleration, meters per frame².
    pub accel_range: [f64; 2],
    pub noise: NoiseConfig,
    /// Probability of dropping a detectable vehicle's detection.
    pub dropout: f64,
    pub appearance_dim: usize,
    /// Spread of identity appearance vectors around the scenario's shared base.
    pub appearance_spread: f64,
    /// Vehicles spawn within this distance of the ego start, meters.
    pub spawn_radius: f64,
    /// Farthest detectable center depth, meters.
    pub max_detection_depth: f64,
    pub intrinsics: CameraIntrinsics,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(Preset::OpenRoad, 0)
    }
}

impl ScenarioConfig {
    /// Defaults of a preset: 1920×1080 images with f = 1000 px.
    pub fn preset(preset: Preset, seed: u64) -> Self {
        let base = ScenarioConfig {
            preset,
            seed,
            frames: 100,
            n_vehicles: 5,
            ego_path: EgoPath::Straight,
            ego_speed: 1.0,
            ego_yaw_rate: 0.0,
            speed_range: [0.85, 1.15],
            yaw_rate_range: [0.0, 0.0],
            accel_range: [0.0, 0.0],
            noise: NoiseConfig::default(),
            dropout: 0.0,
            appearance_dim: 16,
            appearance_spread: 0.25,
            spawn_radius: 120.0,
            max_detection_depth: 90.0,
            intrinsics: CameraIntrinsics::centered(1000.0, 1920.0, 1080.0)
                .expect("valid default intrinsics"),
        };
        match preset {
            Preset::OpenRoad => base,
            Preset::CrossingOcclusion => ScenarioConfig {
                n_vehicles: 2,
                ego_path: EgoPath::Static,
                ego_speed: 0.0,
                speed_range: [1.3, 1.7],
                ..base
            },
            Preset::Reappearance => ScenarioConfig {
                n_vehicles: 2,
                ego_path: EgoPath::Static,
                ego_speed: 0.0,
                speed_range: [0.9, 1.1],
                ..base
            },
            Preset::Dense => ScenarioConfig {
                n_vehicles: 16,
                ego_path: EgoPath::Static,
                ego_speed: 0.0,
                speed_range: [0.8, 1.4],
                appearance_spread: 0.03,
                ..base
            },
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise = NoiseConfig::NONE;
        self.dropout = 0.0;
        self
    }

    /// Kalman noise whose 3D measurement model matches this scenario's sensor.
    pub fn matched_kalman_noise(&self, base: KalmanNoise) -> KalmanNoise {
        KalmanNoise {
            depth_noise_ratio: self.noise.depth_sigma_ratio,
            ..base
        }
    }

    pub fn validate(&self) -> Result<(), SimulatorError> {
        let err = |m| Err(SimulatorError::InvalidConfig(m));
        let n = &self.noise;
        let sigmas = [
            n.pixel_sigma,
            n.depth_sigma_ratio,
            n.yaw_sigma,
            n.dim_sigma,
            n.appearance_sigma,
        ];
        if !sigmas.iter().all(|s| s.is_finite() && *s >= 0.0) {
            return err("noise σ must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return err("dropout must lie in [0, 1)");
        }
        if self.frames == 0 {
            return err("frames must be at least 1");
        }
        if self.appearance_dim == 0 {
            return err("appearance_dim must be at least 1");
        }
        for r in [self.speed_range, self.yaw_rate_range, self.accel_range] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return err("ranges must be finite with min <= max");
            }
        }
        if self.speed_range[0] < 0.0 || self.accel_range[0] < 0.0 {
            return err("speeds and acceleration magnitudes must be non-negative");
        }
        let scalars = [
            self.ego_speed,
            self.ego_yaw_rate,
            self.appearance_spread,
            self.spawn_radius,
            self.max_detection_depth,
        ];
        if !scalars.iter().all(|v| v.is_finite())
            || self.ego_speed < 0.0
            || self.appearance_spread < 0.0
        {
            return err("ego speed and appearance spread must be finite and non-negative");
        }
        if self.spawn_radius <= 0.0 || self.max_detection_depth <= MIN_DETECTION_DEPTH {
            return err("spawn radius and detection depth must be positive");
        }
        self.intrinsics
            .validate()
            .map_err(|_| SimulatorError::InvalidConfig("invalid intrinsics"))
    }
}

/// A generated world together with its rendered detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub world: WorldTruth,
    pub rendering: Rendering,
}

/// Generates and renders a scenario; deterministic in the config.
pub fn simulate(config: &ScenarioConfig) -> Result<Scenario, SimulatorError> {
    let world = generate_world(config)?;
    let rendering = render_detections(&world, config)?;
    Ok(Scenario {
        config: config.clone(),
        world,
        rendering,
    })
}

impl Scenario {
    pub fn sequence(&self) -> SequenceInput {
        SequenceInput {
            intrinsics: self.config.intrinsics,
            first_frame: 0,
            poses: self.world.frames.iter().map(|f| f.pose).collect(),
            detections: self.rendering.detections.clone(),
        }
    }

    pub fn detections(&self) -> &[Vec<DetectionRecord>] {
        &self.rendering.detections
    }

    /// Ground-truth records of the detectable vehicles of every frame, with the
    /// vehicle id as track id and the full projected box.
    pub fn ground_truth(&self) -> Vec<Vec<TrackRecord>> {
        self.world
            .frames
            .iter()
            .zip(&self.rendering.views)
            .enumerate()
            .map(|(t, (frame, views))| {
                frame
                    .vehicles
                    .iter()
                    .zip(views)
                    .filter(|(_, v)| v.detectable)
                    .map(|(veh, v)| TrackRecord {
                        frame: t as u64,
                        track_id: veh.id,
                        box3d: veh.box3d,
                        velocity: veh.velocity,
                        box2d: v.projected.expect("detectable vehicles project"),
                        status: TrackStatus::Tracked,
                    })
                    .collect()
            })
            .collect()
    }

    /// Motion-model training samples: one per run of consecutive detections of
    /// a vehicle, pairing the decoded detection centers with the true centers.
    pub fn training_samples(&self) -> Vec<TrainingSample> {
        let n = self.world.frames.first().map_or(0, |f| f.vehicles.len());
        let mut out = Vec::new();
        for vid in 0..n {
            let mut run: (Vec<Vec3>, Vec<Vec3>, Vec<Vec3>) = (Vec::new(), Vec::new(), Vec::new());
            for (t, frame) in self.world.frames.iter().enumerate() {
                let observed = self.rendering.views[t][vid].detection.and_then(|k| {
                    let d = &self.rendering.detections[t][k];
                    let camera =
                        crate::geometry::CameraFrame::new(self.config.intrinsics, frame.pose);
                    crate::geometry::backproject(&d.center_proj, d.depth, &camera).ok()
                });
                match observed {
                    Some(p) => {
                        run.0.push(p);
                        run.1.push(frame.vehicles[vid].box3d.center);
                        run.2.push(frame.pose.center());
                    }
                    None => flush(&mut run, &mut out),
                }
            }
            flush(&mut run, &mut out);
        }
        out
    }
}

fn flush(run: &mut (Vec<Vec3>, Vec<Vec3>, Vec<Vec3>), out: &mut Vec<TrainingSample>) {
    let (o, g, c) = core::mem::take(run);
    if o.len() >= 2 {
        out.push(TrainingSample::new(o, g, c).expect("runs have equal lengths"));
    }
}
