use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::presets::spawn;
use super::{EgoPath, ScenarioConfig, SimulatorError, CAMERA_HEIGHT};
use crate::geometry::{Box3D, CameraPose, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: u64,
    pub box3d: Box3D,
    /// Displacement to the next frame: `P_{t+1} = P_t + velocity`.
    pub velocity: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldFrame {
    pub pose: CameraPose,
    /// Every vehicle of the scenario, indexed by id.
    pub vehicles: Vec<VehicleState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldTruth {
    pub frames: Vec<WorldFrame>,
    /// Identity appearance vector of every vehicle.
    pub appearances: Vec<Vec<f64>>,
}

/// Rolls out ego and vehicle kinematics; deterministic in the seed.
pub fn generate_world(config: &ScenarioConfig) -> Result<WorldTruth, SimulatorError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut vehicles = spawn(config, &mut rng);
    let base: Vec<f64> = (0..config.appearance_dim)
        .map(|_| rng.random::<f64>())
        .collect();
    let appearances = vehicles
        .iter()
        .map(|_| {
            base.iter()
                .map(|b| b + config.appearance_spread * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();

    let mut ego = Vec3::new(0.0, 0.0, CAMERA_HEIGHT);
    let mut heading = 0.0_f64;
    let mut centers: Vec<Vec3> = vehicles
        .iter()
        .map(|v| Vec3::new(v.position.x, v.position.y, v.dims.height / 2.0))
        .collect();
    let mut frames = Vec::with_capacity(config.frames);
    for _ in 0..config.frames {
        let pose = CameraPose::level(ego, heading);
        let mut states = Vec::with_capacity(vehicles.len());
        for (id, (v, p)) in vehicles.iter_mut().zip(centers.iter_mut()).enumerate() {
            let (s, c) = v.yaw.sin_cos();
            let velocity = Vec3::new(v.speed * c, v.speed * s, 0.0);
            let box3d = Box3D::new(*p, v.dims, v.yaw)
                .map_err(|_| SimulatorError::InvalidConfig("degenerate vehicle"))?;
            states.push(VehicleState {
                id: id as u64,
                box3d,
                velocity,
            });
            *p += velocity;
            v.yaw += v.yaw_rate;
            let next = v.speed + v.accel;
            if next > v.speed_limits[1] || next < v.speed_limits[0] {
                v.accel = -v.accel;
                v.speed = next.clamp(v.speed_limits[0], v.speed_limits[1]);
            } else {
                v.speed = next;
            }
        }
        frames.push(WorldFrame {
            pose,
            vehicles: states,
        });
        if config.ego_path != EgoPath::Static {
            let (s, c) = heading.sin_cos();
            ego += Vec3::new(config.ego_speed * c, config.ego_speed * s, 0.0);
        }
        if config.ego_path == EgoPath::Turning {
            heading += config.ego_yaw_rate;
        }
    }
    Ok(WorldTruth {
        frames,
        appearances,
    })
}
