//! Initial vehicle layouts of the presets, relative to the ego start at the
//! origin looking along `+x`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Preset, ScenarioConfig};
use crate::geometry::{Dimensions, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Spawn {
    pub position: Vec2,
    pub yaw: f64,
    pub speed: f64,
    pub yaw_rate: f64,
    /// Signed acceleration; flips sign at the speed limits.
    pub accel: f64,
    pub speed_limits: [f64; 2],
    pub dims: Dimensions,
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[1] > r[0] {
        rng.random_range(r[0]..r[1])
    } else {
        r[0]
    }
}

fn car(rng: &mut ChaCha8Rng) -> Dimensions {
    Dimensions::new(
        rng.random_range(4.2..4.8),
        rng.random_range(1.7..1.9),
        rng.random_range(1.4..1.6),
    )
}

fn parked(position: Vec2, yaw: f64, dims: Dimensions) -> Spawn {
    Spawn {
        position,
        yaw,
        speed: 0.0,
        yaw_rate: 0.0,
        accel: 0.0,
        speed_limits: [0.0, 0.0],
        dims,
    }
}

/// Shared kinematics of one lane, so vehicles of a lane keep their gaps.
struct Lane {
    y: f64,
    yaw: f64,
    x0: f64,
    speed: f64,
    yaw_rate: f64,
    accel: f64,
    limits: [f64; 2],
}

impl Lane {
    fn draw(
        rng: &mut ChaCha8Rng,
        config: &ScenarioConfig,
        y: f64,
        yaw: f64,
        x0: [f64; 2],
        min_speed: f64,
    ) -> Lane {
        let limits = [
            config.speed_range[0].max(min_speed),
            config.speed_range[1].max(min_speed),
        ];
        let speed = uniform(rng, limits);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        Lane {
            y,
            yaw,
            x0: uniform(rng, [x0[0], x0[1].min(config.spawn_radius)]),
            speed,
            yaw_rate: uniform(rng, config.yaw_rate_range),
            accel: sign * uniform(rng, config.accel_range),
            limits,
        }
    }

    fn spawn(&self, rng: &mut ChaCha8Rng, x: f64) -> Spawn {
        Spawn {
            position: Vec2::new(x, self.y),
            yaw: self.yaw,
            speed: self.speed,
            yaw_rate: self.yaw_rate,
            accel: self.accel,
            speed_limits: self.limits,
            dims: car(rng),
        }
    }
}

pub(crate) fn spawn(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<Spawn> {
    match config.preset {
        Preset::OpenRoad => open_road(config, rng),
        Preset::CrossingOcclusion => crossing(config, rng),
        Preset::Reappearance => reappearance(config, rng),
        Preset::Dense => dense(config, rng),
    }
}

fn open_road(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<Spawn> {
    const LANES: [f64; 5] = [0.0, -3.5, 3.5, -7.0, 7.0];
    let lanes: Vec<Lane> = LANES
        .iter()
        .map(|&y| {
            // the ego lane never closes in on the camera
            let min_speed = if y == 0.0 { config.ego_speed } else { 0.0 };
            Lane::draw(rng, config, y, 0.0, [15.0, 40.0], min_speed)
        })
        .collect();
    (0..config.n_vehicles)
        .map(|i| {
            let lane = &lanes[i % LANES.len()];
            let x = (lane.x0 + 25.0 * (i / LANES.len()) as f64).min(config.spawn_radius);
            lane.spawn(rng, x)
        })
        .collect()
}

/// Cross traffic in front of a parked ego: lanes perpendicular to the view at
/// increasing depth with alternating directions, each with a queue of cars.
fn dense(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<Spawn> {
    const LANES: [f64; 4] = [18.0, 25.0, 32.0, 39.0];
    let lanes: Vec<(f64, f64)> = LANES
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let dir = if k % 2 == 0 { 1.0 } else { -1.0 };
            (x + rng.random_range(-1.0..1.0), dir)
        })
        .collect();
    let mut next = [0.0; LANES.len()];
    for n in next.iter_mut() {
        *n = rng.random_range(-25.0..-5.0);
    }
    (0..config.n_vehicles)
        .map(|i| {
            let k = i % LANES.len();
            let (x, dir) = lanes[k];
            let offset = next[k];
            next[k] -= rng.random_range(12.0..22.0);
            let speed = uniform(rng, config.speed_range);
            let accel =
                uniform(rng, config.accel_range) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Spawn {
                position: Vec2::new(x, dir * offset),
                yaw: dir * FRAC_PI_2,
                speed,
                yaw_rate: uniform(rng, config.yaw_rate_range),
                accel,
                speed_limits: config.speed_range,
                dims: car(rng),
            }
        })
        .collect()
}

fn background(config: &ScenarioConfig, rng: &mut ChaCha8Rng, out: &mut Vec<Spawn>) {
    while out.len() < config.n_vehicles {
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = Vec2::new(
            rng.random_range(45.0..70.0_f64).min(config.spawn_radius),
            side * rng.random_range(10.0..20.0),
        );
        let dims = car(rng);
        out.push(parked(p, 0.0, dims));
    }
}

fn crossing(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<Spawn> {
    let truck = parked(
        Vec2::new(
            15.0 + rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
        FRAC_PI_2,
        Dimensions::new(8.0, 2.5, 3.5),
    );
    let speed = uniform(rng, config.speed_range);
    let crossing = Spawn {
        position: Vec2::new(
            30.0 + rng.random_range(-2.0..2.0),
            -22.0 + rng.random_range(-1.0..1.0),
        ),
        yaw: FRAC_PI_2,
        speed,
        yaw_rate: 0.0,
        accel: 0.0,
        speed_limits: [speed, speed],
        dims: car(rng),
    };
    let mut out: Vec<Spawn> = [truck, crossing]
        .into_iter()
        .take(config.n_vehicles)
        .collect();
    background(config, rng, &mut out);
    out
}

fn reappearance(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<Spawn> {
    let (s_near, s_far) = (
        uniform(rng, config.speed_range),
        uniform(rng, config.speed_range),
    );
    let near = Spawn {
        position: Vec2::new(
            15.0 + rng.random_range(-1.0..1.0),
            -10.0 + rng.random_range(-1.0..1.0),
        ),
        yaw: FRAC_PI_2,
        speed: s_near,
        yaw_rate: 0.0,
        accel: 0.0,
        speed_limits: [s_near, s_near],
        dims: Dimensions::new(5.5, 2.0, 2.2),
    };
    let far = Spawn {
        position: Vec2::new(
            35.0 + rng.random_range(-2.0..2.0),
            20.0 + rng.random_range(-1.0..1.0),
        ),
        yaw: -FRAC_PI_2,
        speed: s_far,
        yaw_rate: 0.0,
        accel: 0.0,
        speed_limits: [s_far, s_far],
        dims: car(rng),
    };
    let mut out: Vec<Spawn> = [near, far].into_iter().take(config.n_vehicles).collect();
    background(config, rng, &mut out);
    out
}
