use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    ScenarioConfig, SimulatorError, WorldTruth, MAX_DETECTABLE_COVER, MIN_BOX_AREA,
    MIN_DETECTION_DEPTH, VISIBILITY_TIE,
};
use crate::association::detect_occlusions;
use crate::geometry::{
    camera_yaw_from_world, project_box, project_point, theta_to_alpha, Box2D, CameraFrame,
    Dimensions, Vec2,
};
use crate::types::DetectionRecord;

/// Visibility annotation of one vehicle in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleView {
    pub id: u64,
    /// Clipped projected hull, `None` behind the camera or outside the image.
    pub projected: Option<Box2D>,
    pub depth: f64,
    /// Fraction of the projected box hidden by nearer vehicles.
    pub cover: f64,
    /// In detection range, large enough and not hidden.
    pub detectable: bool,
    /// Index into the frame's detections, `None` when undetected.
    pub detection: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    pub detections: Vec<Vec<DetectionRecord>>,
    /// Per frame, one view per vehicle indexed by id.
    pub views: Vec<Vec<VehicleView>>,
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    sigma * rng.sample::<f64, _>(StandardNormal)
}

/// Emits noisy detections of the detectable vehicles. Every vehicle consumes
/// the same random draws each frame whether detected or not, so changing
/// noise levels keeps the other draws aligned.
pub fn render_detections(
    world: &WorldTruth,
    config: &ScenarioConfig,
) -> Result<Rendering, SimulatorError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let noise = &config.noise;
    let k = &config.intrinsics;
    let mut detections = Vec::with_capacity(world.frames.len());
    let mut views = Vec::with_capacity(world.frames.len());
    for (t, frame) in world.frames.iter().enumerate() {
        let camera = CameraFrame::new(*k, frame.pose);
        let mut frame_views: Vec<VehicleView> = frame
            .vehicles
            .iter()
            .map(|v| {
                let depth = camera.depth_of(&v.box3d.center);
                let projected = if depth > MIN_DEPTH_FOR_BOX {
                    project_box(&v.box3d, &camera)
                        .ok()
                        .filter(|b| b.area() > 0.0)
                } else {
                    None
                };
                VehicleView {
                    id: v.id,
                    projected,
                    depth,
                    cover: 0.0,
                    detectable: false,
                    detection: None,
                }
            })
            .collect();
        let in_view: Vec<usize> = (0..frame_views.len())
            .filter(|&i| frame_views[i].projected.is_some())
            .collect();
        let boxes: Vec<Box2D> = in_view
            .iter()
            .map(|&i| frame_views[i].projected.unwrap())
            .collect();
        let depths: Vec<f64> = in_view.iter().map(|&i| frame_views[i].depth).collect();
        for (&i, cover) in in_view
            .iter()
            .zip(detect_occlusions(&boxes, &depths, VISIBILITY_TIE))
        {
            let v = &mut frame_views[i];
            v.cover = cover;
            v.detectable = v.depth >= MIN_DETECTION_DEPTH
                && v.depth <= config.max_detection_depth
                && v.projected.unwrap().area() >= MIN_BOX_AREA
                && cover < MAX_DETECTABLE_COVER;
        }

        let mut dets = Vec::new();
        for (v, view) in frame.vehicles.iter().zip(frame_views.iter_mut()) {
            let dropped = rng.random::<f64>() < config.dropout;
            let pixel = Vec2::new(
                gauss(&mut rng, noise.pixel_sigma),
                gauss(&mut rng, noise.pixel_sigma),
            );
            let edges: [f64; 4] = core::array::from_fn(|_| gauss(&mut rng, noise.pixel_sigma));
            let depth_noise = gauss(&mut rng, noise.depth_sigma_ratio);
            let yaw_noise = gauss(&mut rng, noise.yaw_sigma);
            let dim_noise: [f64; 3] = core::array::from_fn(|_| gauss(&mut rng, noise.dim_sigma));
            let appearance: Vec<f64> = world.appearances[v.id as usize]
                .iter()
                .map(|a| a + gauss(&mut rng, noise.appearance_sigma))
                .collect();
            if !view.detectable || dropped {
                continue;
            }
            let (c, depth) =
                project_point(&v.box3d.center, &camera).expect("detectable centers are in front");
            let center_proj = c + pixel;
            let hull = view.projected.unwrap();
            let (x0, x1) = (hull.x_min + edges[0], hull.x_max + edges[1]);
            let (y0, y1) = (hull.y_min + edges[2], hull.y_max + edges[3]);
            let clip = |a: f64, b: f64, hi: f64| (a.min(b).clamp(0.0, hi), a.max(b).clamp(0.0, hi));
            let (x0, x1) = clip(x0, x1, k.image_width);
            let (y0, y1) = clip(y0, y1, k.image_height);
            let theta = camera_yaw_from_world(v.box3d.yaw, &frame.pose);
            let d = v.box3d.dims;
            view.detection = Some(dets.len());
            dets.push(DetectionRecord {
                frame: t as u64,
                box2d: Box2D {
                    x_min: x0,
                    y_min: y0,
                    x_max: x1,
                    y_max: y1,
                },
                center_proj,
                depth: (depth * (1.0 + depth_noise)).max(MIN_DETECTION_DEPTH / 2.0),
                yaw_local: crate::geometry::normalize_angle(
                    theta_to_alpha(theta, center_proj.x, k) + yaw_noise,
                ),
                dims: Dimensions::new(
                    (d.length + dim_noise[0]).max(0.1),
                    (d.width + dim_noise[1]).max(0.1),
                    (d.height + dim_noise[2]).max(0.1),
                ),
                appearance,
                score: 1.0 - 0.5 * view.cover,
            });
        }
        detections.push(dets);
        views.push(frame_views);
    }
    Ok(Rendering { detections, views })
}

/// Vehicles whose center is this close to the camera plane are not drawn.
const MIN_DEPTH_FOR_BOX: f64 = 0.5;
