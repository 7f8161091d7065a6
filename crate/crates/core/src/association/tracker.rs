use alloc::vec;
use alloc::vec::Vec;

use super::affinity::{affinity_deep, compose_affinity, deep_features, depth_filter, FeatureInput};
use super::assignment::{solve_assignment, AffinityMatrix};
use super::ordering::{doi_occluders, masked_iou, region_area, visible_regions};
use super::{AssociationError, TrackerConfig};
use crate::geometry::{
    alpha_to_theta, backproject, iou_2d, project_box, project_point, world_yaw_from_camera, Box2D,
    Box3D, CameraFrame, CameraIntrinsics, CameraPose, Vec3,
};
use crate::motion::{
    blend_update, predict_tracklet, LstmWeights, MotionBackend, MotionError, MotionModel,
    Prediction, VelocityHistory,
};
use crate::types::{DetectionRecord, ObjectState, SequenceInput, TrackRecord, TrackStatus};

/// One live trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: u64,
    pub state: ObjectState,
    pub status: TrackStatus,
    /// Unmatched frames since the last match, not counting occluded frames.
    pub age_since_match: u32,
    /// Occluded frames since the last match.
    pub occluded_frames: u32,
    /// Last five per-frame displacements of the tracklet's location.
    pub velocity_history: VelocityHistory,
    pub motion: MotionModel,
}

/// A decoded detection.
struct Observation {
    state: ObjectState,
    /// Projection of the decoded 3D box.
    projected: Box2D,
    box2d: Box2D,
}

/// Online tracker over one sequence. Each call to [`Tracker::step`] consumes
/// one frame and only sees data of that frame and its own state.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    intrinsics: CameraIntrinsics,
    weights: Option<LstmWeights>,
    tracklets: Vec<Tracklet>,
    next_id: u64,
}

fn outside(depth: f64, config: &TrackerConfig) -> bool {
    !(depth >= config.range_min && depth <= config.range_max)
}

impl Tracker {
    pub fn new(
        config: TrackerConfig,
        intrinsics: CameraIntrinsics,
        weights: Option<LstmWeights>,
    ) -> Result<Self, AssociationError> {
        config.validate()?;
        if config.motion_backend == MotionBackend::Lstm {
            weights
                .as_ref()
                .ok_or(MotionError::MissingWeights)?
                .validate()?;
        }
        Ok(Self {
            config,
            intrinsics,
            weights,
            tracklets: Vec::new(),
            next_id: 0,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn tracklets(&self) -> &[Tracklet] {
        &self.tracklets
    }

    fn decode(&self, det: &DetectionRecord, camera: &CameraFrame) -> Option<Observation> {
        if outside(det.depth, &self.config) {
            return None;
        }
        let position = backproject(&det.center_proj, det.depth, camera).ok()?;
        let theta = alpha_to_theta(det.yaw_local, det.center_proj.x, &self.intrinsics);
        let yaw = world_yaw_from_camera(theta, &camera.pose);
        let box3d = Box3D::new(position, det.dims, yaw).ok()?;
        let projected = project_box(&box3d, camera)
            .ok()
            .filter(|b| b.area() > 0.0)
            .unwrap_or(det.box2d);
        let state = ObjectState {
            box3d,
            velocity: Vec3::zeros(),
            appearance: det.appearance.clone(),
            center_proj: det.center_proj,
            depth: det.depth,
        };
        Some(Observation {
            state,
            projected,
            box2d: det.box2d,
        })
    }

    /// Associates one frame of detections and returns the records of every
    /// live tracklet, sorted by id.
    pub fn step(
        &mut self,
        frame: u64,
        pose: &CameraPose,
        detections: &[DetectionRecord],
    ) -> Result<Vec<TrackRecord>, AssociationError> {
        let config = &self.config;
        let camera = CameraFrame::new(self.intrinsics, *pose);
        let noise = config.kalman;
        let weights = self.weights.as_ref();
        let observations: Vec<Observation> = detections
            .iter()
            .filter_map(|d| self.decode(d, &camera))
            .collect();

        let predictions = self
            .tracklets
            .iter()
            .map(|t| predict_tracklet(&t.state, &t.motion, weights, &noise, &camera))
            .collect::<Result<Vec<Prediction>, MotionError>>()?;
        let rows: Vec<usize> = (0..predictions.len())
            .filter(|&i| predictions[i].in_view())
            .collect();
        let boxes: Vec<Box2D> = rows
            .iter()
            .map(|&i| predictions[i].projected.unwrap())
            .collect();
        let depths: Vec<f64> = rows.iter().map(|&i| predictions[i].state.depth).collect();
        let regions = visible_regions(&boxes, &depths, config.ord_tie_meters);
        let mut cover = vec![0.0; predictions.len()];
        for (r, &i) in rows.iter().enumerate() {
            let full = boxes[r].area();
            cover[i] = if full > 0.0 {
                (1.0 - region_area(&regions[r]) / full).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }

        let doi_occluders: Vec<Vec<Vec<Box2D>>> = if config.depth_ordering {
            observations
                .iter()
                .map(|o| doi_occluders(&boxes, &depths, o.state.depth, config.ord_tie_meters))
                .collect()
        } else {
            Vec::new()
        };
        let w = config.weights();
        let mut matrix = AffinityMatrix::new(rows.len(), observations.len());
        let mut deep = vec![0.0; rows.len() * observations.len()];
        for (r, &i) in rows.iter().enumerate() {
            let p = &predictions[i];
            let t = &self.tracklets[i];
            for (j, o) in observations.iter().enumerate() {
                let det_in = FeatureInput {
                    appearance: &o.state.appearance,
                    dims: o.state.box3d.dims,
                    center_proj: o.state.center_proj,
                    yaw: o.state.box3d.yaw,
                    depth: o.state.depth,
                };
                let track_in = FeatureInput {
                    appearance: &t.state.appearance,
                    dims: p.state.box3d.dims,
                    center_proj: p.state.center_proj,
                    yaw: p.state.box3d.yaw,
                    depth: p.state.depth,
                };
                let yaw_ref = o.state.box3d.yaw;
                let a_deep = affinity_deep(
                    &deep_features(&track_in, yaw_ref, &self.intrinsics, config.range_max),
                    &deep_features(&det_in, yaw_ref, &self.intrinsics, config.range_max),
                )?;
                let a_2d = p.image_box.map_or(0.0, |b| iou_2d(&b, &o.box2d));
                let (a_3d, kept) = if config.depth_ordering {
                    let kept = depth_filter(
                        p.state.depth,
                        &p.state.box3d.dims,
                        o.state.depth,
                        &o.state.box3d.dims,
                    );
                    (
                        if kept {
                            masked_iou(&boxes[r], &o.projected, &doi_occluders[j][r])
                        } else {
                            0.0
                        },
                        kept,
                    )
                } else {
                    (iou_2d(&boxes[r], &o.projected), true)
                };
                deep[r * observations.len() + j] = a_deep;
                matrix.set(r, j, compose_affinity(a_deep, a_2d, a_3d, &w), kept);
            }
        }
        let assignment = solve_assignment(&matrix, config.affinity_accept_threshold);
        let mut matched: Vec<Option<(usize, f64)>> = vec![None; predictions.len()];
        for &(r, j) in &assignment.pairs {
            matched[rows[r]] = Some((j, deep[r * observations.len() + j]));
        }

        let origin = camera.pose.center();
        let old = core::mem::take(&mut self.tracklets);
        let mut alive = Vec::with_capacity(old.len() + assignment.unmatched_cols.len());
        for (i, (mut t, p)) in old.into_iter().zip(predictions).enumerate() {
            let last = t.state.position();
            if let Some((j, a_deep)) = matched[i] {
                let o = &observations[j];
                let mut model = p.model;
                let refined = model.update(
                    o.state.position(),
                    o.state.depth,
                    &o.box2d,
                    origin,
                    weights,
                    &noise,
                )?;
                let mut state = blend_update(&p.state, &o.state, a_deep);
                state.box3d.center = refined;
                state.velocity = match model {
                    MotionModel::Kf3d(_) | MotionModel::Lstm(_) => model.velocity(),
                    _ => refined - last,
                };
                state.depth = camera.depth_of(&refined);
                if let Ok((c, _)) = project_point(&refined, &camera) {
                    state.center_proj = c;
                }
                t.velocity_history.push(refined - last);
                t.state = state;
                t.motion = model;
                t.status = TrackStatus::Tracked;
                t.age_since_match = 0;
                t.occluded_frames = 0;
            } else if config.occlusion_aware && cover[i] >= config.occlusion_cover_threshold {
                // features, age and velocity history stay frozen
                let mut model = p.model;
                model.coast(false);
                t.state.box3d.center = p.state.box3d.center;
                t.state.center_proj = p.state.center_proj;
                t.state.depth = p.state.depth;
                t.motion = model;
                t.status = TrackStatus::Occluded;
                t.occluded_frames += 1;
            } else if config.occlusion_aware {
                let mut model = p.model;
                model.coast(true);
                t.velocity_history.push(p.state.position() - last);
                t.state = p.state;
                t.motion = model;
                t.status = TrackStatus::Lost;
                t.age_since_match += 1;
            } else {
                t.state.depth = camera.depth_of(&last);
                t.status = TrackStatus::Lost;
                t.age_since_match += 1;
            }
            // occluded tracklets keep their age, so only range ends them
            let dead = t.age_since_match > config.max_lost_age
                || outside(camera.depth_of(&t.state.position()), config);
            if !dead {
                alive.push(t);
            }
        }
        for &j in &assignment.unmatched_cols {
            let o = &observations[j];
            let motion = MotionModel::new(
                config.motion_backend,
                o.state.position(),
                o.state.depth,
                &o.box2d,
                &noise,
            );
            alive.push(Tracklet {
                id: self.next_id,
                state: o.state.clone(),
                status: TrackStatus::Tracked,
                age_since_match: 0,
                occluded_frames: 0,
                velocity_history: VelocityHistory::new(),
                motion,
            });
            self.next_id += 1;
        }
        self.tracklets = alive;
        let empty = Box2D {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 0.0,
            y_max: 0.0,
        };
        Ok(self
            .tracklets
            .iter()
            .map(|t| TrackRecord {
                frame,
                track_id: t.id,
                box3d: t.state.box3d,
                velocity: t.state.velocity,
                box2d: project_box(&t.state.box3d, &camera).unwrap_or(empty),
                status: t.status,
            })
            .collect())
    }
}

/// Runs a fresh tracker over a whole sequence.
pub fn run_sequence(
    config: &TrackerConfig,
    weights: Option<&LstmWeights>,
    seq: &SequenceInput,
) -> Result<Vec<TrackRecord>, AssociationError> {
    let mut tracker = Tracker::new(config.clone(), seq.intrinsics, weights.cloned())?;
    let mut out = Vec::new();
    for (i, (pose, dets)) in seq.poses.iter().zip(&seq.detections).enumerate() {
        out.extend(tracker.step(seq.first_frame + i as u64, pose, dets)?);
    }
    Ok(out)
}
