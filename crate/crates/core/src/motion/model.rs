use crate::geometry::{project_box, project_point, Box2D, CameraFrame, Vec3};
use crate::types::ObjectState;

use super::deep::{plstm_predict, ulstm_update, LstmMotionState, LstmWeights, VelocityHistory};
use super::kalman::{KalmanNoise, Kf2dState, Kf3dState};
use super::{MotionBackend, MotionError};

/// Recurrent motion state of one tracklet.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrack {
    pub state: LstmMotionState,
    pub history: VelocityHistory,
    /// Last refined location `P̄_{T-1}`.
    pub refined: Vec3,
    /// Location predicted for the current frame `P̃_T`.
    pub predicted: Vec3,
}

/// Backend-specific estimator owned by a tracklet.
#[derive(Debug, Clone, PartialEq)]
pub enum MotionModel {
    /// Location held at its last value.
    Static {
        position: Vec3,
    },
    /// Image-box filter; the 3D location is held.
    Kf2d {
        filter: Kf2dState,
        position: Vec3,
    },
    Kf3d(Kf3dState),
    Lstm(LstmTrack),
}

impl MotionModel {
    pub fn new(
        backend: MotionBackend,
        position: Vec3,
        depth: f64,
        box2d: &Box2D,
        noise: &KalmanNoise,
    ) -> Self {
        match backend {
            MotionBackend::None => MotionModel::Static { position },
            MotionBackend::Kf2d => MotionModel::Kf2d {
                filter: Kf2dState::new(box2d, noise),
                position,
            },
            MotionBackend::Kf3d => MotionModel::Kf3d(Kf3dState::new(position, depth, noise)),
            MotionBackend::Lstm => MotionModel::Lstm(LstmTrack {
                state: LstmMotionState::new(),
                history: VelocityHistory::new(),
                refined: position,
                predicted: position,
            }),
        }
    }

    pub fn position(&self) -> Vec3 {
        match self {
            MotionModel::Static { position } | MotionModel::Kf2d { position, .. } => *position,
            MotionModel::Kf3d(kf) => kf.position(),
            MotionModel::Lstm(l) => l.predicted,
        }
    }

    pub fn velocity(&self) -> Vec3 {
        match self {
            MotionModel::Static { .. } | MotionModel::Kf2d { .. } => Vec3::zeros(),
            MotionModel::Kf3d(kf) => kf.velocity(),
            MotionModel::Lstm(l) => l.history.latest(),
        }
    }

    /// Advances the model by one frame.
    pub fn predict(
        &mut self,
        weights: Option<&LstmWeights>,
        noise: &KalmanNoise,
    ) -> Result<(), MotionError> {
        match self {
            MotionModel::Static { .. } => {}
            MotionModel::Kf2d { filter, .. } => filter.predict(noise),
            MotionModel::Kf3d(kf) => kf.predict(noise),
            MotionModel::Lstm(l) => {
                let w = weights.ok_or(MotionError::MissingWeights)?;
                l.predicted = plstm_predict(&mut l.state, w, &l.history, l.refined);
            }
        }
        Ok(())
    }

    /// Corrects the prediction with an observed location and returns the
    /// refined one. `origin` is the current camera center.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        observed: Vec3,
        depth: f64,
        box2d: &Box2D,
        origin: Vec3,
        weights: Option<&LstmWeights>,
        noise: &KalmanNoise,
    ) -> Result<Vec3, MotionError> {
        match self {
            MotionModel::Static { position } => {
                *position = observed;
                Ok(observed)
            }
            MotionModel::Kf2d { filter, position } => {
                filter.update(box2d, noise)?;
                *position = observed;
                Ok(observed)
            }
            MotionModel::Kf3d(kf) => {
                kf.update(observed, depth, noise)?;
                Ok(kf.position())
            }
            MotionModel::Lstm(l) => {
                let w = weights.ok_or(MotionError::MissingWeights)?;
                let refined = ulstm_update(
                    &mut l.state,
                    w,
                    &mut l.history,
                    l.refined,
                    l.predicted,
                    observed,
                    origin,
                );
                l.refined = refined;
                l.predicted = refined;
                Ok(refined)
            }
        }
    }

    /// Overrides the held location of the observation-driven backends after
    /// an external blend.
    pub fn set_position(&mut self, p: Vec3) {
        if let MotionModel::Static { position } | MotionModel::Kf2d { position, .. } = self {
            *position = p;
        }
    }

    /// Accepts the prediction without an observation. `record_velocity`
    /// pushes the coasting velocity into the recurrent history.
    pub fn coast(&mut self, record_velocity: bool) {
        if let MotionModel::Lstm(l) = self {
            if record_velocity {
                l.history.push(l.predicted - l.refined);
            }
            l.refined = l.predicted;
        }
    }
}

/// A tracklet's state advanced one frame and re-projected into the current
/// camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub model: MotionModel,
    pub state: ObjectState,
    /// `M(X)` in the current frame; `None` when the box is outside the view.
    pub projected: Option<Box2D>,
    /// Box used for 2D overlap: the KF2D prediction when that backend is
    /// active, otherwise `projected`.
    pub image_box: Option<Box2D>,
}

impl Prediction {
    pub fn in_view(&self) -> bool {
        self.projected.is_some()
    }
}

/// Advances a copy of the tracklet's motion model and projects the predicted
/// box through `camera`. The caller commits `model` once the frame's
/// association is known.
pub fn predict_tracklet(
    state: &ObjectState,
    model: &MotionModel,
    weights: Option<&LstmWeights>,
    noise: &KalmanNoise,
    camera: &CameraFrame,
) -> Result<Prediction, MotionError> {
    let mut model = model.clone();
    model.predict(weights, noise)?;
    let mut next = state.clone();
    next.box3d.center = model.position();
    if !matches!(model, MotionModel::Static { .. } | MotionModel::Kf2d { .. }) {
        next.velocity = model.velocity();
    }
    next.depth = camera.depth_of(&next.box3d.center);
    if let Ok((c, _)) = project_point(&next.box3d.center, camera) {
        next.center_proj = c;
    }
    let projected = project_box(&next.box3d, camera)
        .ok()
        .filter(|b| b.area() > 0.0);
    let image_box = match &model {
        MotionModel::Kf2d { filter, .. } => {
            let b = filter.predicted_box();
            let clipped = b.intersection(&camera.intrinsics.image_rect());
            projected.and(clipped.or(projected))
        }
        _ => projected,
    };
    Ok(Prediction {
        model,
        state: next,
        projected,
        image_box,
    })
}
