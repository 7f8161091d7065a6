use nalgebra::{SMatrix, SVector};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::MotionError;
use crate::geometry::{Box2D, Vec3};

/// Linear Gaussian filter with `S` state and `M` measurement dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanFilter<const S: usize, const M: usize> {
    pub mean: SVector<f64, S>,
    pub covariance: SMatrix<f64, S, S>,
}

impl<const S: usize, const M: usize> KalmanFilter<S, M> {
    pub fn new(mean: SVector<f64, S>, covariance: SMatrix<f64, S, S>) -> Self {
        Self { mean, covariance }
    }

    pub fn predict(&mut self, transition: &SMatrix<f64, S, S>, process_noise: &SMatrix<f64, S, S>) {
        self.mean = transition * self.mean;
        let p = transition * self.covariance * transition.transpose() + process_noise;
        self.covariance = (p + p.transpose()) * 0.5;
    }

    /// Joseph-form update; keeps the covariance symmetric PSD.
    pub fn update(
        &mut self,
        observation: &SVector<f64, M>,
        measurement: &SMatrix<f64, M, S>,
        measurement_noise: &SMatrix<f64, M, M>,
    ) -> Result<(), MotionError> {
        let innovation = observation - measurement * self.mean;
        let s = measurement * self.covariance * measurement.transpose() + measurement_noise;
        let s_inv = s.try_inverse().ok_or(MotionError::SingularInnovation)?;
        if !s_inv.iter().all(|v| v.is_finite()) {
            return Err(MotionError::SingularInnovation);
        }
        let gain = self.covariance * measurement.transpose() * s_inv;
        self.mean += gain * innovation;
        let i_kh = SMatrix::<f64, S, S>::identity() - gain * measurement;
        let p =
            i_kh * self.covariance * i_kh.transpose() + gain * measurement_noise * gain.transpose();
        self.covariance = (p + p.transpose()) * 0.5;
        Ok(())
    }
}

/// Noise levels shared by both filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanNoise {
    /// Velocity process noise, m²/frame² (KF3D) and px²/frame² scaled by
    /// `pixel_process_scale` (KF2D).
    pub process_noise: f64,
    /// 3D measurement sigma as a fraction of depth.
    pub depth_noise_ratio: f64,
    /// Lower bound on the 3D measurement sigma, meters.
    pub min_measurement_sigma: f64,
    /// Initial velocity variance of a newborn track, m²/frame².
    pub initial_velocity_variance: f64,
    pub pixel_sigma: f64,
    pub pixel_process_scale: f64,
}

impl Default for KalmanNoise {
    fn default() -> Self {
        Self {
            process_noise: 0.01,
            depth_noise_ratio: 0.05,
            min_measurement_sigma: 0.05,
            initial_velocity_variance: 4.0,
            pixel_sigma: 2.0,
            pixel_process_scale: 100.0,
        }
    }
}

impl KalmanNoise {
    fn measurement_sigma(&self, depth: f64) -> f64 {
        (self.depth_noise_ratio * depth.abs()).max(self.min_measurement_sigma)
    }
}

/// Constant-velocity filter over `{x, y, z, Δx, Δy, Δz}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kf3dState {
    pub filter: KalmanFilter<6, 3>,
}

impl Kf3dState {
    pub fn new(position: Vec3, depth: f64, noise: &KalmanNoise) -> Self {
        let r = noise.measurement_sigma(depth).powi(2);
        let v = noise.initial_velocity_variance;
        let mean = SVector::<f64, 6>::from_column_slice(&[
            position.x, position.y, position.z, 0.0, 0.0, 0.0,
        ]);
        let cov = SMatrix::<f64, 6, 6>::from_diagonal(&SVector::<f64, 6>::from_column_slice(&[
            r, r, r, v, v, v,
        ]));
        Self {
            filter: KalmanFilter::new(mean, cov),
        }
    }

    fn transition() -> SMatrix<f64, 6, 6> {
        let mut f = SMatrix::<f64, 6, 6>::identity();
        for i in 0..3 {
            f[(i, i + 3)] = 1.0;
        }
        f
    }

    pub fn predict(&mut self, noise: &KalmanNoise) {
        let mut q = SMatrix::<f64, 6, 6>::zeros();
        for i in 3..6 {
            q[(i, i)] = noise.process_noise;
        }
        self.filter.predict(&Self::transition(), &q);
    }

    pub fn update(
        &mut self,
        observed: Vec3,
        depth: f64,
        noise: &KalmanNoise,
    ) -> Result<(), MotionError> {
        let mut h = SMatrix::<f64, 3, 6>::zeros();
        for i in 0..3 {
            h[(i, i)] = 1.0;
        }
        let r = SMatrix::<f64, 3, 3>::identity() * noise.measurement_sigma(depth).powi(2);
        self.filter.update(
            &SVector::<f64, 3>::new(observed.x, observed.y, observed.z),
            &h,
            &r,
        )
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(
            self.filter.mean[0],
            self.filter.mean[1],
            self.filter.mean[2],
        )
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(
            self.filter.mean[3],
            self.filter.mean[4],
            self.filter.mean[5],
        )
    }
}

/// Constant-velocity filter over image boxes `{x, y, s, a, Δx, Δy, Δa}` with
/// `s` the width/height ratio and `a` the area.
#[derive(Debug, Clone, PartialEq)]
pub struct Kf2dState {
    pub filter: KalmanFilter<7, 4>,
}

impl Kf2dState {
    fn measure(b: &Box2D) -> SVector<f64, 4> {
        let c = b.center();
        let h = b.height().max(1e-3);
        SVector::<f64, 4>::new(c.x, c.y, b.width().max(1e-3) / h, b.area().max(1e-6))
    }

    fn measurement_noise(z: &SVector<f64, 4>, noise: &KalmanNoise) -> SMatrix<f64, 4, 4> {
        let px = noise.pixel_sigma.powi(2).max(1e-6);
        SMatrix::<f64, 4, 4>::from_diagonal(&SVector::<f64, 4>::new(
            px,
            px,
            1e-2 * z[2] * z[2] + 1e-6,
            1e-2 * z[3] * z[3] + 1e-6,
        ))
    }

    pub fn new(b: &Box2D, noise: &KalmanNoise) -> Self {
        let z = Self::measure(b);
        let mut mean = SVector::<f64, 7>::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&z);
        let r = Self::measurement_noise(&z, noise);
        let mut cov = SMatrix::<f64, 7, 7>::zeros();
        for i in 0..4 {
            cov[(i, i)] = r[(i, i)];
        }
        let v = noise.pixel_process_scale * 10.0;
        cov[(4, 4)] = v;
        cov[(5, 5)] = v;
        cov[(6, 6)] = 1e-2 * z[3] * z[3];
        Self {
            filter: KalmanFilter::new(mean, cov),
        }
    }

    pub fn predict(&mut self, noise: &KalmanNoise) {
        let mut f = SMatrix::<f64, 7, 7>::identity();
        f[(0, 4)] = 1.0;
        f[(1, 5)] = 1.0;
        f[(3, 6)] = 1.0;
        let q_px = noise.process_noise * noise.pixel_process_scale;
        let a = self.filter.mean[3].abs();
        let q = SMatrix::<f64, 7, 7>::from_diagonal(&SVector::<f64, 7>::from_column_slice(&[
            q_px,
            q_px,
            1e-4,
            1e-4 * a * a,
            q_px,
            q_px,
            1e-4 * a * a,
        ]));
        self.filter.predict(&f, &q);
        if self.filter.mean[3] < 1e-6 {
            self.filter.mean[3] = 1e-6;
        }
    }

    pub fn update(&mut self, b: &Box2D, noise: &KalmanNoise) -> Result<(), MotionError> {
        let z = Self::measure(b);
        let mut h = SMatrix::<f64, 4, 7>::zeros();
        for i in 0..4 {
            h[(i, i)] = 1.0;
        }
        self.filter
            .update(&z, &h, &Self::measurement_noise(&z, noise))
    }

    pub fn predicted_box(&self) -> Box2D {
        let m = &self.filter.mean;
        let (s, a) = (m[2].max(1e-6), m[3].max(1e-6));
        let w = (a * s).sqrt();
        let h = (a / s).sqrt();
        Box2D {
            x_min: m[0] - w / 2.0,
            y_min: m[1] - h / 2.0,
            x_max: m[0] + w / 2.0,
            y_max: m[1] + h / 2.0,
        }
    }
}
