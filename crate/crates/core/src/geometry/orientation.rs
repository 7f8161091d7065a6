use core::f64::consts::{PI, TAU};

use num_traits::Float;

use super::{CameraIntrinsics, CameraPose, Vec3};

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = num_traits::Euclid::rem_euclid(&a, &TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed shortest-arc difference `a - b`, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

fn ray_angle(x_c: f64, k: &CameraIntrinsics) -> f64 {
    ((x_c - k.image_width / 2.0) / k.focal_x).atan()
}

/// Camera-frame yaw from the observation angle `theta_l` and the horizontal
/// pixel position of the projected center: `θ = θ_l + atan((x_c - w/2) / f)`.
pub fn alpha_to_theta(theta_l: f64, x_c: f64, k: &CameraIntrinsics) -> f64 {
    normalize_angle(theta_l + ray_angle(x_c, k))
}

/// Inverse of [`alpha_to_theta`].
pub fn theta_to_alpha(theta: f64, x_c: f64, k: &CameraIntrinsics) -> f64 {
    normalize_angle(theta - ray_angle(x_c, k))
}

/// Converts a camera-frame yaw (rotation about camera `y`, heading
/// `(cos θ, 0, -sin θ)` in camera coordinates) to world yaw about `+z`.
pub fn world_yaw_from_camera(theta: f64, pose: &CameraPose) -> f64 {
    let (s, c) = theta.sin_cos();
    let heading = pose.rotation.transpose() * Vec3::new(c, 0.0, -s);
    normalize_angle(heading.y.atan2(heading.x))
}

/// Inverse of [`world_yaw_from_camera`] for level cameras.
pub fn camera_yaw_from_world(yaw: f64, pose: &CameraPose) -> f64 {
    let (s, c) = yaw.sin_cos();
    let heading = pose.rotation * Vec3::new(c, s, 0.0);
    normalize_angle((-heading.z).atan2(heading.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_2;
    use rand::{Rng, SeedableRng};

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::centered(1000.0, 1920.0, 1080.0).unwrap()
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(alpha_to_theta(0.0, 960.0, &k()), 0.0);
        assert_abs_diff_eq!(
            alpha_to_theta(FRAC_PI_2, 1960.0, &k()),
            3.0 * PI / 4.0,
            epsilon = 1e-12
        );
        assert_eq!(theta_to_alpha(0.0, 960.0, &k()), 0.0);
        assert_abs_diff_eq!(
            theta_to_alpha(3.0 * PI / 4.0, 1960.0, &k()),
            FRAC_PI_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn normalization_edges() {
        assert_eq!(normalize_angle(-1e-18), 0.0);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_abs_diff_eq!(angle_diff(0.1, TAU - 0.1), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_diff(TAU - 0.1, 0.1), -0.2, epsilon = 1e-12);
    }

    #[test]
    fn orientation_round_trip() {
        let mut rng = rand::rngs::SmallRng::seed_from_u64(5);
        for _ in 0..1000 {
            let theta_l = rng.random_range(-10.0..10.0);
            let x_c = rng.random_range(-500.0..2500.0);
            let back = theta_to_alpha(alpha_to_theta(theta_l, x_c, &k()), x_c, &k());
            assert!(angle_diff(back, theta_l).abs() < 1e-9);
        }
    }

    #[test]
    fn world_and_camera_yaw_are_inverse() {
        let mut rng = rand::rngs::SmallRng::seed_from_u64(6);
        for _ in 0..500 {
            let pose = CameraPose::level(
                Vec3::new(rng.random_range(-9.0..9.0), 1.0, 1.5),
                rng.random_range(0.0..TAU),
            );
            let yaw = rng.random_range(0.0..TAU);
            let back = world_yaw_from_camera(camera_yaw_from_world(yaw, &pose), &pose);
            assert!(angle_diff(back, yaw).abs() < 1e-9);
        }
        // A vehicle driving away from a forward-looking camera has KITTI yaw -π/2.
        let pose = CameraPose::level(Vec3::zeros(), 0.0);
        assert_abs_diff_eq!(
            camera_yaw_from_world(0.0, &pose),
            3.0 * FRAC_PI_2,
            epsilon = 1e-12
        );
    }
}
