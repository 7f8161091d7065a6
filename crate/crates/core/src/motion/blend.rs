use crate::geometry::{angle_diff, Box3D, Dimensions};
use crate::types::ObjectState;

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// `s + α (s* - s)` with `α = 1 - a_deep`, applied to location, yaw (along
/// the shorter arc), dimensions, appearance and velocity. Image-space cues
/// (`center_proj`, `depth`) are taken from the observation.
pub fn blend_update(prev: &ObjectState, obs: &ObjectState, a_deep: f64) -> ObjectState {
    let alpha = 1.0 - a_deep.clamp(0.0, 1.0);
    let (p, o) = (&prev.box3d, &obs.box3d);
    let dims = Dimensions::new(
        lerp(p.dims.length, o.dims.length, alpha),
        lerp(p.dims.width, o.dims.width, alpha),
        lerp(p.dims.height, o.dims.height, alpha),
    );
    let yaw = p.yaw + alpha * angle_diff(o.yaw, p.yaw);
    let center = p.center + alpha * (o.center - p.center);
    let box3d = Box3D::new(center, dims, yaw).unwrap_or(*p);
    let appearance = if prev.appearance.len() == obs.appearance.len() {
        prev.appearance
            .iter()
            .zip(&obs.appearance)
            .map(|(a, b)| lerp(*a, *b, alpha))
            .collect()
    } else {
        obs.appearance.clone()
    };
    ObjectState {
        box3d,
        velocity: prev.velocity + alpha * (obs.velocity - prev.velocity),
        appearance,
        center_proj: obs.center_proj,
        depth: obs.depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Vec2, Vec3};
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn state(p: Vec3, yaw: f64, app: f64) -> ObjectState {
        ObjectState {
            box3d: Box3D::new(p, Dimensions::new(4.0, 1.8, 1.5), yaw).unwrap(),
            velocity: Vec3::zeros(),
            appearance: vec![app; 4],
            center_proj: Vec2::new(10.0, 20.0),
            depth: 10.0,
        }
    }

    #[test]
    fn endpoints() {
        let a = state(Vec3::new(0.0, 0.0, 0.0), 0.3, 0.1);
        let b = state(Vec3::new(1.0, 2.0, 0.0), 1.3, 0.7);
        assert_eq!(blend_update(&a, &b, 1.0).box3d, a.box3d);
        assert_eq!(blend_update(&a, &b, 1.0).appearance, a.appearance);
        let all = blend_update(&a, &b, 0.0);
        assert_abs_diff_eq!(all.box3d.center, b.box3d.center, epsilon = 1e-12);
        assert_abs_diff_eq!(all.box3d.yaw, b.box3d.yaw, epsilon = 1e-12);
        assert_abs_diff_eq!(all.appearance[0], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn partial_blend_of_location() {
        let a = state(Vec3::zeros(), 0.0, 0.0);
        let b = state(Vec3::new(1.0, 0.0, 0.0), 0.0, 0.0);
        let s = blend_update(&a, &b, 0.6);
        assert_abs_diff_eq!(s.box3d.center, Vec3::new(0.4, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn yaw_takes_the_short_way_round() {
        let a = state(Vec3::zeros(), 0.1, 0.0);
        let b = state(Vec3::zeros(), 2.0 * PI - 0.1, 0.0);
        let s = blend_update(&a, &b, 0.5);
        assert_abs_diff_eq!(angle_diff(s.box3d.yaw, 0.0), 0.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn yaw_moves_at_most_alpha_pi(y0 in 0.0..6.28f64, y1 in 0.0..6.28f64, a in 0.0..1.0f64) {
            let s = blend_update(&state(Vec3::zeros(), y0, 0.0), &state(Vec3::zeros(), y1, 0.0), a);
            let moved = angle_diff(s.box3d.yaw, y0).abs();
            prop_assert!(moved <= PI * (1.0 - a) + 1e-9);
        }
    }
}
