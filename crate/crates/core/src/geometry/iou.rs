use alloc::vec::Vec;

use super::{Box2D, Box3D, Vec2};

const COLLINEAR_EPS: f64 = 1e-12;

/// Intersection over union of two image boxes. Degenerate pairs score 0.
pub fn iou_2d(a: &Box2D, b: &Box2D) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

fn cross(o: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (p, q) = (&poly[i], &poly[(i + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum();
    twice.abs() / 2.0
}

/// Clips convex polygon `subject` against the convex counter-clockwise polygon
/// `clip`, one half-plane at a time.
fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = core::mem::take(&mut out);
        for j in 0..input.len() {
            let p = input[j];
            let q = input[(j + 1) % input.len()];
            let dp = cross(&a, &b, &p);
            let dq = cross(&a, &b, &q);
            let p_in = dp >= -COLLINEAR_EPS;
            let q_in = dq >= -COLLINEAR_EPS;
            if p_in {
                out.push(p);
            }
            if p_in != q_in {
                let denom = dp - dq;
                if denom.abs() > COLLINEAR_EPS {
                    let t = dp / denom;
                    out.push(p + (q - p) * t);
                }
            }
        }
    }
    out
}

/// Area of the overlap of the two boxes' bird's-eye-view footprints.
pub fn bev_intersection_area(a: &Box3D, b: &Box3D) -> f64 {
    let (fa, fb) = (a.footprint(), b.footprint());
    let area = polygon_area(&clip_convex(&fa, &fb));
    let cap = (a.dims.length * a.dims.width).min(b.dims.length * b.dims.width);
    area.clamp(0.0, cap)
}

/// Rotated 3D IoU: BEV overlap area times vertical overlap, over the union volume.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let (a0, a1) = a.z_range();
    let (b0, b1) = b.z_range();
    let dz = a1.min(b1) - a0.max(b0);
    if dz <= 0.0 {
        return 0.0;
    }
    let inter = bev_intersection_area(a, b) * dz;
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}
