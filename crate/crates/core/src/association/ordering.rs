//! Painter's-algorithm layering of projected tracklet boxes.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{iou_2d, Box2D};

/// Layer index of every depth: sorted front to back, a new layer starts when a
/// depth exceeds the first depth of the current layer by more than `tie`.
/// Members of one layer never occlude each other.
pub fn depth_layers(depths: &[f64], tie: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..depths.len()).collect();
    order.sort_by(|&a, &b| depths[a].total_cmp(&depths[b]).then(a.cmp(&b)));
    let mut layers = vec![0; depths.len()];
    let mut layer = 0;
    let mut start = f64::NEG_INFINITY;
    for (rank, &i) in order.iter().enumerate() {
        if rank == 0 {
            start = depths[i];
        } else if depths[i] - start > tie {
            layer += 1;
            start = depths[i];
        }
        layers[i] = layer;
    }
    layers
}

/// Part of `target` not covered by any occluder, as disjoint rectangles.
pub fn visible_region(target: &Box2D, occluders: &[Box2D]) -> Vec<Box2D> {
    let clipped: Vec<Box2D> = occluders
        .iter()
        .filter_map(|o| o.intersection(target))
        .filter(|o| o.area() > 0.0)
        .collect();
    if clipped.is_empty() {
        return if target.area() > 0.0 {
            vec![*target]
        } else {
            Vec::new()
        };
    }
    let mut xs = vec![target.x_min, target.x_max];
    let mut ys = vec![target.y_min, target.y_max];
    for o in &clipped {
        xs.extend([o.x_min, o.x_max]);
        ys.extend([o.y_min, o.y_max]);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut cells = Vec::new();
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let (cx, cy) = ((xw[0] + xw[1]) / 2.0, (yw[0] + yw[1]) / 2.0);
            let covered = clipped
                .iter()
                .any(|o| o.x_min <= cx && cx <= o.x_max && o.y_min <= cy && cy <= o.y_max);
            if !covered {
                cells.push(Box2D {
                    x_min: xw[0],
                    y_min: yw[0],
                    x_max: xw[1],
                    y_max: yw[1],
                });
            }
        }
    }
    cells
}

pub fn region_area(region: &[Box2D]) -> f64 {
    region.iter().map(Box2D::area).sum()
}

/// Overlap of a tracklet box and a detection on the pixels not claimed by
/// `occluders`: IoU of `target ∖ occluders` and `detection ∖ occluders`,
/// capped by the plain IoU so occlusion can only lower the overlap.
pub fn masked_iou(target: &Box2D, detection: &Box2D, occluders: &[Box2D]) -> f64 {
    let Some(common) = target.intersection(detection) else {
        return 0.0;
    };
    let inter = region_area(&visible_region(&common, occluders));
    if inter <= 0.0 {
        return 0.0;
    }
    let union = region_area(&visible_region(target, occluders))
        + region_area(&visible_region(detection, occluders))
        - inter;
    (inter / union)
        .min(iou_2d(target, detection))
        .clamp(0.0, 1.0)
}

/// Boxes in strictly nearer layers than each box.
pub fn occluder_sets(boxes: &[Box2D], depths: &[f64], tie: f64) -> Vec<Vec<Box2D>> {
    let layers = depth_layers(depths, tie);
    (0..boxes.len())
        .map(|i| {
            (0..boxes.len())
                .filter(|&j| layers[j] < layers[i])
                .map(|j| boxes[j])
                .collect()
        })
        .collect()
}

/// Visible region of every box given the boxes in strictly nearer layers.
pub fn visible_regions(boxes: &[Box2D], depths: &[f64], tie: f64) -> Vec<Vec<Box2D>> {
    occluder_sets(boxes, depths, tie)
        .iter()
        .zip(boxes)
        .map(|(o, b)| visible_region(b, o))
        .collect()
}

/// Occluders of each box seen from a detection at `detection_depth`: boxes
/// layered by depth distance to the detection, nearest layer claiming first.
pub fn doi_occluders(
    boxes: &[Box2D],
    depths: &[f64],
    detection_depth: f64,
    tie: f64,
) -> Vec<Vec<Box2D>> {
    let distance: Vec<f64> = depths.iter().map(|d| (d - detection_depth).abs()).collect();
    occluder_sets(boxes, &distance, tie)
}

/// Depth-ordered overlap of a detection with each tracklet box.
pub fn depth_order_overlap(
    boxes: &[Box2D],
    depths: &[f64],
    detection: &Box2D,
    detection_depth: f64,
    tie: f64,
) -> Vec<f64> {
    doi_occluders(boxes, depths, detection_depth, tie)
        .iter()
        .zip(boxes)
        .map(|(o, b)| masked_iou(b, detection, o))
        .collect()
}

/// Fraction of each box covered by the union of boxes in strictly nearer layers.
pub fn detect_occlusions(boxes: &[Box2D], depths: &[f64], tie: f64) -> Vec<f64> {
    visible_regions(boxes, depths, tie)
        .iter()
        .zip(boxes)
        .map(|(r, b)| {
            if b.area() > 0.0 {
                (1.0 - region_area(r) / b.area()).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> Box2D {
        Box2D::new(x0, y0, x1, y1).unwrap()
    }

    /// Paints boxes front to back on an integer grid; returns per-box visible
    /// pixel masks.
    fn painter(
        boxes: &[Box2D],
        depths: &[f64],
        tie: f64,
        w: usize,
        h: usize,
    ) -> std::vec::Vec<std::vec::Vec<bool>> {
        let layers = depth_layers(depths, tie);
        boxes
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let mut mask = std::vec![false; w * h];
                for y in 0..h {
                    for x in 0..w {
                        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                        let inside = |b: &Box2D| {
                            b.x_min <= px && px <= b.x_max && b.y_min <= py && py <= b.y_max
                        };
                        mask[y * w + x] = inside(b)
                            && !(0..boxes.len())
                                .any(|j| layers[j] < layers[i] && inside(&boxes[j]));
                    }
                }
                mask
            })
            .collect()
    }

    /// Pixel IoU of box `i` and `b` over the pixels not claimed by a box
    /// nearer in depth to `det_depth`, capped by the plain IoU.
    fn mask_iou(
        boxes: &[Box2D],
        depths: &[f64],
        det_depth: f64,
        i: usize,
        b: &Box2D,
        w: usize,
        h: usize,
    ) -> f64 {
        let distance: std::vec::Vec<f64> = depths.iter().map(|d| (d - det_depth).abs()).collect();
        let layers = depth_layers(&distance, 1.0);
        let (mut inter, mut union) = (0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let inside =
                    |b: &Box2D| b.x_min <= px && px <= b.x_max && b.y_min <= py && py <= b.y_max;
                if (0..boxes.len()).any(|j| layers[j] < layers[i] && inside(&boxes[j])) {
                    continue;
                }
                inter += (inside(&boxes[i]) && inside(b)) as u8 as f64;
                union += (inside(&boxes[i]) || inside(b)) as u8 as f64;
            }
        }
        if inter > 0.0 {
            (inter / union).min(iou_2d(&boxes[i], b))
        } else {
            0.0
        }
    }

    #[test]
    fn layers_respect_ties() {
        assert_eq!(
            depth_layers(&[10.0, 5.0, 10.5, 11.2, 5.9], 1.0),
            [1, 0, 1, 2, 0]
        );
        assert_eq!(depth_layers(&[], 1.0), std::vec::Vec::<usize>::new());
    }

    #[test]
    fn lone_tracklet_equals_plain_iou() {
        let t = bx(10.0, 10.0, 50.0, 40.0);
        let d = bx(20.0, 15.0, 60.0, 45.0);
        assert_eq!(
            depth_order_overlap(&[t], &[10.0], &d, 30.0, 1.0)[0],
            iou_2d(&t, &d)
        );
        assert_eq!(detect_occlusions(&[t], &[10.0], 1.0), [0.0]);
    }

    #[test]
    fn fully_covered_tracklet_has_no_overlap() {
        let near = bx(0.0, 0.0, 100.0, 100.0);
        let far = bx(20.0, 20.0, 60.0, 60.0);
        for det_depth in [0.0, 5.0, 11.0] {
            let o = depth_order_overlap(&[near, far], &[5.0, 20.0], &far, det_depth, 1.0);
            assert_eq!(o[1], 0.0);
            assert!(o[0] > 0.0);
        }
        // seen from a detection at the far depth the far box claims first
        let o = depth_order_overlap(&[near, far], &[5.0, 20.0], &far, 20.0, 1.0);
        assert_eq!(o[1], 1.0);
        assert_eq!(o[0], 0.0);
        assert_eq!(
            detect_occlusions(&[near, far], &[5.0, 20.0], 1.0),
            [0.0, 1.0]
        );
    }

    #[test]
    fn cover_fraction_examples() {
        let near = bx(0.0, 0.0, 75.0, 100.0);
        let far = bx(0.0, 0.0, 100.0, 100.0);
        let c = detect_occlusions(&[near, far], &[5.0, 20.0], 1.0);
        assert!((c[1] - 0.75).abs() < 1e-12);
        assert_eq!(c[0], 0.0);
        // farther box in front in the image does not cover the nearer one
        let c = detect_occlusions(&[far, near], &[5.0, 20.0], 1.0);
        assert_eq!(c[0], 0.0);
        // same layer: no cover
        let c = detect_occlusions(&[near, far], &[5.0, 5.8], 1.0);
        assert_eq!(c, [0.0, 0.0]);
    }

    #[test]
    fn three_stacked_boxes_match_painter() {
        let boxes = [
            bx(10.0, 10.0, 50.0, 50.0),
            bx(30.0, 20.0, 80.0, 70.0),
            bx(0.0, 40.0, 90.0, 90.0),
        ];
        let depths = [5.0, 10.0, 15.0];
        let dets = [
            bx(30.0, 20.0, 80.0, 70.0),
            bx(5.0, 45.0, 85.0, 95.0),
            bx(12.0, 12.0, 48.0, 48.0),
        ];
        for (d, dd) in dets.iter().zip([10.0, 15.0, 5.0]) {
            let o = depth_order_overlap(&boxes, &depths, d, dd, 1.0);
            for i in 0..3 {
                let oracle = mask_iou(&boxes, &depths, dd, i, d, 100, 100);
                assert!((o[i] - oracle).abs() < 1e-3, "{i}: {} vs {oracle}", o[i]);
            }
        }
    }

    #[test]
    fn random_scenes_match_painter() {
        let mut rng = rand::rngs::SmallRng::seed_from_u64(4);
        for _ in 0..30 {
            let n = rng.random_range(1..6);
            let boxes: std::vec::Vec<Box2D> = (0..n)
                .map(|_| {
                    let (x, y) = (
                        rng.random_range(0..150) as f64,
                        rng.random_range(0..150) as f64,
                    );
                    bx(
                        x,
                        y,
                        x + rng.random_range(5..60) as f64,
                        y + rng.random_range(5..60) as f64,
                    )
                })
                .collect();
            let depths: std::vec::Vec<f64> = (0..n).map(|_| rng.random_range(5.0..30.0)).collect();
            let det = bx(40.0, 40.0, 120.0, 110.0);
            let det_depth = rng.random_range(5.0..30.0);
            let masks = painter(&boxes, &depths, 1.0, 220, 220);
            let o = depth_order_overlap(&boxes, &depths, &det, det_depth, 1.0);
            let cover = detect_occlusions(&boxes, &depths, 1.0);
            for i in 0..n {
                assert!(
                    (o[i] - mask_iou(&boxes, &depths, det_depth, i, &det, 220, 220)).abs() < 1e-3
                );
                let visible = masks[i].iter().filter(|&&m| m).count() as f64;
                assert!((cover[i] - (1.0 - visible / boxes[i].area())).abs() < 1e-3);
            }
        }
    }

    proptest! {
        #[test]
        fn ordered_overlap_never_exceeds_plain_iou(
            raw in proptest::collection::vec((0.0..100.0f64, 0.0..100.0f64, 1.0..50.0f64, 1.0..50.0f64, 1.0..40.0f64), 1..6),
            d in (0.0..100.0f64, 0.0..100.0f64, 1.0..50.0f64, 1.0..50.0f64, 1.0..40.0f64),
        ) {
            let boxes: std::vec::Vec<Box2D> = raw.iter().map(|r| bx(r.0, r.1, r.0 + r.2, r.1 + r.3)).collect();
            let depths: std::vec::Vec<f64> = raw.iter().map(|r| r.4).collect();
            let det = bx(d.0, d.1, d.0 + d.2, d.1 + d.3);
            let o = depth_order_overlap(&boxes, &depths, &det, d.4, 1.0);
            for (i, b) in boxes.iter().enumerate() {
                prop_assert!(o[i] <= iou_2d(b, &det) + 1e-12);
                prop_assert!((0.0..=1.0).contains(&o[i]));
            }
        }
    }
}
