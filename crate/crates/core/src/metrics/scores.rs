use core::f64::consts::PI;

use num_traits::Float;

use super::MetricsError;
use crate::geometry::{Box2D, Dimensions, Vec2};

fn check_lengths(a: usize, b: usize) -> Result<(), MetricsError> {
    if a != b {
        return Err(MetricsError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Mean of `(1 + cos Δθ) / 2`.
pub fn orientation_score(gt: &[f64], pred: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(gt.len(), pred.len())?;
    Ok(gt
        .iter()
        .zip(pred)
        .map(|(g, p)| (1.0 + (g - p).cos()) / 2.0)
        .sum::<f64>()
        / gt.len() as f64)
}

/// Mean of `min(V_pred / V_gt, V_gt / V_pred)`.
pub fn dimension_score(gt: &[Dimensions], pred: &[Dimensions]) -> Result<f64, MetricsError> {
    check_lengths(gt.len(), pred.len())?;
    Ok(gt
        .iter()
        .zip(pred)
        .map(|(g, p)| {
            let (vg, vp) = (g.volume(), p.volume());
            (vp / vg).min(vg / vp)
        })
        .sum::<f64>()
        / gt.len() as f64)
}

/// Mean of `(1 + cos a) / 2`, where `a` is the length of the center offset
/// `((x_gt - x_pd) / w_pd, (y_gt - y_pd) / h_pd)` normalized by the predicted
/// box, capped at π.
pub fn center_score(
    gt_centers: &[Vec2],
    pred_boxes: &[Box2D],
    pred_centers: &[Vec2],
) -> Result<f64, MetricsError> {
    check_lengths(gt_centers.len(), pred_centers.len())?;
    check_lengths(pred_boxes.len(), pred_centers.len())?;
    let mut sum = 0.0;
    for ((g, b), p) in gt_centers.iter().zip(pred_boxes).zip(pred_centers) {
        if !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(MetricsError::DegenerateBox);
        }
        let a = Vec2::new((g.x - p.x) / b.width(), (g.y - p.y) / b.height())
            .norm()
            .min(PI);
        sum += (1.0 + a.cos()) / 2.0;
    }
    Ok(sum / gt_centers.len() as f64)
}
