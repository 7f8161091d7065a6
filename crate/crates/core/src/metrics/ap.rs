use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{iou_3d, Box3D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub box3d: Box3D,
    pub score: f64,
}

/// 11-point interpolated AP from detections ranked by score, given their
/// true-positive flags and the number of ground-truth objects.
pub fn average_precision_11(ranked_tp: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut curve = Vec::with_capacity(ranked_tp.len());
    let mut tp = 0usize;
    for (k, &hit) in ranked_tp.iter().enumerate() {
        tp += hit as usize;
        curve.push((tp as f64 / n_gt as f64, tp as f64 / (k + 1) as f64));
    }
    (0..=10)
        .map(|i| {
            let r = i as f64 / 10.0;
            curve
                .iter()
                .filter(|(rec, _)| *rec >= r - 1e-12)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / 11.0
}

/// AP over per-frame ground truth and scored predictions for each IoU
/// threshold. Within a frame, predictions are taken by descending score and
/// greedily matched to the unmatched ground-truth box of highest 3D IoU.
pub fn ap_3d(gt: &[Vec<Box3D>], pred: &[Vec<ScoredBox>], thresholds: &[f64]) -> Vec<f64> {
    assert_eq!(gt.len(), pred.len(), "frame counts differ");
    let n_gt: usize = gt.iter().map(Vec::len).sum();
    thresholds
        .iter()
        .map(|&thr| {
            let mut scored: Vec<(f64, bool)> = Vec::new();
            for (g, p) in gt.iter().zip(pred) {
                let mut order: Vec<usize> = (0..p.len()).collect();
                order.sort_by(|&a, &b| p[b].score.total_cmp(&p[a].score).then(a.cmp(&b)));
                let mut used = vec![false; g.len()];
                for i in order {
                    let best = (0..g.len())
                        .filter(|&j| !used[j])
                        .map(|j| (j, iou_3d(&g[j], &p[i].box3d)))
                        .filter(|&(_, iou)| iou >= thr)
                        .max_by(|a, b| a.1.total_cmp(&b.1));
                    if let Some((j, _)) = best {
                        used[j] = true;
                    }
                    scored.push((p[i].score, best.is_some()));
                }
            }
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            let flags: Vec<bool> = scored.iter().map(|s| s.1).collect();
            average_precision_11(&flags, n_gt)
        })
        .collect()
}
