//! CLEAR-MOT matching and accumulation.
//!
//! * A ground-truth object and a prediction may match when they pass the gate:
//!   2D IoU ≥ 0.5 or BEV center distance ≤ 2 m.
//! * Correspondences of the previous frame are kept while still gated; the
//!   rest are assigned by maximum cardinality, then maximum similarity.
//! * MM (mismatch / ID switch): a matched ground-truth object whose prediction
//!   id differs from the one it was last matched to, gaps included.
//! * FRAG: a matched ground-truth object that had been matched before but was
//!   unmatched, or matched to another id, in its previous frame.
//! * MT / ML: ground-truth tracks matched in ≥ 80% / ≤ 20% of their frames.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::association::max_weight_matching;
use crate::geometry::{iou_2d, iou_3d, Box2D, Box3D};
use crate::types::{TrackRecord, TrackStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Iou2d { min_iou: f64 },
    BevDistance { max_meters: f64 },
}

impl Gate {
    pub const KITTI_2D: Gate = Gate::Iou2d { min_iou: 0.5 };
    pub const BEV_3D: Gate = Gate::BevDistance { max_meters: 2.0 };

    /// Similarity in `[0, 1]` when gated, `None` otherwise.
    fn similarity(&self, gt: &EvalObject, pred: &EvalObject) -> Option<f64> {
        match *self {
            Gate::Iou2d { min_iou } => {
                let iou = iou_2d(&gt.box2d, &pred.box2d);
                (iou >= min_iou && iou > 0.0).then_some(iou)
            }
            Gate::BevDistance { max_meters } => {
                let d = bev_distance(gt, pred);
                (d <= max_meters).then(|| 1.0 - d / max_meters.max(f64::MIN_POSITIVE))
            }
        }
    }

    /// Overlap averaged into MOTP.
    fn overlap(&self, gt: &EvalObject, pred: &EvalObject) -> f64 {
        match self {
            Gate::Iou2d { .. } => iou_2d(&gt.box2d, &pred.box2d),
            Gate::BevDistance { .. } => iou_3d(&gt.box3d, &pred.box3d),
        }
    }
}

fn bev_distance(a: &EvalObject, b: &EvalObject) -> f64 {
    (a.box3d.center.xy() - b.box3d.center.xy()).norm()
}

/// One ground-truth or predicted object of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalObject {
    pub id: u64,
    pub box2d: Box2D,
    pub box3d: Box3D,
}

impl EvalObject {
    pub fn from_record(r: &TrackRecord) -> Self {
        Self {
            id: r.track_id,
            box2d: r.box2d,
            box3d: r.box3d,
        }
    }
}

/// Groups the `Tracked` records of frames `[first_frame, first_frame + n_frames)`
/// by frame; occluded and lost extrapolations are not scored.
pub fn tracked_by_frame(
    records: &[TrackRecord],
    first_frame: u64,
    n_frames: usize,
) -> Vec<Vec<EvalObject>> {
    let mut frames = vec![Vec::new(); n_frames];
    for r in records {
        if r.status != TrackStatus::Tracked || r.frame < first_frame {
            continue;
        }
        if let Some(f) = frames.get_mut((r.frame - first_frame) as usize) {
            f.push(EvalObject::from_record(r));
        }
    }
    frames
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub gt_id: u64,
    pub pred_id: u64,
    pub overlap: f64,
    /// 3D center distance, meters.
    pub center_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatching {
    pub pairs: Vec<MatchPair>,
    pub unmatched_gt: Vec<u64>,
    pub unmatched_pred: Vec<u64>,
}

impl FrameMatching {
    pub fn false_positives(&self) -> usize {
        self.unmatched_pred.len()
    }

    pub fn false_negatives(&self) -> usize {
        self.unmatched_gt.len()
    }
}

/// Matches one frame, keeping `prev` correspondences (gt id → pred id) that
/// still pass the gate.
pub fn match_frame(
    gt: &[EvalObject],
    pred: &[EvalObject],
    prev: &BTreeMap<u64, u64>,
    gate: Gate,
) -> FrameMatching {
    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        if let Some(&pid) = prev.get(&g.id) {
            if let Some(pi) = pred.iter().position(|p| p.id == pid) {
                if !pred_used[pi] && gate.similarity(g, &pred[pi]).is_some() {
                    gt_used[gi] = true;
                    pred_used[pi] = true;
                    chosen.push((gi, pi));
                }
            }
        }
    }
    let free_gt: Vec<usize> = (0..gt.len()).filter(|&i| !gt_used[i]).collect();
    let free_pred: Vec<usize> = (0..pred.len()).filter(|&i| !pred_used[i]).collect();
    let bonus = (free_gt.len().min(free_pred.len()) + 1) as f64;
    let mut weights = vec![0.0; free_gt.len() * free_pred.len()];
    for (r, &gi) in free_gt.iter().enumerate() {
        for (c, &pi) in free_pred.iter().enumerate() {
            if let Some(s) = gate.similarity(&gt[gi], &pred[pi]) {
                weights[r * free_pred.len() + c] = bonus + s;
            }
        }
    }
    for (r, col) in max_weight_matching(&weights, free_gt.len(), free_pred.len())
        .into_iter()
        .enumerate()
    {
        if let Some(c) = col {
            if weights[r * free_pred.len() + c] > 0.0 {
                let (gi, pi) = (free_gt[r], free_pred[c]);
                gt_used[gi] = true;
                pred_used[pi] = true;
                chosen.push((gi, pi));
            }
        }
    }
    chosen.sort();
    FrameMatching {
        pairs: chosen
            .iter()
            .map(|&(gi, pi)| MatchPair {
                gt_id: gt[gi].id,
                pred_id: pred[pi].id,
                overlap: gate.overlap(&gt[gi], &pred[pi]),
                center_error: (gt[gi].box3d.center - pred[pi].box3d.center).norm(),
            })
            .collect(),
        unmatched_gt: (0..gt.len())
            .filter(|&i| !gt_used[i])
            .map(|i| gt[i].id)
            .collect(),
        unmatched_pred: (0..pred.len())
            .filter(|&i| !pred_used[i])
            .map(|i| pred[i].id)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearReport {
    pub mota: f64,
    pub motp: f64,
    pub mismatches: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub fragmentations: usize,
    pub mostly_tracked: f64,
    pub mostly_lost: f64,
    pub gt_objects: usize,
    pub matches: usize,
    pub gt_tracks: usize,
    /// RMS 3D center distance over matched pairs, meters (0 without matches).
    pub position_rmse_m: f64,
}

/// Accumulates per-frame matchings (in frame order) into CLEAR metrics.
/// MOTA divides by `max(1, GT objects)`.
pub fn compute_clear(frames: &[FrameMatching]) -> ClearReport {
    #[derive(Default)]
    struct GtTrack {
        present: usize,
        matched: usize,
        last_pred: Option<u64>,
        prev_frame_pred: Option<u64>,
    }
    let mut tracks: BTreeMap<u64, GtTrack> = BTreeMap::new();
    let (mut fp, mut fn_, mut mm, mut frag, mut matches) = (0, 0, 0, 0, 0);
    let (mut overlap, mut sq_err) = (0.0, 0.0);
    for f in frames {
        fp += f.false_positives();
        fn_ += f.false_negatives();
        for &g in &f.unmatched_gt {
            let t = tracks.entry(g).or_default();
            t.present += 1;
            t.prev_frame_pred = None;
        }
        for p in &f.pairs {
            let t = tracks.entry(p.gt_id).or_default();
            t.present += 1;
            t.matched += 1;
            matches += 1;
            overlap += p.overlap;
            sq_err += p.center_error * p.center_error;
            if let Some(last) = t.last_pred {
                if last != p.pred_id {
                    mm += 1;
                }
                if t.prev_frame_pred != Some(p.pred_id) {
                    frag += 1;
                }
            }
            t.last_pred = Some(p.pred_id);
            t.prev_frame_pred = Some(p.pred_id);
        }
    }
    let gt_objects = matches + fn_;
    let n_tracks = tracks.len();
    let frac = |pred: &dyn Fn(f64) -> bool| {
        if n_tracks == 0 {
            0.0
        } else {
            tracks
                .values()
                .filter(|t| pred(t.matched as f64 / t.present as f64))
                .count() as f64
                / n_tracks as f64
        }
    };
    ClearReport {
        mota: 1.0 - (fp + fn_ + mm) as f64 / gt_objects.max(1) as f64,
        motp: if matches > 0 {
            overlap / matches as f64
        } else {
            0.0
        },
        mismatches: mm,
        false_positives: fp,
        false_negatives: fn_,
        fragmentations: frag,
        mostly_tracked: frac(&|c| c >= 0.8),
        mostly_lost: frac(&|c| c <= 0.2),
        gt_objects,
        matches,
        gt_tracks: n_tracks,
        position_rmse_m: if matches > 0 {
            (sq_err / matches as f64).sqrt()
        } else {
            0.0
        },
    }
}

/// Matches every frame, carrying correspondences forward, and accumulates the
/// report. `gt[i]` and `pred[i]` belong to the same frame.
pub fn evaluate_sequence(
    gt: &[Vec<EvalObject>],
    pred: &[Vec<EvalObject>],
    gate: Gate,
) -> (Vec<FrameMatching>, ClearReport) {
    assert_eq!(gt.len(), pred.len(), "frame counts differ");
    let mut prev = BTreeMap::new();
    let frames: Vec<FrameMatching> = gt
        .iter()
        .zip(pred)
        .map(|(g, p)| {
            let m = match_frame(g, p, &prev, gate);
            prev = m.pairs.iter().map(|p| (p.gt_id, p.pred_id)).collect();
            m
        })
        .collect();
    let report = compute_clear(&frames);
    (frames, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Dimensions, Vec3};

    fn obj(id: u64, x: f64) -> EvalObject {
        EvalObject {
            id,
            box2d: Box2D::new(x, 0.0, x + 10.0, 10.0).unwrap(),
            box3d: Box3D::new(Vec3::new(x, 0.0, 0.75), Dimensions::new(4.0, 1.8, 1.5), 0.0)
                .unwrap(),
        }
    }

    fn frame(gts: &[(u64, f64)], preds: &[(u64, f64)]) -> (Vec<EvalObject>, Vec<EvalObject>) {
        (
            gts.iter().map(|&(i, x)| obj(i, x)).collect(),
            preds.iter().map(|&(i, x)| obj(i, x)).collect(),
        )
    }

    #[test]
    fn identical_sets_match_fully() {
        let (g, p) = frame(&[(1, 0.0), (2, 50.0)], &[(7, 0.0), (8, 50.0)]);
        let m = match_frame(&g, &p, &BTreeMap::new(), Gate::KITTI_2D);
        assert_eq!(m.pairs.len(), 2);
        assert_eq!((m.false_positives(), m.false_negatives()), (0, 0));
        let m = match_frame(&[], &p[..1], &BTreeMap::new(), Gate::BEV_3D);
        assert_eq!(m.false_positives(), 1);
    }

    /// Best matching under CLEAR rules by enumeration: kept previous pairs,
    /// then maximum cardinality, then maximum similarity.
    fn brute_force(g: &[EvalObject], p: &[EvalObject], gate: Gate) -> (usize, f64) {
        fn go(
            g: &[EvalObject],
            p: &[EvalObject],
            gate: Gate,
            i: usize,
            used: &mut Vec<bool>,
            n: usize,
            s: f64,
            best: &mut (usize, f64),
        ) {
            if i == g.len() {
                if n > best.0 || (n == best.0 && s > best.1 + 1e-12) {
                    *best = (n, s);
                }
                return;
            }
            go(g, p, gate, i + 1, used, n, s, best);
            for j in 0..p.len() {
                if let (false, Some(sim)) = (used[j], gate.similarity(&g[i], &p[j])) {
                    used[j] = true;
                    go(g, p, gate, i + 1, used, n + 1, s + sim, best);
                    used[j] = false;
                }
            }
        }
        let mut best = (0, 0.0);
        go(g, p, gate, 0, &mut vec![false; p.len()], 0, 0.0, &mut best);
        best
    }

    #[test]
    fn three_by_three_with_gate_violation_is_optimal() {
        // pred 9 is far from everything; preds 7 and 8 both overlap gt 1
        let (g, p) = frame(
            &[(1, 0.0), (2, 6.0), (3, 100.0)],
            &[(7, 1.0), (8, 4.0), (9, 300.0)],
        );
        let m = match_frame(&g, &p, &BTreeMap::new(), Gate::Iou2d { min_iou: 0.3 });
        let sim: f64 = m
            .pairs
            .iter()
            .map(|pr| {
                let gi = g.iter().find(|o| o.id == pr.gt_id).unwrap();
                let pi = p.iter().find(|o| o.id == pr.pred_id).unwrap();
                Gate::Iou2d { min_iou: 0.3 }.similarity(gi, pi).unwrap()
            })
            .sum();
        let best = brute_force(&g, &p, Gate::Iou2d { min_iou: 0.3 });
        assert_eq!(m.pairs.len(), best.0);
        assert!((sim - best.1).abs() < 1e-12);
        assert_eq!(m.unmatched_gt, [3]);
        assert_eq!(m.unmatched_pred, [9]);
    }

    #[test]
    fn previous_correspondence_wins_while_gated() {
        let (g, p) = frame(&[(1, 0.0)], &[(7, 0.0), (8, 2.0)]);
        let prev: BTreeMap<u64, u64> = [(1, 8)].into_iter().collect();
        let m = match_frame(&g, &p, &prev, Gate::KITTI_2D);
        assert_eq!(m.pairs[0].pred_id, 8);
        let m = match_frame(&g, &p, &BTreeMap::new(), Gate::KITTI_2D);
        assert_eq!(m.pairs[0].pred_id, 7);
    }

    #[test]
    fn perfect_tracking() {
        let gt: Vec<Vec<EvalObject>> = (0..5)
            .map(|t| vec![obj(1, t as f64), obj(2, 50.0 + t as f64)])
            .collect();
        let pred: Vec<Vec<EvalObject>> = (0..5)
            .map(|t| vec![obj(10, t as f64), obj(20, 50.0 + t as f64)])
            .collect();
        let (_, r) = evaluate_sequence(&gt, &pred, Gate::KITTI_2D);
        assert_eq!(
            (r.mota, r.mismatches, r.false_positives, r.false_negatives),
            (1.0, 0, 0, 0)
        );
        assert_eq!(r.motp, 1.0);
        assert_eq!(r.mostly_tracked, 1.0);
    }

    #[test]
    fn hand_counted_mota() {
        // 10 gt instances of one object over 10 frames; frame 3 has an extra
        // false positive, frame 6 misses the object, and frame 8 switches id
        let mut gt = Vec::new();
        let mut pred = Vec::new();
        for t in 0..10 {
            gt.push(vec![obj(1, 0.0)]);
            let mut p = Vec::new();
            match t {
                6 => {}
                8.. => p.push(obj(2, 0.0)),
                _ => p.push(obj(1, 0.0)),
            }
            if t == 3 {
                p.push(obj(5, 200.0));
            }
            pred.push(p);
        }
        let (_, r) = evaluate_sequence(&gt, &pred, Gate::KITTI_2D);
        assert_eq!(
            (r.false_positives, r.false_negatives, r.mismatches),
            (1, 1, 1)
        );
        assert_eq!(r.gt_objects, 10);
        assert!((r.mota - 0.7).abs() < 1e-12);
        // resumption after the miss at frame 6 and the switch at frame 8
        assert_eq!(r.fragmentations, 2);
    }

    #[test]
    fn id_swap_mid_track() {
        let mut gt = Vec::new();
        let mut pred = Vec::new();
        for t in 0..10 {
            gt.push(vec![obj(1, 0.0), obj(2, 100.0)]);
            let (a, b) = if t < 5 { (7, 8) } else { (8, 7) };
            pred.push(vec![obj(a, 0.0), obj(b, 100.0)]);
        }
        let (_, r) = evaluate_sequence(&gt, &pred, Gate::KITTI_2D);
        assert_eq!(r.mismatches, 2);
        assert!(r.fragmentations >= 1);
        // single track swapping to a new id
        let gt1: Vec<Vec<EvalObject>> = gt.iter().map(|f| vec![f[0].clone()]).collect();
        let pred1: Vec<Vec<EvalObject>> = (0..10)
            .map(|t| vec![obj(if t < 5 { 7 } else { 9 }, 0.0)])
            .collect();
        let (_, r) = evaluate_sequence(&gt1, &pred1, Gate::KITTI_2D);
        assert_eq!(r.mismatches, 1);
        assert!(r.fragmentations >= 1);
        assert!((r.mota - 0.9).abs() < 1e-12);
    }

    #[test]
    fn mostly_tracked_and_lost() {
        let gt: Vec<Vec<EvalObject>> = (0..10)
            .map(|_| vec![obj(1, 0.0), obj(2, 100.0), obj(3, 200.0)])
            .collect();
        let pred: Vec<Vec<EvalObject>> = (0..10)
            .map(|t| {
                let mut p = vec![obj(1, 0.0)];
                if t < 5 {
                    p.push(obj(2, 100.0));
                }
                if t < 2 {
                    p.push(obj(3, 200.0));
                }
                p
            })
            .collect();
        let (_, r) = evaluate_sequence(&gt, &pred, Gate::BEV_3D);
        assert!((r.mostly_tracked - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.mostly_lost - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.motp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relabeling_predictions_keeps_mota() {
        let gt: Vec<Vec<EvalObject>> = (0..8)
            .map(|t| vec![obj(1, t as f64 * 3.0), obj(2, 60.0)])
            .collect();
        let pred: Vec<Vec<EvalObject>> = (0..8)
            .map(|t| vec![obj(if t < 4 { 3 } else { 4 }, t as f64 * 3.0), obj(5, 61.0)])
            .collect();
        let relabeled: Vec<Vec<EvalObject>> = pred
            .iter()
            .map(|f| {
                f.iter()
                    .map(|o| EvalObject {
                        id: o.id * 17 + 1000,
                        ..o.clone()
                    })
                    .collect()
            })
            .collect();
        let a = evaluate_sequence(&gt, &pred, Gate::KITTI_2D).1;
        let b = evaluate_sequence(&gt, &relabeled, Gate::KITTI_2D).1;
        assert_eq!(a, b);
    }

    #[test]
    fn empty_predictions() {
        let gt: Vec<Vec<EvalObject>> = (0..3).map(|_| vec![obj(1, 0.0)]).collect();
        let (_, r) = evaluate_sequence(&gt, &[vec![], vec![], vec![]], Gate::KITTI_2D);
        assert_eq!((r.mota, r.false_positives, r.false_negatives), (0.0, 0, 3));
    }
}
