use std::cmp::Ordering;

use crate::error::{FiberError, Result};
use crate::geometry::{BoundingBox, RasterMask};
use crate::pruning::mask_iou;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMask {
    pub mask: RasterMask,
    pub score: f64,
}

/// What to do with a detection whose best ground truth is already taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    /// Count the duplicate as a false negative; it does not enter precision.
    #[default]
    Paper,
    /// Count the duplicate as a false positive (COCO behaviour).
    Coco,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionOutcome {
    TruePositive {
        gt: usize,
        iou: f64,
    },
    FalsePositive,
    /// Overlaps an already matched ground truth at or above the threshold.
    Duplicate {
        gt: usize,
        iou: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub detection: usize,
    pub ground_truth: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub tp_count: usize,
    pub fp_count: usize,
    pub fn_count: usize,
    /// True-positive pairs in processing order.
    pub pairs: Vec<MatchPair>,
    /// Outcome per detection, indexed like the input.
    pub outcomes: Vec<DetectionOutcome>,
}

/// Detection indices by descending score; equal scores keep input order.
pub(crate) fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    order
}

pub fn mask_iou_matrix(dets: &[ScoredMask], gts: &[RasterMask]) -> Result<Vec<Vec<f64>>> {
    dets.iter()
        .map(|d| gts.iter().map(|g| mask_iou(&d.mask, g)).collect())
        .collect()
}

pub fn box_iou_matrix(dets: &[Option<BoundingBox>], gts: &[Option<BoundingBox>]) -> Vec<Vec<f64>> {
    dets.iter()
        .map(|d| {
            gts.iter()
                .map(|g| match (d, g) {
                    (Some(a), Some(b)) => a.iou(b),
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Greedy matching on a precomputed IoU matrix (`ious[det][gt]`).
///
/// Detections are processed by descending score. Each takes the unmatched
/// ground truth with the highest IoU at or above `threshold` (first index on
/// ties). Detections without such a ground truth are false positives unless
/// they overlap an already matched one, in which case `policy` decides.
pub fn greedy_match(
    ious: &[Vec<f64>],
    scores: &[f64],
    gt_count: usize,
    threshold: f64,
    policy: DuplicatePolicy,
) -> MatchResult {
    let mut taken = vec![false; gt_count];
    let mut outcomes = vec![DetectionOutcome::FalsePositive; scores.len()];
    let mut pairs = Vec::new();
    let (mut tp, mut fp, mut dup) = (0, 0, 0);
    for det in score_order(scores) {
        let row = &ious[det];
        let mut best: Option<(usize, f64)> = None;
        let mut best_taken: Option<(usize, f64)> = None;
        for (gt, &iou) in row.iter().enumerate() {
            if iou < threshold {
                continue;
            }
            let slot = if taken[gt] {
                &mut best_taken
            } else {
                &mut best
            };
            if slot.is_none_or(|(_, b)| iou > b) {
                *slot = Some((gt, iou));
            }
        }
        outcomes[det] = match (best, best_taken) {
            (Some((gt, iou)), _) => {
                taken[gt] = true;
                tp += 1;
                pairs.push(MatchPair {
                    detection: det,
                    ground_truth: gt,
                    iou,
                });
                DetectionOutcome::TruePositive { gt, iou }
            }
            (None, Some((gt, iou))) if policy == DuplicatePolicy::Paper => {
                dup += 1;
                DetectionOutcome::Duplicate { gt, iou }
            }
            _ => {
                fp += 1;
                DetectionOutcome::FalsePositive
            }
        };
    }
    MatchResult {
        tp_count: tp,
        fp_count: fp,
        fn_count: (gt_count - tp) + dup,
        pairs,
        outcomes,
    }
}

/// Matches scored detection masks against ground-truth masks at one IoU threshold.
pub fn match_detections(
    dets: &[ScoredMask],
    gts: &[RasterMask],
    threshold: f64,
    policy: DuplicatePolicy,
) -> Result<MatchResult> {
    if let Some(first) = dets.first().map(|d| &d.mask).or(gts.first()) {
        let mismatch = dets
            .iter()
            .map(|d| &d.mask)
            .chain(gts)
            .any(|m| !m.same_canvas(first));
        if mismatch {
            return Err(FiberError::invalid("all masks must share one canvas"));
        }
    }
    let ious = mask_iou_matrix(dets, gts)?;
    let scores: Vec<f64> = dets.iter().map(|d| d.score).collect();
    Ok(greedy_match(&ious, &scores, gts.len(), threshold, policy))
}

/// `(TP / (TP + FP), TP / total_gts)`, each 0 when its denominator is 0.
pub fn precision_recall(m: &MatchResult, total_gts: usize) -> (f64, f64) {
    let detections = m.tp_count + m.fp_count;
    let precision = if detections == 0 {
        0.0
    } else {
        m.tp_count as f64 / detections as f64
    };
    let recall = if total_gts == 0 {
        0.0
    } else {
        m.tp_count as f64 / total_gts as f64
    };
    (precision, recall)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: u32, y0: u32, s: u32) -> RasterMask {
        let mut m = RasterMask::new(20, 20).unwrap();
        for y in y0..y0 + s {
            for x in x0..x0 + s {
                m.set(x, y, true);
            }
        }
        m
    }

    fn rect(x0: u32, x1: u32) -> RasterMask {
        let mut m = RasterMask::new(20, 20).unwrap();
        for x in x0..x1 {
            m.set(x, 0, true);
        }
        m
    }

    #[test]
    fn single_good_match() {
        // IoU 0.8: 8 of 10 pixels shared.
        let gt = rect(0, 10);
        let det = ScoredMask {
            mask: rect(0, 8),
            score: 0.9,
        };
        let m = match_detections(&[det], &[gt], 0.5, DuplicatePolicy::Paper).unwrap();
        assert_eq!((m.tp_count, m.fp_count, m.fn_count), (1, 0, 0));
        assert!((m.pairs[0].iou - 0.8).abs() < 1e-12);
    }

    #[test]
    fn weak_overlap_is_fp_and_fn() {
        let gt = rect(0, 10);
        let det = ScoredMask {
            mask: rect(7, 13),
            score: 0.9,
        };
        let m = match_detections(&[det], &[gt], 0.5, DuplicatePolicy::Paper).unwrap();
        assert_eq!((m.tp_count, m.fp_count, m.fn_count), (0, 1, 1));
    }

    #[test]
    fn duplicates_follow_policy() {
        let gt = square(2, 2, 6);
        let dets = [
            ScoredMask {
                mask: square(2, 2, 6),
                score: 0.7,
            },
            ScoredMask {
                mask: square(2, 3, 6),
                score: 0.9,
            },
        ];
        let paper = match_detections(
            &dets,
            std::slice::from_ref(&gt),
            0.5,
            DuplicatePolicy::Paper,
        )
        .unwrap();
        assert_eq!((paper.tp_count, paper.fp_count, paper.fn_count), (1, 0, 1));
        // Highest score is processed first and takes the ground truth.
        assert_eq!(paper.pairs[0].detection, 1);
        assert!(matches!(
            paper.outcomes[0],
            DetectionOutcome::Duplicate { gt: 0, .. }
        ));
        let coco = match_detections(&dets, &[gt], 0.5, DuplicatePolicy::Coco).unwrap();
        assert_eq!((coco.tp_count, coco.fp_count, coco.fn_count), (1, 1, 0));
    }

    #[test]
    fn picks_highest_iou_free_ground_truth() {
        let gts = [square(0, 0, 4), square(1, 0, 4)];
        let det = ScoredMask {
            mask: square(1, 0, 4),
            score: 0.5,
        };
        let m = match_detections(&[det], &gts, 0.5, DuplicatePolicy::Paper).unwrap();
        assert_eq!(m.pairs[0].ground_truth, 1);
        assert_eq!(m.fn_count, 1);
    }

    #[test]
    fn canvas_mismatch_is_rejected() {
        let det = ScoredMask {
            mask: RasterMask::new(5, 5).unwrap(),
            score: 0.5,
        };
        assert!(match_detections(
            &[det],
            &[RasterMask::new(6, 5).unwrap()],
            0.5,
            DuplicatePolicy::Paper
        )
        .is_err());
    }

    #[test]
    fn precision_recall_values() {
        let m = MatchResult {
            tp_count: 3,
            fp_count: 1,
            fn_count: 3,
            pairs: vec![],
            outcomes: vec![],
        };
        assert_eq!(precision_recall(&m, 6), (0.75, 0.5));
        let none = MatchResult {
            tp_count: 0,
            fp_count: 0,
            fn_count: 4,
            pairs: vec![],
            outcomes: vec![],
        };
        assert_eq!(precision_recall(&none, 4), (0.0, 0.0));
        let all = MatchResult {
            tp_count: 4,
            fp_count: 0,
            fn_count: 0,
            pairs: vec![],
            outcomes: vec![],
        };
        assert_eq!(precision_recall(&all, 4), (1.0, 1.0));
    }
}
