//! Error detection and keypoint-pruning correction for predicted fibers.
//!
//! A misplaced keypoint produces long adjacent segments, a spline that is too
//! long for the predicted fiber length, and a stroke that leaves the predicted
//! mask. Pruning removes keypoints one at a time while neither the mask IoU
//! nor the length error gets worse, then resamples back to the original count.

use crate::error::{FiberError, Result};
use crate::geometry::{
    rasterize_chain, resample_keypoints, spline_length, Fiber, KeypointChain, RasterMask,
};
use crate::par;

/// A predicted fiber instance together with the mask predicted for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub fiber: Fiber,
    pub mask: RasterMask,
    pub score: f64,
}

impl Detection {
    pub fn new(fiber: Fiber, mask: RasterMask, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(FiberError::invalid(format!(
                "detection score {score} outside [0, 1]"
            )));
        }
        Ok(Self { fiber, mask, score })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `|1 - spline_length / predicted_length|`
    pub length_error: f64,
    /// IoU of the rasterized keypoint spline against the predicted mask.
    pub mask_iou: f64,
}

pub fn spline_length_error(keypoints: &KeypointChain, predicted_length: f64) -> Result<f64> {
    if predicted_length.is_nan() || predicted_length <= 0.0 {
        return Err(FiberError::invalid(format!(
            "predicted length must be > 0, got {predicted_length}"
        )));
    }
    Ok((1.0 - spline_length(keypoints) / predicted_length).abs())
}

/// Intersection over union of two masks on the same canvas; 0 when both are empty.
pub fn mask_iou(a: &RasterMask, b: &RasterMask) -> Result<f64> {
    if !a.same_canvas(b) {
        return Err(FiberError::invalid(format!(
            "mask canvases differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let union = a.union_count(b);
    if union == 0 {
        return Ok(0.0);
    }
    Ok(a.intersection_count(b) as f64 / union as f64)
}

fn evaluate(keypoints: &KeypointChain, det: &Detection) -> Result<ErrorReport> {
    let drawn = rasterize_chain(
        keypoints,
        det.fiber.width,
        det.mask.width(),
        det.mask.height(),
    )?;
    Ok(ErrorReport {
        length_error: spline_length_error(keypoints, det.fiber.length)?,
        mask_iou: mask_iou(&drawn, &det.mask)?,
    })
}

/// Compares the keypoint spline with the predicted length and mask.
pub fn detect_error(det: &Detection) -> Result<ErrorReport> {
    evaluate(&det.fiber.keypoints, det)
}

/// One accepted keypoint removal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneStep {
    /// Index of the removed keypoint in the detection's original chain.
    pub original_index: usize,
    /// Criteria after the removal.
    pub report: ErrorReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    /// Corrected keypoints, resampled to the original count.
    pub keypoints: KeypointChain,
    /// Criteria of the unmodified detection.
    pub initial: ErrorReport,
    /// Accepted removals in order.
    pub steps: Vec<PruneStep>,
    /// True when the chain was too short to prune and was returned unchanged.
    pub skipped: bool,
}

impl PruneOutcome {
    pub fn first_removed(&self) -> Option<usize> {
        self.steps.first().map(|s| s.original_index)
    }
}

/// Adjacent-keypoint segments ordered by length, longest first; equal
/// lengths keep their index order. Each segment lists its two keypoints with
/// the one whose other neighbouring segment is longer first, since a
/// misplaced keypoint sits between two long segments. Ties keep index order.
fn segments_by_length(chain: &KeypointChain) -> Vec<[usize; 2]> {
    let pts = chain.points();
    let lengths: Vec<f64> = pts.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&a, &b| lengths[b].total_cmp(&lengths[a]));
    order
        .into_iter()
        .map(|i| {
            let before = if i > 0 { lengths[i - 1] } else { 0.0 };
            let after = lengths.get(i + 1).copied().unwrap_or(0.0);
            if after > before {
                [i + 1, i]
            } else {
                [i, i + 1]
            }
        })
        .collect()
}

/// Keypoint pruning.
///
/// Segments are scanned longest first; for each of a segment's two keypoints
/// (see [`segments_by_length`] for their order) a removal is tried and accepted when the mask IoU does not drop and the
/// length error does not grow. After an acceptance the scan restarts on the
/// reduced chain. The final chain is resampled to the original keypoint count.
pub fn prune_keypoints(det: &Detection) -> Result<PruneOutcome> {
    let original = &det.fiber.keypoints;
    let count = original.len();
    let initial = detect_error(det)?;
    if count < 3 {
        return Ok(PruneOutcome {
            keypoints: original.clone(),
            initial,
            steps: Vec::new(),
            skipped: true,
        });
    }

    let mut chain = original.clone();
    let mut indices: Vec<usize> = (0..count).collect();
    let mut current = initial;
    let mut steps = Vec::new();

    'restart: loop {
        // Each keypoint belongs to up to two segments; its removal only needs
        // evaluating once per scan.
        let mut rejected = vec![false; chain.len()];
        for pair in segments_by_length(&chain) {
            for idx in pair {
                if rejected[idx] {
                    continue;
                }
                let Some(candidate) = chain.without(idx) else {
                    rejected[idx] = true;
                    continue;
                };
                let report = evaluate(&candidate, det)?;
                if report.mask_iou >= current.mask_iou
                    && report.length_error <= current.length_error
                {
                    steps.push(PruneStep {
                        original_index: indices[idx],
                        report,
                    });
                    indices.remove(idx);
                    chain = candidate;
                    current = report;
                    debug_assert!(steps.len() <= count - 2);
                    continue 'restart;
                }
                rejected[idx] = true;
            }
        }
        break;
    }

    Ok(PruneOutcome {
        keypoints: resample_keypoints(&chain, count)?,
        initial,
        steps,
        skipped: false,
    })
}

/// Prunes every detection independently.
pub fn prune_all(dets: &[Detection]) -> Result<Vec<PruneOutcome>> {
    par::try_map(dets, prune_keypoints)
}
