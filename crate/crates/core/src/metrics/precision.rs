use crate::error::{FiberError, Result};
use crate::geometry::RasterMask;
use crate::metrics::matching::{
    greedy_match, mask_iou_matrix, DetectionOutcome, DuplicatePolicy, ScoredMask,
};
use crate::par;

/// Recall levels sampled by [`average_precision`]: 0.00, 0.01, ..., 1.00.
pub const RECALL_SAMPLES: usize = 101;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn default_iou_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

/// Detections and ground truths of one image.
#[derive(Debug, Clone, Default)]
pub struct EvalImage {
    pub detections: Vec<ScoredMask>,
    pub ground_truths: Vec<RasterMask>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub score: f64,
    pub recall: f64,
    pub precision: f64,
    /// Max precision at this recall or any higher one.
    pub interpolated: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PRCurve {
    pub points: Vec<PrPoint>,
    pub total_gts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct APReport {
    pub ap_by_threshold: Vec<(f64, f64)>,
    pub map: f64,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
}

struct Prepared {
    ious: Vec<Vec<f64>>,
    scores: Vec<f64>,
    gt_count: usize,
}

/// A set of images with IoU matrices computed once for repeated threshold sweeps.
pub struct EvalSet {
    images: Vec<Prepared>,
}

impl EvalSet {
    pub fn new(images: &[EvalImage]) -> Result<Self> {
        let images = par::try_map(images, |img| {
            if let Some(first) = img
                .detections
                .first()
                .map(|d| &d.mask)
                .or(img.ground_truths.first())
            {
                let all = img
                    .detections
                    .iter()
                    .map(|d| &d.mask)
                    .chain(&img.ground_truths);
                if all.clone().any(|m| !m.same_canvas(first)) {
                    return Err(FiberError::invalid(
                        "masks within an image must share one canvas",
                    ));
                }
            }
            if let Some(d) = img.detections.iter().find(|d| !d.score.is_finite()) {
                return Err(FiberError::invalid(format!(
                    "detection score {} is not finite",
                    d.score
                )));
            }
            Ok(Prepared {
                ious: mask_iou_matrix(&img.detections, &img.ground_truths)?,
                scores: img.detections.iter().map(|d| d.score).collect(),
                gt_count: img.ground_truths.len(),
            })
        })?;
        Ok(Self { images })
    }

    pub fn total_gts(&self) -> usize {
        self.images.iter().map(|p| p.gt_count).sum()
    }

    /// Cumulative precision-recall curve over all images, one point per distinct score.
    pub fn pr_curve(&self, threshold: f64, policy: DuplicatePolicy) -> PRCurve {
        // (score, image, detection, is_tp); duplicates under the paper policy are dropped.
        let mut records: Vec<(f64, usize, usize, bool)> = Vec::new();
        for (i, p) in self.images.iter().enumerate() {
            let m = greedy_match(&p.ious, &p.scores, p.gt_count, threshold, policy);
            for (d, outcome) in m.outcomes.iter().enumerate() {
                match outcome {
                    DetectionOutcome::TruePositive { .. } => {
                        records.push((p.scores[d], i, d, true))
                    }
                    DetectionOutcome::FalsePositive => records.push((p.scores[d], i, d, false)),
                    DetectionOutcome::Duplicate { .. } => {}
                }
            }
        }
        records.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let total_gts = self.total_gts();
        let mut points = Vec::new();
        let (mut tp, mut fp) = (0usize, 0usize);
        for (k, &(score, _, _, is_tp)) in records.iter().enumerate() {
            if is_tp {
                tp += 1;
            } else {
                fp += 1;
            }
            let group_ends = records.get(k + 1).is_none_or(|next| next.0 != score);
            if group_ends {
                let recall = if total_gts == 0 {
                    0.0
                } else {
                    tp as f64 / total_gts as f64
                };
                let precision = tp as f64 / (tp + fp) as f64;
                points.push(PrPoint {
                    score,
                    recall,
                    precision,
                    interpolated: precision,
                });
            }
        }
        let mut running = 0.0f64;
        for p in points.iter_mut().rev() {
            running = running.max(p.precision);
            p.interpolated = running;
        }
        PRCurve { points, total_gts }
    }

    pub fn average_precision(&self, threshold: f64, policy: DuplicatePolicy) -> f64 {
        average_precision(&self.pr_curve(threshold, policy))
    }

    pub fn mean_ap(&self, thresholds: &[f64], policy: DuplicatePolicy) -> Result<APReport> {
        if thresholds.is_empty() {
            return Err(FiberError::invalid(
                "at least one IoU threshold is required",
            ));
        }
        if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(FiberError::invalid(format!(
                "IoU threshold {t} outside [0, 1]"
            )));
        }
        let aps = par::map(thresholds, |&t| self.average_precision(t, policy));
        let ap_by_threshold: Vec<(f64, f64)> = thresholds.iter().copied().zip(aps).collect();
        let map = ap_by_threshold.iter().map(|p| p.1).sum::<f64>() / ap_by_threshold.len() as f64;
        let lookup = |t: f64| {
            ap_by_threshold
                .iter()
                .find(|p| (p.0 - t).abs() < 1e-9)
                .map(|p| p.1)
        };
        Ok(APReport {
            ap50: lookup(0.5),
            ap75: lookup(0.75),
            map,
            ap_by_threshold,
        })
    }
}

/// Precision-recall curve of a single image set at one threshold.
pub fn pr_curve(images: &[EvalImage], threshold: f64, policy: DuplicatePolicy) -> Result<PRCurve> {
    Ok(EvalSet::new(images)?.pr_curve(threshold, policy))
}

/// 101-point interpolated AP. At each recall level r the precision is the
/// interpolated precision of the first point with recall >= r, or 0 if none.
pub fn average_precision(curve: &PRCurve) -> f64 {
    if curve.total_gts == 0 || curve.points.is_empty() {
        return 0.0;
    }
    let sum: f64 = (0..RECALL_SAMPLES)
        .map(|i| {
            let level = i as f64 / (RECALL_SAMPLES - 1) as f64;
            let idx = curve.points.partition_point(|p| p.recall < level);
            curve.points.get(idx).map_or(0.0, |p| p.interpolated)
        })
        .sum();
    sum / RECALL_SAMPLES as f64
}

pub fn mean_ap(
    images: &[EvalImage],
    thresholds: &[f64],
    policy: DuplicatePolicy,
) -> Result<APReport> {
    EvalSet::new(images)?.mean_ap(thresholds, policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(x0: u32, x1: u32, row: u32) -> RasterMask {
        let mut m = RasterMask::new(16, 16).unwrap();
        for x in x0..x1 {
            m.set(x, row, true);
        }
        m
    }

    /// Two ground truths; detections scored 0.9 (TP), 0.8 (FP), 0.7 (TP).
    fn worked_example() -> EvalImage {
        EvalImage {
            ground_truths: vec![bar(0, 10, 0), bar(0, 10, 5)],
            detections: vec![
                ScoredMask {
                    mask: bar(0, 10, 0),
                    score: 0.9,
                },
                ScoredMask {
                    mask: bar(0, 10, 10),
                    score: 0.8,
                },
                ScoredMask {
                    mask: bar(0, 10, 5),
                    score: 0.7,
                },
            ],
        }
    }

    #[test]
    fn worked_example_ap() {
        let curve = pr_curve(&[worked_example()], 0.5, DuplicatePolicy::Paper).unwrap();
        let recalls: Vec<f64> = curve.points.iter().map(|p| p.recall).collect();
        assert_eq!(recalls, vec![0.5, 0.5, 1.0]);
        let interp: Vec<f64> = curve.points.iter().map(|p| p.interpolated).collect();
        assert_eq!(interp[0], 1.0);
        assert!((interp[2] - 2.0 / 3.0).abs() < 1e-12);
        let expected = (51.0 + 50.0 * 2.0 / 3.0) / 101.0;
        assert!((average_precision(&curve) - expected).abs() < 1e-12);
    }

    #[test]
    fn perfect_detections_score_one() {
        let img = EvalImage {
            ground_truths: vec![bar(0, 10, 0), bar(0, 10, 5)],
            detections: vec![
                ScoredMask {
                    mask: bar(0, 10, 0),
                    score: 0.6,
                },
                ScoredMask {
                    mask: bar(0, 10, 5),
                    score: 0.6,
                },
            ],
        };
        let report = mean_ap(&[img], &default_iou_thresholds(), DuplicatePolicy::Paper).unwrap();
        assert_eq!(report.map, 1.0);
        assert_eq!(report.ap50, Some(1.0));
        assert_eq!(report.ap75, Some(1.0));
    }

    #[test]
    fn tied_scores_form_one_point() {
        let img = EvalImage {
            ground_truths: vec![bar(0, 10, 0)],
            detections: vec![
                ScoredMask {
                    mask: bar(0, 10, 9),
                    score: 0.5,
                },
                ScoredMask {
                    mask: bar(0, 10, 0),
                    score: 0.5,
                },
            ],
        };
        let curve = pr_curve(&[img], 0.5, DuplicatePolicy::Paper).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].precision, 0.5);
        assert_eq!(average_precision(&curve), 0.5);
    }

    #[test]
    fn no_ground_truth_gives_zero() {
        let img = EvalImage {
            ground_truths: vec![],
            detections: vec![ScoredMask {
                mask: bar(0, 3, 0),
                score: 0.5,
            }],
        };
        assert_eq!(
            mean_ap(&[img], &[0.5], DuplicatePolicy::Paper).unwrap().map,
            0.0
        );
    }

    #[test]
    fn threshold_validation() {
        let img = worked_example();
        assert!(mean_ap(std::slice::from_ref(&img), &[], DuplicatePolicy::Paper).is_err());
        assert!(mean_ap(&[img], &[1.5], DuplicatePolicy::Paper).is_err());
    }

    #[test]
    fn ap_non_increasing_in_threshold() {
        // Partial overlaps: IoU 0.9, 0.7, 0.55.
        let img = EvalImage {
            ground_truths: vec![bar(0, 10, 0), bar(0, 10, 3), bar(0, 11, 6)],
            detections: vec![
                ScoredMask {
                    mask: bar(0, 9, 0),
                    score: 0.9,
                },
                ScoredMask {
                    mask: bar(0, 7, 3),
                    score: 0.8,
                },
                ScoredMask {
                    mask: bar(5, 11, 6),
                    score: 0.7,
                },
            ],
        };
        let r = mean_ap(&[img], &default_iou_thresholds(), DuplicatePolicy::Paper).unwrap();
        for w in r.ap_by_threshold.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        assert!(r.ap50.unwrap() > r.ap75.unwrap());
    }
}
