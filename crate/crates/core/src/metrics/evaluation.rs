use std::collections::BTreeMap;

use crate::error::{FiberError, Result};
use crate::geometry::{Fiber, RasterMask};
use crate::metrics::distribution::{kl_divergence, shared_range, weighted_histogram_in, Histogram};
use crate::metrics::errors::{mape, percentage_error, MapeMode};
use crate::metrics::matching::{box_iou_matrix, greedy_match, DuplicatePolicy, ScoredMask};
use crate::metrics::precision::{default_iou_thresholds, APReport, EvalImage, EvalSet};
use crate::pruning::Detection;

/// Ground truth and predictions of one image.
#[derive(Debug, Clone)]
pub struct EvaluationImage {
    /// Subset label, e.g. `[-l|-c|-o]`.
    pub subset: String,
    pub ground_truth: Vec<Fiber>,
    /// Ground-truth masks, parallel to `ground_truth`.
    pub gt_masks: Vec<RasterMask>,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub thresholds: Vec<f64>,
    pub duplicate_policy: DuplicatePolicy,
    /// Bounding-box IoU at which a prediction counts as matched for MAPE.
    pub mape_iou: f64,
    pub histogram_bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            thresholds: default_iou_thresholds(),
            duplicate_policy: DuplicatePolicy::Paper,
            mape_iou: 0.5,
            histogram_bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetReport {
    pub subset: String,
    pub images: usize,
    pub ground_truths: usize,
    pub detections: usize,
    pub ap: APReport,
}

/// Width or length accuracy over matched instances.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityReport {
    pub mape_strict: Option<f64>,
    pub mape_loose: Option<f64>,
    /// `D_KL(ground truth || prediction)`, `None` when undefined.
    pub kl: Option<f64>,
    pub ground_truth_histogram: Option<Histogram>,
    pub prediction_histogram: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    /// One entry per subset label (sorted), followed by `all`.
    pub subsets: Vec<SubsetReport>,
    pub matched: usize,
    pub unmatched_ground_truths: usize,
    pub unmatched_predictions: usize,
    pub width: QuantityReport,
    pub length: QuantityReport,
}

struct Pairing {
    width_errors: Vec<f64>,
    length_errors: Vec<f64>,
    unmatched_gt: usize,
    unmatched_pred: usize,
}

fn pair_by_boxes(images: &[EvaluationImage], iou: f64) -> Result<Pairing> {
    let mut out = Pairing {
        width_errors: Vec::new(),
        length_errors: Vec::new(),
        unmatched_gt: 0,
        unmatched_pred: 0,
    };
    for img in images {
        let gt_boxes: Vec<_> = img.gt_masks.iter().map(RasterMask::bounding_box).collect();
        let det_boxes: Vec<_> = img
            .detections
            .iter()
            .map(|d| d.mask.bounding_box())
            .collect();
        let scores: Vec<f64> = img.detections.iter().map(|d| d.score).collect();
        let m = greedy_match(
            &box_iou_matrix(&det_boxes, &gt_boxes),
            &scores,
            gt_boxes.len(),
            iou,
            DuplicatePolicy::Coco,
        );
        for p in &m.pairs {
            let (det, gt) = (
                &img.detections[p.detection].fiber,
                &img.ground_truth[p.ground_truth],
            );
            out.width_errors
                .push(percentage_error(det.width, gt.width)?);
            out.length_errors
                .push(percentage_error(det.length, gt.length)?);
        }
        out.unmatched_gt += img.ground_truth.len() - m.tp_count;
        out.unmatched_pred += img.detections.len() - m.tp_count;
    }
    Ok(out)
}

fn quantity(
    errors: &[f64],
    unmatched: usize,
    gt_values: &[f64],
    pred_values: &[f64],
    pred_weights: &[f64],
    bins: usize,
) -> Result<QuantityReport> {
    let mape_of = |mode| mape(errors, unmatched, mode).ok();
    let mut report = QuantityReport {
        mape_strict: mape_of(MapeMode::Strict),
        mape_loose: mape_of(MapeMode::Loose),
        kl: None,
        ground_truth_histogram: None,
        prediction_histogram: None,
    };
    let Some((lo, hi)) = shared_range(gt_values, pred_values) else {
        return Ok(report);
    };
    let ones = vec![1.0; gt_values.len()];
    let p = weighted_histogram_in(gt_values, &ones, bins, lo, hi).ok();
    let q = weighted_histogram_in(pred_values, pred_weights, bins, lo, hi).ok();
    if let (Some(p), Some(q)) = (&p, &q) {
        match kl_divergence(p, q) {
            Ok(kl) => report.kl = Some(kl),
            Err(FiberError::UndefinedResult(_)) => {}
            Err(e) => return Err(e),
        }
    }
    report.ground_truth_histogram = p;
    report.prediction_histogram = q;
    Ok(report)
}

fn subset_report(
    label: String,
    images: &[&EvaluationImage],
    cfg: &EvalConfig,
) -> Result<SubsetReport> {
    let eval: Vec<EvalImage> = images
        .iter()
        .map(|img| EvalImage {
            detections: img
                .detections
                .iter()
                .map(|d| ScoredMask {
                    mask: d.mask.clone(),
                    score: d.score,
                })
                .collect(),
            ground_truths: img.gt_masks.clone(),
        })
        .collect();
    Ok(SubsetReport {
        subset: label,
        images: images.len(),
        ground_truths: images.iter().map(|i| i.ground_truth.len()).sum(),
        detections: images.iter().map(|i| i.detections.len()).sum(),
        ap: EvalSet::new(&eval)?.mean_ap(&cfg.thresholds, cfg.duplicate_policy)?,
    })
}

/// AP/mAP per subset and overall, strict and loose MAPE of width and length
/// over box-matched pairs, and KL divergence between the ground-truth
/// distribution and the score-weighted prediction distribution.
pub fn evaluate(images: &[EvaluationImage], cfg: &EvalConfig) -> Result<EvaluationReport> {
    if cfg.histogram_bins == 0 {
        return Err(FiberError::invalid("histogram needs at least one bin"));
    }
    for (i, img) in images.iter().enumerate() {
        if img.ground_truth.len() != img.gt_masks.len() {
            return Err(FiberError::invalid(format!(
                "image {i}: ground-truth fibers and masks differ in count"
            )));
        }
    }
    let mut groups: BTreeMap<&str, Vec<&EvaluationImage>> = BTreeMap::new();
    for img in images {
        groups.entry(img.subset.as_str()).or_default().push(img);
    }
    let mut subsets = groups
        .into_iter()
        .map(|(label, imgs)| subset_report(label.to_string(), &imgs, cfg))
        .collect::<Result<Vec<_>>>()?;
    subsets.push(subset_report(
        "all".into(),
        &images.iter().collect::<Vec<_>>(),
        cfg,
    )?);

    let pairing = pair_by_boxes(images, cfg.mape_iou)?;
    let unmatched = pairing.unmatched_gt + pairing.unmatched_pred;
    let gts = images.iter().flat_map(|i| &i.ground_truth);
    let dets = images.iter().flat_map(|i| &i.detections);
    let gt_w: Vec<f64> = gts.clone().map(|f| f.width).collect();
    let gt_l: Vec<f64> = gts.map(|f| f.length).collect();
    let det_w: Vec<f64> = dets.clone().map(|d| d.fiber.width).collect();
    let det_l: Vec<f64> = dets.clone().map(|d| d.fiber.length).collect();
    let scores: Vec<f64> = dets.map(|d| d.score).collect();
    let bins = cfg.histogram_bins;
    Ok(EvaluationReport {
        subsets,
        matched: pairing.width_errors.len(),
        unmatched_ground_truths: pairing.unmatched_gt,
        unmatched_predictions: pairing.unmatched_pred,
        width: quantity(
            &pairing.width_errors,
            unmatched,
            &gt_w,
            &det_w,
            &scores,
            bins,
        )?,
        length: quantity(
            &pairing.length_errors,
            unmatched,
            &gt_l,
            &det_l,
            &scores,
            bins,
        )?,
    })
}
