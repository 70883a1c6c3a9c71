//! Detection evaluation: IoU matching, precision/recall, interpolated
//! precision-recall curves, 101-point AP and mAP, percentage errors with
//! strict/loose MAPE, weighted histograms and KL divergence.

mod distribution;
mod errors;
mod evaluation;
mod matching;
mod precision;

pub use distribution::{
    kl_divergence, shared_range, weighted_histogram, weighted_histogram_in, Histogram,
};
pub use errors::{mape, percentage_error, MapeMode};
pub use evaluation::{
    evaluate, EvalConfig, EvaluationImage, EvaluationReport, QuantityReport, SubsetReport,
};
pub use matching::{
    box_iou_matrix, greedy_match, mask_iou_matrix, match_detections, precision_recall,
    DetectionOutcome, DuplicatePolicy, MatchPair, MatchResult, ScoredMask,
};
pub use precision::{
    average_precision, default_iou_thresholds, mean_ap, pr_curve, APReport, EvalImage, EvalSet,
    PRCurve, PrPoint, RECALL_SAMPLES,
};
