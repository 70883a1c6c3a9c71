use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fiberlab::dataset::load_annotations;
use fiberlab::metrics::{
    evaluate, DuplicatePolicy, EvalConfig, EvaluationImage, Histogram, QuantityReport,
};
use serde_json::{json, Value};

use crate::commands::{base_dir, detections, emit_json, gt_masks};
use crate::{DuplicatePolicyArg, MapeArg};

pub struct Args<'a> {
    pub gt: &'a Path,
    pub pred: &'a Path,
    pub thresholds: &'a str,
    pub policy: DuplicatePolicyArg,
    pub mape: MapeArg,
    pub bins: usize,
    pub histograms: Option<&'a Path>,
    pub out: Option<&'a Path>,
}

/// Parses `start:step:end` (inclusive) or `a,b,c`.
fn parse_thresholds(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = if parts.len() == 3 {
        let [start, step, end] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (start, step, end) = (start?, step?, end?);
        if step.is_nan() || step <= 0.0 || end < start {
            bail!("threshold range {spec} needs step > 0 and end >= start");
        }
        let n = ((end - start) / step + 1e-9).floor() as usize + 1;
        // Rounding keeps e.g. 0.75 exact after repeated addition.
        (0..n)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect()
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() || values.iter().any(|t| !(0.0..=1.0).contains(t)) {
        bail!("thresholds must be non-empty and within [0, 1]: {spec}");
    }
    Ok(values)
}

fn quantity_json(q: &QuantityReport, mode: MapeArg) -> Value {
    let mut v = json!({ "kl_divergence": q.kl });
    if mode != MapeArg::Loose {
        v["mape_strict_percent"] = json!(q.mape_strict);
    }
    if mode != MapeArg::Strict {
        v["mape_loose_percent"] = json!(q.mape_loose);
    }
    v
}

fn histogram_csv(gt: Option<&Histogram>, pred: Option<&Histogram>) -> String {
    let mut text = String::from("bin_start,bin_end,ground_truth_density,prediction_density\n");
    let Some(edges) = gt.or(pred).map(|h| &h.edges) else {
        return text;
    };
    let density =
        |h: Option<&Histogram>, i: usize| h.map_or(String::new(), |h| h.densities[i].to_string());
    for i in 0..edges.len() - 1 {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            edges[i],
            edges[i + 1],
            density(gt, i),
            density(pred, i)
        );
    }
    text
}

pub fn run(args: Args) -> Result<()> {
    let thresholds = parse_thresholds(args.thresholds)?;
    let gt = load_annotations(args.gt)?;
    let pred = load_annotations(args.pred)?;
    let base = base_dir(args.pred);
    for p in &pred.entries {
        if !gt.entries.iter().any(|g| g.file_name == p.file_name) {
            bail!("prediction for {} has no ground-truth entry", p.file_name);
        }
    }

    let mut images = Vec::with_capacity(gt.entries.len());
    for g in &gt.entries {
        let (ground_truth, masks) = gt_masks(g)?;
        let dets = match pred.entries.iter().find(|p| p.file_name == g.file_name) {
            Some(p) => {
                if (p.width_px, p.height_px) != (g.width_px, g.height_px) {
                    bail!(
                        "{}: prediction and ground truth disagree on image size",
                        g.file_name
                    );
                }
                detections(p, &base, false)?
            }
            None => Vec::new(),
        };
        images.push(EvaluationImage {
            subset: g.flags.to_string(),
            ground_truth,
            gt_masks: masks,
            detections: dets,
        });
    }

    let cfg = EvalConfig {
        thresholds: thresholds.clone(),
        duplicate_policy: match args.policy {
            DuplicatePolicyArg::Paper => DuplicatePolicy::Paper,
            DuplicatePolicyArg::Coco => DuplicatePolicy::Coco,
        },
        histogram_bins: args.bins,
        ..Default::default()
    };
    let report = evaluate(&images, &cfg)?;

    let subsets: Vec<Value> = report
        .subsets
        .iter()
        .map(|s| {
            json!({
                "subset": s.subset,
                "images": s.images,
                "ground_truths": s.ground_truths,
                "detections": s.detections,
                "ap50": s.ap.ap50,
                "ap75": s.ap.ap75,
                "map": s.ap.map,
                "ap_by_threshold": s.ap.ap_by_threshold.iter().map(|(t, ap)| json!({"iou": t, "ap": ap})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let value = json!({
        "thresholds": thresholds,
        "duplicate_policy": match cfg.duplicate_policy { DuplicatePolicy::Paper => "paper", DuplicatePolicy::Coco => "coco" },
        "subsets": subsets,
        "matching": {
            "bbox_iou": cfg.mape_iou,
            "matched": report.matched,
            "unmatched_ground_truths": report.unmatched_ground_truths,
            "unmatched_predictions": report.unmatched_predictions,
        },
        "width": quantity_json(&report.width, args.mape),
        "length": quantity_json(&report.length, args.mape),
    });

    if let Some(dir) = args.histograms {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, q) in [("width", &report.width), ("length", &report.length)] {
            let path = dir.join(format!("{name}_histogram.csv"));
            let csv = histogram_csv(
                q.ground_truth_histogram.as_ref(),
                q.prediction_histogram.as_ref(),
            );
            std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    emit_json(&value, args.out)
}
