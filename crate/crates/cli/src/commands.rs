use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fiberlab::annotation::{annotate_fiber, AnnotateConfig, Polarity, SegmentConfig};
use fiberlab::dataset::{
    load_annotations, read_gray_png, read_mask_png, save_annotations, split_dataset,
    DatasetManifest, FiberRecord, ImageRecord, Provenance, Split, SubsetFlags,
};
use fiberlab::geometry::{
    nearest_rank, order_keypoints, per_fiber_optima, rasterize_chain, rasterize_fiber,
    resample_keypoints, KeypointChain, KeypointSearch, Point2D, RasterMask, SsrConfig,
};
use fiberlab::pruning::{mask_iou, prune_all, Detection};
use fiberlab::synthesis::{generate_dataset, SynthConfig};
use fiberlab::{par, Fiber};
use serde_json::json;

use crate::PolarityArg;

/// Writes a manifest to `out`, or pretty-printed to stdout.
pub(crate) fn emit_manifest(manifest: &DatasetManifest, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => save_annotations(manifest, path)?,
        None => println!("{}", serde_json::to_string_pretty(manifest)?),
    }
    Ok(())
}

pub(crate) fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn chain_of(points: &[[f64; 2]]) -> Result<KeypointChain> {
    Ok(KeypointChain::new(
        points.iter().map(|&[x, y]| Point2D::new(x, y)).collect(),
    )?)
}

fn points_of(chain: &KeypointChain) -> Vec<[f64; 2]> {
    chain.points().iter().map(|p| [p.x, p.y]).collect()
}

/// Ground-truth masks of an image, rasterized from the annotations.
pub(crate) fn gt_masks(entry: &ImageRecord) -> Result<(Vec<Fiber>, Vec<RasterMask>)> {
    let fibers = entry
        .fibers
        .iter()
        .map(FiberRecord::to_fiber)
        .collect::<fiberlab::Result<Vec<_>>>()?;
    let masks = fibers
        .iter()
        .map(|f| rasterize_fiber(f, entry.width_px, entry.height_px))
        .collect::<fiberlab::Result<Vec<_>>>()?;
    Ok((fibers, masks))
}

/// Predictions of one image. Masks come from `mask_path` (relative to
/// `base`) or, when absent and `require_mask` is false, from the keypoints.
pub(crate) fn detections(
    entry: &ImageRecord,
    base: &Path,
    require_mask: bool,
) -> Result<Vec<Detection>> {
    entry
        .fibers
        .iter()
        .enumerate()
        .map(|(j, rec)| {
            let fiber = rec.to_fiber()?;
            let mask = match &rec.mask_path {
                Some(p) => {
                    let mask = read_mask_png(&base.join(p))?;
                    if (mask.width(), mask.height()) != (entry.width_px, entry.height_px) {
                        bail!(
                            "{}: mask {p} does not match the {}x{} image",
                            entry.file_name,
                            entry.width_px,
                            entry.height_px
                        );
                    }
                    mask
                }
                None if require_mask => {
                    bail!("{} fiber {j}: prediction has no mask_path", entry.file_name)
                }
                None => rasterize_fiber(&fiber, entry.width_px, entry.height_px)?,
            };
            Ok(Detection::new(fiber, mask, rec.score.unwrap_or(1.0))?)
        })
        .collect()
}

pub(crate) fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn annotate(
    dir: &Path,
    denoise_radius: u32,
    keypoints: usize,
    polarity: PolarityArg,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    let cfg = AnnotateConfig {
        segment: SegmentConfig {
            denoise_radius,
            polarity: match polarity {
                PolarityArg::Bright => Polarity::Bright,
                PolarityArg::Dark => Polarity::Dark,
            },
        },
        keypoints,
        ..Default::default()
    };
    let results = par::map(&files, |path| {
        let image = read_gray_png(path)?;
        annotate_fiber(&image, &cfg).map(|a| (image.width(), image.height(), a))
    });

    let mut manifest = DatasetManifest::new(Provenance::Semiautomatic);
    for (path, result) in files.iter().zip(results) {
        let name = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        match result {
            Ok((w, h, a)) => {
                if !a.report.flags.is_empty() {
                    eprintln!("review {name}: {:?}", a.report.flags);
                }
                let mut entry = ImageRecord::new(name, w, h, SubsetFlags::CLEAN);
                entry.fibers.push(FiberRecord::from_fiber(&a.fiber));
                manifest.entries.push(entry);
            }
            Err(e) => eprintln!("skipping {name}: {:#}", anyhow::Error::from(e)),
        }
    }
    eprintln!(
        "annotated {} of {} images",
        manifest.image_count(),
        files.len()
    );
    let out = out.unwrap_or_else(|| dir.join("annotations.json"));
    emit_manifest(&manifest, Some(&out))
}

pub fn synth(config: Option<&Path>, count: usize, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut cfg: SynthConfig = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let manifest = generate_dataset(&cfg, count, out)?;
    eprintln!(
        "wrote {} scenes with {} fibers to {}",
        manifest.image_count(),
        manifest.fiber_count(),
        out.display()
    );
    Ok(())
}

fn map_fibers(
    input: &Path,
    out: Option<&Path>,
    f: impl Fn(&KeypointChain) -> Result<KeypointChain>,
) -> Result<()> {
    let mut manifest = load_annotations(input)?;
    for entry in &mut manifest.entries {
        for rec in &mut entry.fibers {
            rec.keypoints = points_of(&f(&chain_of(&rec.keypoints)?)?);
        }
    }
    emit_manifest(&manifest, out)
}

pub fn resample(input: &Path, keypoints: usize, out: Option<&Path>) -> Result<()> {
    map_fibers(input, out, |c| Ok(resample_keypoints(c, keypoints)?))
}

pub fn order(input: &Path, out: Option<&Path>) -> Result<()> {
    map_fibers(input, out, |c| Ok(order_keypoints(c)))
}

pub fn split(input: &Path, fraction: f64, seed: u64, out: Option<&Path>) -> Result<()> {
    let manifest = split_dataset(&load_annotations(input)?, fraction, seed)?;
    let (train, test) = (
        manifest.count_split(Split::Train),
        manifest.count_split(Split::Test),
    );
    eprintln!(
        "train: {} images / {} fibers, test: {} images / {} fibers",
        train.0, train.1, test.0, test.1
    );
    emit_manifest(&manifest, out)
}

pub fn bic(
    input: &Path,
    min: usize,
    max: usize,
    percentile: f64,
    samples: usize,
    out: Option<&Path>,
) -> Result<()> {
    let manifest = load_annotations(input)?;
    let chains = manifest
        .entries
        .iter()
        .flat_map(|e| &e.fibers)
        .map(|r| chain_of(&r.keypoints))
        .collect::<Result<Vec<_>>>()?;
    if chains.is_empty() {
        bail!("{} contains no fibers", input.display());
    }
    let search = KeypointSearch {
        min_k: min,
        max_k: max,
        percentile,
        ssr: SsrConfig {
            sample_count: samples,
        },
    };
    let optima = per_fiber_optima(&chains, &search)?;
    let keypoint_count = nearest_rank(&mut optima.clone(), percentile);
    emit_json(
        &json!({
            "fibers": chains.len(),
            "min": min,
            "max": max,
            "percentile": percentile,
            "samples": samples,
            "keypoint_count": keypoint_count,
            "per_fiber": optima,
        }),
        out,
    )
}

pub fn prune(gt: Option<&Path>, pred: &Path, out: Option<&Path>) -> Result<()> {
    let mut manifest = load_annotations(pred)?;
    let base = base_dir(pred);
    let truth = gt.map(load_annotations).transpose()?;

    let mut dets = Vec::new();
    let mut owners = Vec::new();
    for (i, entry) in manifest.entries.iter().enumerate() {
        for (j, det) in detections(entry, &base, true)?.into_iter().enumerate() {
            dets.push(det);
            owners.push((i, j));
        }
    }
    let outcomes = prune_all(&dets)?;

    let (mut changed, mut skipped) = (0usize, 0usize);
    let (mut iou_before, mut iou_after, mut compared) = (0.0, 0.0, 0usize);
    for ((det, outcome), &(i, j)) in dets.iter().zip(&outcomes).zip(&owners) {
        changed += usize::from(!outcome.steps.is_empty());
        skipped += usize::from(outcome.skipped);
        let entry = &mut manifest.entries[i];
        entry.fibers[j].pruned_keypoints = Some(points_of(&outcome.keypoints));

        let Some(truth) = &truth else { continue };
        let Some(gt_entry) = truth
            .entries
            .iter()
            .find(|e| e.file_name == entry.file_name)
        else {
            continue;
        };
        let (_, masks) = gt_masks(gt_entry)?;
        let (w, h) = (entry.width_px, entry.height_px);
        let before = rasterize_chain(&det.fiber.keypoints, det.fiber.width, w, h)?;
        let after = rasterize_chain(&outcome.keypoints, det.fiber.width, w, h)?;
        // Compare against the ground truth the original prediction overlaps most.
        let mut best: Option<(f64, &RasterMask)> = None;
        for m in &masks {
            let iou = mask_iou(&before, m)?;
            if best.is_none_or(|(b, _)| iou > b) {
                best = Some((iou, m));
            }
        }
        if let Some((b, m)) = best {
            iou_before += b;
            iou_after += mask_iou(&after, m)?;
            compared += 1;
        }
    }
    let mut summary = json!({ "detections": dets.len(), "pruned": changed, "skipped": skipped });
    if compared > 0 {
        summary["mean_gt_iou_before"] = json!(iou_before / compared as f64);
        summary["mean_gt_iou_after"] = json!(iou_after / compared as f64);
    }
    eprintln!("{summary}");
    emit_manifest(&manifest, out)
}
