use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::SynthConfig;
use super::fiber::{sample_fiber, self_intersects};
use crate::annotation::GrayImage;
use crate::dataset::{
    save_annotations, write_gray_png, DatasetManifest, FiberRecord, ImageRecord, Provenance,
    SubsetFlags,
};
use crate::error::{FiberError, Result};
use crate::geometry::{
    rasterize_chain, rasterize_fiber, ArcLengthTable, Fiber, Point2D, RasterMask,
};
use crate::par;

const PLACEMENT_ATTEMPTS: usize = 50;
const CLUTTER_PROBABILITY: f64 = 0.5;
/// Extra stroke width around placed fibers that new ones must avoid when
/// overlaps are disallowed, so neighbouring fibers never touch.
const OVERLAP_GUARD: f64 = 4.0;

/// Inhibiting factors actually present in a generated scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RealizedFlags {
    pub loops: bool,
    pub clutter: bool,
    pub overlaps: bool,
}

impl From<RealizedFlags> for SubsetFlags {
    fn from(f: RealizedFlags) -> Self {
        SubsetFlags::new(f.loops.into(), f.clutter.into(), f.overlaps.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub image: GrayImage,
    pub fibers: Vec<Fiber>,
    /// One mask per fiber, in annotation order.
    pub fiber_masks: Vec<RasterMask>,
    /// Union of the fiber masks.
    pub fiber_mask: RasterMask,
    /// Fibers plus clutter: every pixel drawn in foreground intensity.
    pub foreground: RasterMask,
    pub flags: RealizedFlags,
}

fn clutter_mask<R: Rng + ?Sized>(
    fibers: &[Fiber],
    w: u32,
    h: u32,
    rng: &mut R,
) -> Result<RasterMask> {
    let mut mask = RasterMask::new(w, h)?;
    for fiber in fibers {
        if !rng.random_bool(CLUTTER_PROBABILITY) {
            continue;
        }
        let table = ArcLengthTable::for_chain(&fiber.keypoints);
        for _ in 0..rng.random_range(1..=3) {
            let anchor = table.point_at_fraction(rng.random_range(0.0..=1.0));
            let radius = rng.random_range(0.5..=1.0) * fiber.width;
            let angle = rng.random_range(0.0..TAU);
            // Centre closer than `width / 2 + radius`, so the disc touches the fiber.
            let reach = 0.5 * fiber.width + 0.5 * radius;
            let c = Point2D::new(
                anchor.x + reach * angle.cos(),
                anchor.y + reach * angle.sin(),
            );
            mask.paint_capsule(c, c, radius);
        }
    }
    Ok(mask)
}

/// Draws `fibers` (plus clutter discs when allowed) in foreground intensity
/// over the background, adds Gaussian noise and clamps to 8 bits.
pub fn render_scene<R: Rng + ?Sized>(
    fibers: &[Fiber],
    cfg: &SynthConfig,
    rng: &mut R,
) -> Result<SynthScene> {
    cfg.validate()?;
    if fibers.is_empty() {
        return Err(FiberError::invalid("a scene needs at least one fiber"));
    }
    let (w, h) = (cfg.canvas_width, cfg.canvas_height);
    let fiber_masks = fibers
        .iter()
        .map(|f| rasterize_fiber(f, w, h))
        .collect::<Result<Vec<_>>>()?;
    let mut fiber_mask = RasterMask::new(w, h)?;
    for m in &fiber_masks {
        fiber_mask.union_with(m);
    }
    let mut foreground = fiber_mask.clone();
    let mut clutter = false;
    if cfg.allow_clutter {
        let extra = clutter_mask(fibers, w, h, rng)?;
        clutter = !extra.is_subset_of(&fiber_mask);
        foreground.union_with(&extra);
    }

    let pixels = foreground
        .bits()
        .iter()
        .map(|&fg| {
            let base = if fg { cfg.foreground } else { cfg.background };
            let noise = if cfg.noise_sigma > 0.0 {
                cfg.noise_sigma * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            (base + noise).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let image = GrayImage::new(w, h, pixels)?;

    let overlaps = (0..fiber_masks.len()).any(|i| {
        (i + 1..fiber_masks.len()).any(|j| fiber_masks[i].intersection_count(&fiber_masks[j]) > 0)
    });
    let flags = RealizedFlags {
        loops: fibers.iter().any(|f| self_intersects(&f.keypoints)),
        clutter,
        overlaps,
    };
    Ok(SynthScene {
        image,
        fibers: fibers.to_vec(),
        fiber_masks,
        fiber_mask,
        foreground,
        flags,
    })
}

/// Samples a fiber count and places that many fibers (fewer if placement
/// keeps failing, never zero), then renders the scene.
pub fn synthesize_scene<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> Result<SynthScene> {
    cfg.validate()?;
    let (w, h) = (cfg.canvas_width, cfg.canvas_height);
    let wanted = cfg.fiber_count.sample(rng);
    let mut fibers = Vec::new();
    let mut occupied = RasterMask::new(w, h)?;
    for _ in 0..wanted {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let fiber = sample_fiber(cfg, rng)?;
            let mask = rasterize_fiber(&fiber, w, h)?;
            if mask.is_empty() {
                continue;
            }
            if !cfg.allow_overlaps && !fibers.is_empty() {
                let guard = rasterize_chain(&fiber.keypoints, fiber.width + OVERLAP_GUARD, w, h)?;
                if guard.intersection_count(&occupied) > 0 {
                    continue;
                }
            }
            occupied.union_with(&mask);
            fibers.push(fiber);
            break;
        }
    }
    if fibers.is_empty() {
        return Err(FiberError::InvalidConfig(
            "could not place any fiber on the canvas".into(),
        ));
    }
    render_scene(&fibers, cfg, rng)
}

/// Scenes `0..count`; scene `i` uses random stream `i` of `cfg.seed`.
pub fn generate_scenes(cfg: &SynthConfig, count: usize) -> Result<Vec<SynthScene>> {
    cfg.validate()?;
    let indices: Vec<u64> = (0..count as u64).collect();
    par::try_map(&indices, |&i| {
        synthesize_scene(cfg, &mut par::stream_rng(cfg.seed, i))
    })
}

/// Writes `count` scenes as `scene_NNNNN.png` plus `manifest.json` into
/// `dest` (created if missing) and returns the manifest.
pub fn generate_dataset(cfg: &SynthConfig, count: usize, dest: &Path) -> Result<DatasetManifest> {
    if count == 0 {
        return Err(FiberError::invalid("scene count must be >= 1"));
    }
    cfg.validate()?;
    std::fs::create_dir_all(dest).map_err(|e| FiberError::io(dest, e))?;
    let indices: Vec<u64> = (0..count as u64).collect();
    let entries = par::try_map(&indices, |&i| {
        let scene = synthesize_scene(cfg, &mut par::stream_rng(cfg.seed, i))?;
        let name = format!("scene_{i:05}.png");
        write_gray_png(&scene.image, &dest.join(&name))?;
        let mut record = ImageRecord::new(
            name,
            cfg.canvas_width,
            cfg.canvas_height,
            scene.flags.into(),
        );
        record.fibers = scene.fibers.iter().map(FiberRecord::from_fiber).collect();
        Ok(record)
    })?;
    let manifest = DatasetManifest {
        entries,
        ..DatasetManifest::new(Provenance::Synthetic)
    };
    save_annotations(&manifest, &dest.join("manifest.json"))?;
    Ok(manifest)
}
