use super::distance::{distance_map, estimate_width};
use super::image::GrayImage;
use super::path::{connected_components, longest_path};
use super::segment::{segment, SegmentConfig};
use super::skeleton::skeletonize;
use crate::error::{FiberError, Result};
use crate::geometry::{
    order_keypoints, resample_keypoints, spline_length, Fiber, KeypointChain, Point2D, RasterMask,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotateConfig {
    pub segment: SegmentConfig,
    pub keypoints: usize,
    /// Every `path_stride`-th path pixel (plus the last one) becomes a spline
    /// knot before resampling; this keeps pixel staircases out of the length.
    pub path_stride: usize,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self {
            segment: SegmentConfig::default(),
            keypoints: crate::DEFAULT_KEYPOINT_COUNT,
            path_stride: 5,
        }
    }
}

/// Reasons a human reviewer may want to look at an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QualityFlag {
    /// The segmentation had more than one connected component.
    MultipleComponents,
    /// The skeleton had side branches that were discarded.
    Branched,
    /// The skeleton had no end points.
    Loop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityReport {
    pub component_count: usize,
    /// Side branches of the skeleton beyond the two used by the main path.
    pub branch_count: usize,
    pub flags: Vec<QualityFlag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub fiber: Fiber,
    /// Mask of the component the fiber was extracted from.
    pub mask: RasterMask,
    pub report: QualityReport,
}

fn component_mask(template: &RasterMask, pixels: &[(u32, u32)]) -> RasterMask {
    let mut m = RasterMask::new(template.width(), template.height()).expect("valid canvas");
    for &(x, y) in pixels {
        m.set(x, y, true);
    }
    m
}

/// Semiautomatic annotation of an image showing a single fiber without loops,
/// clutter or overlaps.
///
/// Segments the image, keeps the largest component, thins it, follows the
/// longest skeleton path, turns it into `cfg.keypoints` ordered keypoints and
/// derives width (distance map) and length (spline arc length).
pub fn annotate_fiber(image: &GrayImage, cfg: &AnnotateConfig) -> Result<Annotation> {
    if cfg.keypoints < 2 || cfg.path_stride == 0 {
        return Err(FiberError::InvalidConfig(format!(
            "keypoints must be >= 2 and path stride >= 1 (got {} / {})",
            cfg.keypoints, cfg.path_stride
        )));
    }
    let seg = segment(image, &cfg.segment);
    let components = connected_components(&seg.mask);
    let Some(largest) = components
        .iter()
        .enumerate()
        .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
        .map(|(_, c)| c)
    else {
        return Err(FiberError::NoFiber(if seg.constant_image {
            "image has a single intensity".into()
        } else {
            "segmentation produced no foreground".into()
        }));
    };
    let mask = component_mask(&seg.mask, largest);
    let skeleton = skeletonize(&mask);
    let path = longest_path(&skeleton)?;
    if path.pixels.len() < 2 {
        return Err(FiberError::NoFiber("skeleton is a single pixel".into()));
    }

    let to_point = |&(x, y): &(u32, u32)| Point2D::new(f64::from(x), f64::from(y));
    let mut knots: Vec<Point2D> = path
        .pixels
        .iter()
        .step_by(cfg.path_stride)
        .map(to_point)
        .collect();
    let last = to_point(path.pixels.last().unwrap());
    if *knots.last().unwrap() != last {
        knots.push(last);
    }
    let chain = KeypointChain::new(knots)?;
    let keypoints = order_keypoints(&resample_keypoints(&chain, cfg.keypoints)?);

    let width = estimate_width(&distance_map(&mask), &keypoints)?;
    let length = spline_length(&keypoints);
    let fiber = Fiber::new(keypoints, width, length)?;

    let branch_count = path.endpoint_count.saturating_sub(2);
    let mut flags = Vec::new();
    if components.len() > 1 {
        flags.push(QualityFlag::MultipleComponents);
    }
    if branch_count > 0 {
        flags.push(QualityFlag::Branched);
    }
    if path.is_loop {
        flags.push(QualityFlag::Loop);
    }
    Ok(Annotation {
        fiber,
        mask,
        report: QualityReport {
            component_count: components.len(),
            branch_count,
            flags,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize_chain;

    fn render(kp: &KeypointChain, width: f64, w: u32, h: u32) -> GrayImage {
        let m = rasterize_chain(kp, width, w, h).unwrap();
        let px = m.bits().iter().map(|&b| if b { 200 } else { 40 }).collect();
        GrayImage::new(w, h, px).unwrap()
    }

    #[test]
    fn straight_fiber_round_trip() {
        let kp = KeypointChain::from_xy(&[(50.0, 100.0), (350.0, 100.0)]).unwrap();
        let a = annotate_fiber(&render(&kp, 9.0, 400, 200), &AnnotateConfig::default()).unwrap();
        assert!(
            (a.fiber.width - 9.0).abs() / 9.0 <= 0.15,
            "width {}",
            a.fiber.width
        );
        assert!(
            (a.fiber.length - 300.0).abs() / 300.0 <= 0.05,
            "length {}",
            a.fiber.length
        );
        assert_eq!(a.fiber.keypoints.len(), 40);
        assert!(crate::geometry::satisfies_ordering(&a.fiber.keypoints));
    }

    #[test]
    fn s_curve_round_trip() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let x = 40.0 + i as f64 * 25.0;
                (x, 120.0 + 30.0 * (x / 60.0).sin())
            })
            .collect();
        let kp = KeypointChain::from_xy(&pts).unwrap();
        let truth = spline_length(&kp);
        let a = annotate_fiber(&render(&kp, 11.0, 380, 240), &AnnotateConfig::default()).unwrap();
        assert!(
            (a.fiber.length - truth).abs() / truth <= 0.05,
            "{} vs {truth}",
            a.fiber.length
        );
        assert!(a.report.flags.is_empty(), "{:?}", a.report);
    }

    #[test]
    fn blank_image_has_no_fiber() {
        let img = GrayImage::filled(50, 50, 0).unwrap();
        assert!(matches!(
            annotate_fiber(&img, &AnnotateConfig::default()),
            Err(FiberError::NoFiber(_))
        ));
    }

    #[test]
    fn extra_blob_is_reported() {
        let kp = KeypointChain::from_xy(&[(20.0, 50.0), (180.0, 50.0)]).unwrap();
        let mut m = rasterize_chain(&kp, 8.0, 200, 100).unwrap();
        m.paint_capsule(Point2D::new(100.0, 85.0), Point2D::new(100.0, 85.0), 4.0);
        let px = m.bits().iter().map(|&b| if b { 220 } else { 30 }).collect();
        let a = annotate_fiber(
            &GrayImage::new(200, 100, px).unwrap(),
            &AnnotateConfig::default(),
        )
        .unwrap();
        assert_eq!(a.report.component_count, 2);
        assert!(a.report.flags.contains(&QualityFlag::MultipleComponents));
        assert!((a.fiber.length - 160.0).abs() / 160.0 < 0.05);
    }
}
