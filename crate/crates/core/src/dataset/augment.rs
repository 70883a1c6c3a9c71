use rand::Rng;

use crate::annotation::GrayImage;
use crate::error::{FiberError, Result};
use crate::geometry::{order_keypoints, Fiber, Point2D};

/// Random input augmentation. Intensities map as
/// `out = contrast * (in - 128) + brightness * 128`, so both factors at 1
/// leave the image unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentParams {
    pub flip_lr_prob: f64,
    pub flip_ud_prob: f64,
    pub contrast: (f64, f64),
    pub brightness: (f64, f64),
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            flip_lr_prob: 0.5,
            flip_ud_prob: 0.5,
            contrast: (0.5, 1.5),
            brightness: (0.5, 1.5),
        }
    }
}

impl AugmentParams {
    pub fn validate(&self) -> Result<()> {
        for p in [self.flip_lr_prob, self.flip_ud_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(FiberError::InvalidConfig(format!(
                    "flip probability {p} outside [0, 1]"
                )));
            }
        }
        for (name, (lo, hi)) in [("contrast", self.contrast), ("brightness", self.brightness)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(FiberError::InvalidConfig(format!(
                    "{name} range [{lo}, {hi}] must be positive and ordered"
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<AugmentDecision> {
        self.validate()?;
        let uniform = |rng: &mut R, (lo, hi): (f64, f64)| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            }
        };
        Ok(AugmentDecision {
            flip_lr: rng.random_bool(self.flip_lr_prob),
            flip_ud: rng.random_bool(self.flip_ud_prob),
            contrast: uniform(rng, self.contrast),
            brightness: uniform(rng, self.brightness),
        })
    }
}

/// A concrete augmentation drawn from [`AugmentParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentDecision {
    pub flip_lr: bool,
    pub flip_ud: bool,
    pub contrast: f64,
    pub brightness: f64,
}

impl AugmentDecision {
    pub const IDENTITY: AugmentDecision = AugmentDecision {
        flip_lr: false,
        flip_ud: false,
        contrast: 1.0,
        brightness: 1.0,
    };
}

/// Applies flips to pixels and keypoints, then re-orders every fiber and
/// adjusts intensities. Widths and lengths are carried over unchanged.
pub fn apply_augmentation(
    image: &GrayImage,
    fibers: &[Fiber],
    d: &AugmentDecision,
) -> Result<(GrayImage, Vec<Fiber>)> {
    let (w, h) = (image.width(), image.height());
    let mut out = GrayImage::filled(w, h, 0)?;
    for y in 0..h {
        for x in 0..w {
            let sx = if d.flip_lr { w - 1 - x } else { x };
            let sy = if d.flip_ud { h - 1 - y } else { y };
            let v = f64::from(image.get(sx, sy));
            let mapped = d.contrast * (v - 128.0) + d.brightness * 128.0;
            out.set(x, y, mapped.round().clamp(0.0, 255.0) as u8);
        }
    }
    let (wf, hf) = (f64::from(w) - 1.0, f64::from(h) - 1.0);
    let fibers = fibers
        .iter()
        .map(|f| {
            let kp = f.keypoints.map_points(|p| {
                Point2D::new(
                    if d.flip_lr { wf - p.x } else { p.x },
                    if d.flip_ud { hf - p.y } else { p.y },
                )
            })?;
            Fiber::new(order_keypoints(&kp), f.width, f.length)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((out, fibers))
}

pub fn augment<R: Rng + ?Sized>(
    image: &GrayImage,
    fibers: &[Fiber],
    params: &AugmentParams,
    rng: &mut R,
) -> Result<(GrayImage, Vec<Fiber>)> {
    apply_augmentation(image, fibers, &params.sample(rng)?)
}
