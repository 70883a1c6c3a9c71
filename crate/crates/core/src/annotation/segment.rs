use super::image::GrayImage;
use crate::geometry::RasterMask;

/// Which side of the threshold is foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    #[default]
    Bright,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentConfig {
    /// Median window is `(2r + 1) x (2r + 1)`; 0 disables denoising.
    pub denoise_radius: u32,
    pub polarity: Polarity,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            denoise_radius: 1,
            polarity: Polarity::Bright,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub mask: RasterMask,
    /// Otsu threshold; pixels above it are "bright". `None` for constant images.
    pub threshold: Option<u8>,
    /// Set when the (denoised) image has a single intensity and no threshold exists.
    pub constant_image: bool,
}

/// Median filter with edge replication.
pub fn median_filter(image: &GrayImage, radius: u32) -> GrayImage {
    if radius == 0 {
        return image.clone();
    }
    let (w, h) = (image.width() as i64, image.height() as i64);
    let r = i64::from(radius);
    let mut window = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            window.clear();
            for dy in -r..=r {
                let yy = (y + dy).clamp(0, h - 1) as u32;
                for dx in -r..=r {
                    let xx = (x + dx).clamp(0, w - 1) as u32;
                    window.push(image.get(xx, yy));
                }
            }
            let mid = window.len() / 2;
            let (_, m, _) = window.select_nth_unstable(mid);
            out.set(x as u32, y as u32, *m);
        }
    }
    out
}

/// Otsu's threshold: the level `t` maximising the between-class variance of
/// `{v <= t}` and `{v > t}`. Returns `None` if the image has one intensity.
pub fn otsu_threshold(image: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in image.pixels() {
        hist[v as usize] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total = image.pixels().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, 0u8);
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mean0 = sum0 / w0;
        let mean1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mean0 - mean1).powi(2);
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    Some(best.1)
}

/// Median denoising followed by a global Otsu threshold.
pub fn segment(image: &GrayImage, cfg: &SegmentConfig) -> Segmentation {
    let denoised = median_filter(image, cfg.denoise_radius);
    let threshold = otsu_threshold(&denoised);
    let bits = match threshold {
        None => vec![false; denoised.pixels().len()],
        Some(t) => denoised
            .pixels()
            .iter()
            .map(|&v| match cfg.polarity {
                Polarity::Bright => v > t,
                Polarity::Dark => v <= t,
            })
            .collect(),
    };
    let mask = RasterMask::from_bits(image.width(), image.height(), bits)
        .expect("image dimensions already validated");
    Segmentation {
        mask,
        threshold,
        constant_image: threshold.is_none(),
    }
}
