use super::chain::{Fiber, KeypointChain, Point2D};
use super::spline::CubicSpline;
use crate::error::{FiberError, Result};

/// Largest allowed distance between consecutive spline samples when a fiber
/// is drawn.
pub const MAX_SAMPLE_SPACING: f64 = 0.25;

/// Row-major binary mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BoundingBox {
    pub fn area(&self) -> u64 {
        u64::from(self.x1 - self.x0 + 1) * u64::from(self.y1 - self.y0 + 1)
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let ix0 = self.x0.max(other.x0);
        let iy0 = self.y0.max(other.y0);
        let ix1 = self.x1.min(other.x1);
        let iy1 = self.y1.min(other.y1);
        let inter = if ix0 > ix1 || iy0 > iy1 {
            0
        } else {
            u64::from(ix1 - ix0 + 1) * u64::from(iy1 - iy0 + 1)
        };
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }
}

impl RasterMask {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(FiberError::invalid(format!(
                "mask dimensions must be > 0, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        })
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        if bits.len() != mask.bits.len() {
            return Err(FiberError::invalid(format!(
                "expected {} mask bits for {width}x{height}, got {}",
                mask.bits.len(),
                bits.len()
            )));
        }
        mask.bits = bits;
        Ok(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn same_canvas(&self, other: &RasterMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.index(x, y)]
    }

    /// Like [`get`](Self::get) but returns false outside the canvas.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < i64::from(self.width)
            && y < i64::from(self.height)
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Coordinates of set pixels in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i as u32) % w, (i as u32) / w))
    }

    pub fn intersection_count(&self, other: &RasterMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a && **b)
            .count()
    }

    pub fn union_count(&self, other: &RasterMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a || **b)
            .count()
    }

    pub fn union_with(&mut self, other: &RasterMask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    pub fn is_subset_of(&self, other: &RasterMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Tight axis-aligned box around the set pixels.
    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let mut iter = self.iter_set();
        let (x, y) = iter.next()?;
        let init = BoundingBox {
            x0: x,
            y0: y,
            x1: x,
            y1: y,
        };
        Some(iter.fold(init, |b, (x, y)| BoundingBox {
            x0: b.x0.min(x),
            y0: b.y0.min(y),
            x1: b.x1.max(x),
            y1: b.y1.max(y),
        }))
    }

    /// Sets every pixel whose center lies within `radius` of the segment
    /// `a`–`b` (a disc when `a == b`). Pixels off the canvas are ignored.
    pub fn paint_capsule(&mut self, a: Point2D, b: Point2D, radius: f64) {
        let y_lo = (a.y.min(b.y) - radius).ceil().max(0.0);
        let y_hi = (a.y.max(b.y) + radius)
            .floor()
            .min(f64::from(self.height) - 1.0);
        if y_lo > y_hi {
            return;
        }
        let max_x = f64::from(self.width) - 1.0;
        for row in (y_lo as u32)..=(y_hi as u32) {
            let Some((lo, hi)) = capsule_row_interval(a, b, radius, f64::from(row)) else {
                continue;
            };
            let lo = lo.ceil().max(0.0);
            let hi = hi.floor().min(max_x);
            if lo > hi {
                continue;
            }
            let start = self.index(lo as u32, row);
            let end = self.index(hi as u32, row);
            self.bits[start..=end].iter_mut().for_each(|b| *b = true);
        }
    }
}

fn disc_row_interval(c: Point2D, r: f64, y: f64) -> Option<(f64, f64)> {
    let dy = y - c.y;
    let h2 = r * r - dy * dy;
    (h2 >= 0.0).then(|| {
        let h = h2.sqrt();
        (c.x - h, c.x + h)
    })
}

/// Solves `lo <= slope * x + offset <= hi` for `x`.
fn linear_band(slope: f64, offset: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if slope.abs() < 1e-12 {
        return (offset >= lo && offset <= hi).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let x0 = (lo - offset) / slope;
    let x1 = (hi - offset) / slope;
    Some((x0.min(x1), x0.max(x1)))
}

/// Horizontal slice of a capsule at height `y`. The capsule is convex, so the
/// slice is the hull of the slices of its two end discs and its rectangle.
fn capsule_row_interval(a: Point2D, b: Point2D, r: f64, y: f64) -> Option<(f64, f64)> {
    let mut acc: Option<(f64, f64)> = None;
    let mut merge = |iv: Option<(f64, f64)>| {
        if let Some((lo, hi)) = iv {
            acc = Some(match acc {
                Some((l, h)) => (l.min(lo), h.max(hi)),
                None => (lo, hi),
            });
        }
    };
    merge(disc_row_interval(a, r, y));
    merge(disc_row_interval(b, r, y));
    let len = a.distance(&b);
    if len > 0.0 {
        let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
        let (nx, ny) = (-uy, ux);
        let along = linear_band(ux, -a.x * ux + (y - a.y) * uy, 0.0, len);
        let across = linear_band(nx, -a.x * nx + (y - a.y) * ny, -r, r);
        if let (Some((l0, h0)), Some((l1, h1))) = (along, across) {
            let (lo, hi) = (l0.max(l1), h0.min(h1));
            if lo <= hi {
                merge(Some((lo, hi)));
            }
        }
    }
    acc
}

/// Draws the spline through `keypoints` as a stroke of the given width:
/// the union of discs of radius `width / 2` swept along the densely sampled
/// curve, clipped to the canvas.
pub fn rasterize_chain(
    keypoints: &KeypointChain,
    width: f64,
    canvas_w: u32,
    canvas_h: u32,
) -> Result<RasterMask> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(FiberError::invalid(format!(
            "stroke width must be > 0, got {width}"
        )));
    }
    let mut mask = RasterMask::new(canvas_w, canvas_h)?;
    let samples = CubicSpline::through(keypoints).dense_polyline(MAX_SAMPLE_SPACING);
    let radius = 0.5 * width;
    for pair in samples.windows(2) {
        mask.paint_capsule(pair[0], pair[1], radius);
    }
    Ok(mask)
}

pub fn rasterize_fiber(fiber: &Fiber, canvas_w: u32, canvas_h: u32) -> Result<RasterMask> {
    rasterize_chain(&fiber.keypoints, fiber.width, canvas_w, canvas_h)
}
