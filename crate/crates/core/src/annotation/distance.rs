use crate::error::{FiberError, Result};
use crate::geometry::{KeypointChain, RasterMask};

/// Euclidean distance from each pixel to the nearest background pixel.
/// Pixels outside the canvas count as background.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl DistanceMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Bilinear interpolation at a continuous position inside the canvas.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        let max_x = f64::from(self.width - 1);
        let max_y = f64::from(self.height - 1);
        if !(x >= 0.0 && y >= 0.0 && x <= max_x && y <= max_y) {
            return Err(FiberError::invalid(format!(
                "position ({x}, {y}) outside {}x{} distance map",
                self.width, self.height
            )));
        }
        let (x0, y0) = (x.floor() as u32, y.floor() as u32);
        let (x1, y1) = ((x0 + 1).min(self.width - 1), (y0 + 1).min(self.height - 1));
        let (fx, fy) = (x - f64::from(x0), y - f64::from(y0));
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        Ok(top * (1.0 - fy) + bottom * fy)
    }
}

const FAR: f64 = 1e20;

/// Exact 1-D squared distance transform (lower envelope of parabolas).
fn transform_1d(f: &[f64], out: &mut [f64], hull: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    let n = f.len();
    hull.clear();
    bounds.clear();
    hull.push(0);
    bounds.push(f64::NEG_INFINITY);
    for q in 1..n {
        let mut s;
        loop {
            let v = *hull.last().unwrap();
            s = ((f[q] + (q * q) as f64) - (f[v] + (v * v) as f64)) / (2.0 * (q as f64 - v as f64));
            // bounds[0] is -inf, so the first parabola is never popped.
            if s <= *bounds.last().unwrap() {
                hull.pop();
                bounds.pop();
            } else {
                break;
            }
        }
        hull.push(q);
        bounds.push(s);
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < hull.len() && bounds[k + 1] < q as f64 {
            k += 1;
        }
        let v = hull[k];
        let d = q as f64 - v as f64;
        *o = d * d + f[v];
    }
}

/// Exact Euclidean distance transform with a virtual background frame
/// around the canvas.
pub fn distance_map(mask: &RasterMask) -> DistanceMap {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let (pw, ph) = (w + 2, h + 2);
    let mut grid = vec![0.0; pw * ph];
    for (x, y) in mask.iter_set() {
        grid[(y as usize + 1) * pw + x as usize + 1] = FAR;
    }
    let (mut hull, mut bounds) = (Vec::new(), Vec::new());
    let mut column = vec![0.0; ph];
    let mut column_out = vec![0.0; ph];
    for x in 0..pw {
        for y in 0..ph {
            column[y] = grid[y * pw + x];
        }
        transform_1d(&column, &mut column_out, &mut hull, &mut bounds);
        for y in 0..ph {
            grid[y * pw + x] = column_out[y];
        }
    }
    let mut row_out = vec![0.0; pw];
    for y in 0..ph {
        transform_1d(
            &grid[y * pw..(y + 1) * pw],
            &mut row_out,
            &mut hull,
            &mut bounds,
        );
        grid[y * pw..(y + 1) * pw].copy_from_slice(&row_out);
    }
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            values.push(grid[(y + 1) * pw + x + 1].sqrt());
        }
    }
    DistanceMap {
        width: mask.width(),
        height: mask.height(),
        values,
    }
}

/// Twice the mean distance-map value at the keypoints.
pub fn estimate_width(dmap: &DistanceMap, keypoints: &KeypointChain) -> Result<f64> {
    let mut sum = 0.0;
    for p in keypoints.points() {
        sum += dmap.sample(p.x, p.y)?;
    }
    Ok(2.0 * sum / keypoints.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(mask: &RasterMask) -> Vec<f64> {
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        let mut background = Vec::new();
        for y in -1..=h {
            for x in -1..=w {
                if !mask.get_signed(x, y) {
                    background.push((x, y));
                }
            }
        }
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let d = background
                    .iter()
                    .map(|&(bx, by)| (((bx - x).pow(2) + (by - y).pow(2)) as f64).sqrt())
                    .fold(f64::INFINITY, f64::min);
                out.push(d);
            }
        }
        out
    }

    #[test]
    fn single_pixel() {
        let mut m = RasterMask::new(5, 5).unwrap();
        m.set(2, 2, true);
        let d = distance_map(&m);
        assert_eq!(d.get(2, 2), 1.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn full_square_uses_virtual_border() {
        let m = RasterMask::from_bits(21, 21, vec![true; 441]).unwrap();
        let d = distance_map(&m);
        assert_eq!(d.get(10, 10), 11.0);
        assert_eq!(d.values(), brute_force(&m).as_slice());
    }

    #[test]
    fn empty_mask_is_zero() {
        let m = RasterMask::new(7, 4).unwrap();
        assert!(distance_map(&m).values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn band_width_has_one_pixel_bias() {
        let mut m = RasterMask::new(60, 31).unwrap();
        for y in 10..=20 {
            for x in 0..60 {
                m.set(x, y, true);
            }
        }
        let d = distance_map(&m);
        let kp = KeypointChain::from_xy(&[(15.0, 15.0), (30.0, 15.0), (45.0, 15.0)]).unwrap();
        assert!((estimate_width(&d, &kp).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn width_is_twice_mean() {
        let mut m = RasterMask::new(30, 30).unwrap();
        for y in 0..30 {
            for x in 0..30 {
                m.set(x, y, true);
            }
        }
        let d = distance_map(&m);
        // Distances 4, 5, 6 to the virtual frame on the left edge.
        let kp = KeypointChain::from_xy(&[(3.0, 15.0), (4.0, 15.0), (5.0, 15.0)]).unwrap();
        assert!((estimate_width(&d, &kp).unwrap() - 10.0).abs() < 1e-12);
        let outside = KeypointChain::from_xy(&[(3.0, 15.0), (30.5, 15.0)]).unwrap();
        assert!(estimate_width(&d, &outside).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force(bits in prop::collection::vec(prop::bool::weighted(0.7), 1..=144), w in 1u32..12) {
            let h = (bits.len() as u32 / w).max(1);
            let n = (w * h) as usize;
            prop_assume!(bits.len() >= n);
            let m = RasterMask::from_bits(w, h, bits[..n].to_vec()).unwrap();
            let d = distance_map(&m);
            for (a, b) in d.values().iter().zip(brute_force(&m)) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
