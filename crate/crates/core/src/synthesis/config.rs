use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};

/// Closed interval sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueRange {
    pub min: f64,
    pub max: f64,
}

impl ValueRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }

    fn check_positive(&self, name: &str) -> Result<()> {
        if self.min > 0.0 && self.min <= self.max && self.max.is_finite() {
            Ok(())
        } else {
            Err(FiberError::InvalidConfig(format!(
                "{name} range [{}, {}] must be positive and ordered",
                self.min, self.max
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub min: u32,
    pub max: u32,
}

impl CountRange {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(self.min..=self.max)
    }
}

/// Scene generator settings. Every field has a default, so a config file
/// only needs the values it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub fiber_count: CountRange,
    /// Stroke width in pixels.
    pub width: ValueRange,
    /// Target arc length in pixels.
    pub length: ValueRange,
    /// Standard deviation (radians) of the heading change between
    /// consecutive control-polygon steps; 0 gives straight fibers.
    pub curvature: f64,
    pub allow_loops: bool,
    pub allow_clutter: bool,
    pub allow_overlaps: bool,
    pub background: f64,
    pub foreground: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub keypoints: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            canvas_width: 256,
            canvas_height: 256,
            fiber_count: CountRange { min: 1, max: 3 },
            width: ValueRange::new(6.0, 14.0),
            length: ValueRange::new(80.0, 200.0),
            curvature: 0.12,
            allow_loops: false,
            allow_clutter: false,
            allow_overlaps: false,
            background: 40.0,
            foreground: 200.0,
            noise_sigma: 10.0,
            seed: 0,
            keypoints: crate::DEFAULT_KEYPOINT_COUNT,
        }
    }
}

impl SynthConfig {
    pub fn diagonal(&self) -> f64 {
        f64::from(self.canvas_width).hypot(f64::from(self.canvas_height))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FiberError::InvalidConfig(m));
        if self.canvas_width == 0 || self.canvas_height == 0 {
            return bad(format!(
                "canvas must be > 0, got {}x{}",
                self.canvas_width, self.canvas_height
            ));
        }
        if self.fiber_count.min == 0 || self.fiber_count.min > self.fiber_count.max {
            return bad(format!(
                "fiber count range [{}, {}] must be ordered and start at >= 1",
                self.fiber_count.min, self.fiber_count.max
            ));
        }
        self.width.check_positive("width")?;
        self.length.check_positive("length")?;
        if self.length.max > 3.0 * self.diagonal() {
            return bad(format!(
                "length up to {} px cannot be placed on a {}x{} canvas",
                self.length.max, self.canvas_width, self.canvas_height
            ));
        }
        if !(self.curvature >= 0.0 && self.curvature.is_finite()) {
            return bad(format!("curvature must be >= 0, got {}", self.curvature));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!(
                "noise sigma must be >= 0, got {}",
                self.noise_sigma
            ));
        }
        for (name, v) in [
            ("background", self.background),
            ("foreground", self.foreground),
        ] {
            if !(0.0..=255.0).contains(&v) {
                return bad(format!("{name} intensity {v} outside [0, 255]"));
            }
        }
        if self.keypoints < 2 {
            return bad(format!(
                "keypoint count must be >= 2, got {}",
                self.keypoints
            ));
        }
        Ok(())
    }
}
