use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::SynthConfig;
use crate::error::{FiberError, Result};
use crate::geometry::{
    order_keypoints, resample_keypoints, spline_length, CubicSpline, Fiber, KeypointChain, Point2D,
};

const CONTROL_STEPS: usize = 40;
const LOOP_STEPS: usize = 14;
const LOOP_PROBABILITY: f64 = 0.5;
const MAX_ATTEMPTS: usize = 200;

fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Point2D, a: Point2D, b: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point2D, b: Point2D, c: Point2D, d: Point2D) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// Whether the spline through `chain` crosses itself, tested on a polyline
/// with at most 0.5 px spacing (non-adjacent pieces only).
pub fn self_intersects(chain: &KeypointChain) -> bool {
    let pts = CubicSpline::through(chain).dense_polyline(0.5);
    let n = pts.len();
    (0..n.saturating_sub(1))
        .any(|i| (i + 2..n - 1).any(|j| segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])))
}

/// True if two parts of the curve that are more than `skip` apart along the
/// curve come closer than `clearance`. Such fibers would touch themselves
/// once drawn with their width.
fn folds_back(chain: &KeypointChain, clearance: f64, skip: f64) -> bool {
    let pts = CubicSpline::through(chain).dense_polyline(1.0);
    let mut arc = vec![0.0; pts.len()];
    for i in 1..pts.len() {
        arc[i] = arc[i - 1] + pts[i].distance(&pts[i - 1]);
    }
    let c2 = clearance * clearance;
    (0..pts.len()).any(|i| {
        let first = arc.partition_point(|&s| s < arc[i] + skip);
        (first..pts.len()).any(|j| pts[i].distance_sq(&pts[j]) < c2)
    })
}

fn control_polygon<R: Rng + ?Sized>(
    cfg: &SynthConfig,
    with_loop: bool,
    rng: &mut R,
) -> Vec<Point2D> {
    let mut heading = rng.random_range(0.0..TAU);
    let turn = Normal::new(0.0, cfg.curvature).expect("curvature validated");
    let loop_start = with_loop.then(|| rng.random_range(8..=CONTROL_STEPS - 8 - LOOP_STEPS));
    let loop_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut pts = vec![Point2D::new(0.0, 0.0)];
    for step in 0..CONTROL_STEPS {
        if step > 0 {
            heading += turn.sample(rng);
        }
        if loop_start.is_some_and(|s| (s..s + LOOP_STEPS).contains(&step)) {
            heading += loop_sign * 1.1 * TAU / LOOP_STEPS as f64;
        }
        let last = *pts.last().unwrap();
        pts.push(Point2D::new(last.x + heading.cos(), last.y + heading.sin()));
    }
    pts
}

/// Draws one fiber: a random-walk control polygon scaled to a length drawn
/// from `cfg.length`, resampled to `cfg.keypoints` ordered keypoints and
/// placed on the canvas (clipped only if it cannot fit). Loops are formed only
/// when `cfg.allow_loops`; otherwise curves that cross or fold back onto
/// themselves are redrawn.
pub fn sample_fiber<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> Result<Fiber> {
    cfg.validate()?;
    for _ in 0..MAX_ATTEMPTS {
        let target = cfg.length.sample(rng);
        let width = cfg.width.sample(rng);
        let with_loop = cfg.allow_loops && rng.random_bool(LOOP_PROBABILITY);
        let polygon = control_polygon(cfg, with_loop, rng);

        let raw = KeypointChain::new(polygon)?;
        let scale = target / spline_length(&raw);
        let scaled = raw.map_points(|p| Point2D::new(p.x * scale, p.y * scale))?;
        let chain = resample_keypoints(&scaled, cfg.keypoints)?;
        if !with_loop && folds_back(&chain, width + 2.0, 2.0 * width + 4.0) {
            continue;
        }

        let dense = CubicSpline::through(&chain).dense_polyline(1.0);
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &dense {
            (x0, y0, x1, y1) = (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y));
        }
        let margin = 0.5 * width + 2.0;
        let mut offset = |lo: f64, hi: f64, extent: u32| {
            let (a, b) = (margin - lo, f64::from(extent) - 1.0 - margin - hi);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            if a == b {
                a
            } else {
                rng.random_range(a..=b)
            }
        };
        let (dx, dy) = (
            offset(x0, x1, cfg.canvas_width),
            offset(y0, y1, cfg.canvas_height),
        );
        let placed = chain.map_points(|p| Point2D::new(p.x + dx, p.y + dy))?;
        let keypoints = order_keypoints(&placed);
        let length = spline_length(&keypoints);
        return Fiber::new(keypoints, width, length);
    }
    Err(FiberError::InvalidConfig(format!(
        "no fiber without self-contact after {MAX_ATTEMPTS} attempts; lower the curvature or the width"
    )))
}
