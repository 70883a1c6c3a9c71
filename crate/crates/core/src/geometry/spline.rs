use super::chain::{KeypointChain, Point2D};
use crate::error::{FiberError, Result};

// 5-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

const LENGTH_REL_TOL: f64 = 1e-10;
const MAX_ADAPTIVE_DEPTH: u32 = 40;

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn adaptive_gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gauss_legendre(f, a, mid);
    let right = gauss_legendre(f, mid, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= LENGTH_REL_TOL * refined.abs().max(1e-300) {
        return refined;
    }
    adaptive_gauss_legendre(f, a, mid, left, depth - 1)
        + adaptive_gauss_legendre(f, mid, b, right, depth - 1)
}

/// Natural cubic spline through a keypoint chain with uniform knots
/// `t_i = i / (K - 1)`.
///
/// Each segment is stored as a cubic in its local parameter `u ∈ [0, 1]`,
/// `p(u) = a + b·u + c·u² + d·u³`, separately for `x` and `y`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    coeff_x: Vec<[f64; 4]>,
    coeff_y: Vec<[f64; 4]>,
}

impl CubicSpline {
    pub fn through(chain: &KeypointChain) -> Self {
        let pts = chain.points();
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        Self {
            coeff_x: natural_coefficients(&xs),
            coeff_y: natural_coefficients(&ys),
        }
    }

    pub fn segment_count(&self) -> usize {
        self.coeff_x.len()
    }

    /// Maps a global parameter `t ∈ [0, 1]` to `(segment, local u)`.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.segment_count();
        let s = t.clamp(0.0, 1.0) * n as f64;
        let seg = (s.floor() as usize).min(n - 1);
        (seg, s - seg as f64)
    }

    pub fn eval(&self, t: f64) -> Point2D {
        let (seg, u) = self.locate(t);
        self.eval_local(seg, u)
    }

    pub fn eval_local(&self, seg: usize, u: f64) -> Point2D {
        Point2D::new(horner(&self.coeff_x[seg], u), horner(&self.coeff_y[seg], u))
    }

    /// Derivative with respect to the local parameter.
    pub fn derivative_local(&self, seg: usize, u: f64) -> Point2D {
        Point2D::new(
            horner_derivative(&self.coeff_x[seg], u),
            horner_derivative(&self.coeff_y[seg], u),
        )
    }

    fn speed_local(&self, seg: usize, u: f64) -> f64 {
        let d = self.derivative_local(seg, u);
        (d.x * d.x + d.y * d.y).sqrt()
    }

    pub fn segment_length(&self, seg: usize) -> f64 {
        let f = |u: f64| self.speed_local(seg, u);
        let whole = gauss_legendre(&f, 0.0, 1.0);
        adaptive_gauss_legendre(&f, 0.0, 1.0, whole, MAX_ADAPTIVE_DEPTH)
    }

    /// Arc length of the whole curve by adaptive Gauss-Legendre quadrature.
    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|s| self.segment_length(s))
            .sum()
    }

    /// Samples the curve so that consecutive samples are at most
    /// `max_spacing` apart along the curve. Both end points are included.
    pub fn dense_polyline(&self, max_spacing: f64) -> Vec<Point2D> {
        let mut out = Vec::new();
        for seg in 0..self.segment_count() {
            let peak = (0..=16)
                .map(|j| self.speed_local(seg, j as f64 / 16.0))
                .fold(0.0f64, f64::max);
            let steps = ((1.25 * peak / max_spacing).ceil() as usize).max(1);
            let start = if seg == 0 { 0 } else { 1 };
            for j in start..=steps {
                out.push(self.eval_local(seg, j as f64 / steps as f64));
            }
        }
        out
    }
}

fn horner(c: &[f64; 4], u: f64) -> f64 {
    c[0] + u * (c[1] + u * (c[2] + u * c[3]))
}

fn horner_derivative(c: &[f64; 4], u: f64) -> f64 {
    c[1] + u * (2.0 * c[2] + u * 3.0 * c[3])
}

/// Per-segment local cubic coefficients of the natural spline through
/// `values` at uniform knots. With `m_i = h² y''(t_i)` the knot spacing drops
/// out and the system is `m_{i-1} + 4 m_i + m_{i+1} = 6 Δ²y_i`, `m_0 = m_n = 0`.
fn natural_coefficients(values: &[f64]) -> Vec<[f64; 4]> {
    let n = values.len() - 1;
    let mut m = vec![0.0; n + 1];
    if n >= 2 {
        // Thomas algorithm on the interior unknowns m_1..m_{n-1}
        // (sub/super diagonal 1, diagonal 4).
        let size = n - 1;
        let mut c_prime = vec![0.0; size];
        let mut d_prime = vec![0.0; size];
        for i in 0..size {
            let k = i + 1;
            let rhs = 6.0 * (values[k + 1] - 2.0 * values[k] + values[k - 1]);
            let (prev_c, prev_d) = if i == 0 {
                (0.0, 0.0)
            } else {
                (c_prime[i - 1], d_prime[i - 1])
            };
            let denom = 4.0 - prev_c;
            c_prime[i] = 1.0 / denom;
            d_prime[i] = (rhs - prev_d) / denom;
        }
        for i in (0..size).rev() {
            m[i + 1] = d_prime[i] - c_prime[i] * m[i + 2];
        }
    }
    (0..n)
        .map(|i| {
            let (y0, y1) = (values[i], values[i + 1]);
            let (m0, m1) = (m[i], m[i + 1]);
            [
                y0,
                (y1 - y0) - (2.0 * m0 + m1) / 6.0,
                m0 / 2.0,
                (m1 - m0) / 6.0,
            ]
        })
        .collect()
}

/// Cumulative arc-length table over a spline, used to place points at given
/// arc-length positions.
/// Cumulative arc length over quadrature cells, refined per segment until a
/// single Gauss-Legendre rule is converged on every cell. Inversion runs a
/// safeguarded Newton iteration inside one cell.
#[derive(Debug, Clone)]
pub struct ArcLengthTable {
    spline: CubicSpline,
    cells: Vec<(usize, f64, f64)>,
    cumulative: Vec<f64>,
}

impl ArcLengthTable {
    pub fn new(spline: CubicSpline) -> Self {
        let mut table = Self {
            cells: Vec::with_capacity(spline.segment_count() * 2),
            cumulative: vec![0.0],
            spline,
        };
        for seg in 0..table.spline.segment_count() {
            let whole = gauss_legendre(&|u| table.spline.speed_local(seg, u), 0.0, 1.0);
            table.refine(seg, 0.0, 1.0, whole, MAX_ADAPTIVE_DEPTH);
        }
        table
    }

    fn refine(&mut self, seg: usize, a: f64, b: f64, whole: f64, depth: u32) {
        let f = |u: f64| self.spline.speed_local(seg, u);
        let mid = 0.5 * (a + b);
        let (left, right) = (gauss_legendre(&f, a, mid), gauss_legendre(&f, mid, b));
        if depth == 0
            || (left + right - whole).abs() <= LENGTH_REL_TOL * 1e-2 * (left + right).max(1e-12)
        {
            let acc = self.cumulative[self.cumulative.len() - 1];
            self.cells.push((seg, a, mid));
            self.cumulative.push(acc + left);
            self.cells.push((seg, mid, b));
            self.cumulative.push(acc + left + right);
            return;
        }
        self.refine(seg, a, mid, left, depth - 1);
        self.refine(seg, mid, b, right, depth - 1);
    }

    pub fn for_chain(chain: &KeypointChain) -> Self {
        Self::new(CubicSpline::through(chain))
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }

    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// Index of the last cell whose start is <= `s`.
    fn cell_containing(&self, s: f64) -> usize {
        self.cumulative[..self.cells.len()]
            .partition_point(|&c| c <= s)
            .saturating_sub(1)
    }

    fn point_in_cell(&self, cell: usize, s: f64) -> Point2D {
        let (seg, u0, u1) = self.cells[cell];
        let start = self.cumulative[cell];
        let span = self.cumulative[cell + 1] - start;
        if span <= 0.0 {
            return self.spline.eval_local(seg, u0);
        }
        let speed = |u: f64| self.spline.speed_local(seg, u);
        let tol = 1e-13 * self.total().max(1.0);
        let (mut lo, mut hi) = (u0, u1);
        let mut u = u0 + (s - start) / span * (u1 - u0);
        for _ in 0..60 {
            let residual = start + gauss_legendre(&speed, u0, u) - s;
            if residual.abs() <= tol {
                break;
            }
            if residual < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let d = speed(u);
            let newton = u - residual / d;
            u = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        self.spline.eval_local(seg, u)
    }

    /// Point at arc length `s` from the start (clamped to the curve).
    pub fn point_at_length(&self, s: f64) -> Point2D {
        let s = s.clamp(0.0, self.total());
        self.point_in_cell(self.cell_containing(s), s)
    }

    /// Point at fraction `f ∈ [0, 1]` of the total arc length.
    pub fn point_at_fraction(&self, f: f64) -> Point2D {
        self.point_at_length(f * self.total())
    }

    /// `n` points at equal arc-length fractions `i / (n - 1)`.
    pub fn equal_spacing(&self, n: usize) -> Vec<Point2D> {
        if n == 1 {
            return vec![self.point_at_length(0.0)];
        }
        let total = self.total();
        let last = self.cells.len() - 1;
        let mut cell = 0;
        (0..n)
            .map(|i| {
                let s = (total * (i as f64 / (n - 1) as f64)).clamp(0.0, total);
                while cell < last && self.cumulative[cell + 1] <= s {
                    cell += 1;
                }
                self.point_in_cell(cell, s)
            })
            .collect()
    }
}

/// Point on the uniform cubic spline through `chain` at parameter
/// `t ∈ [0, 1]`; keypoint `i` sits at `t = i / (K - 1)`.
pub fn spline_interpolate(chain: &KeypointChain, t: f64) -> Result<Point2D> {
    if !(0.0..=1.0).contains(&t) {
        return Err(FiberError::invalid(format!(
            "spline parameter {t} outside [0, 1]"
        )));
    }
    Ok(CubicSpline::through(chain).eval(t))
}

/// Arc length of the uniform cubic spline through `chain`.
pub fn spline_length(chain: &KeypointChain) -> f64 {
    CubicSpline::through(chain).length()
}

/// Resamples `chain` to `k` keypoints at equal arc-length spacing along its
/// spline. The end points are copied exactly.
pub fn resample_keypoints(chain: &KeypointChain, k: usize) -> Result<KeypointChain> {
    resample_from_table(&ArcLengthTable::for_chain(chain), chain, k)
}

/// Resampling with a precomputed table of `chain`'s spline.
pub(crate) fn resample_from_table(
    table: &ArcLengthTable,
    chain: &KeypointChain,
    k: usize,
) -> Result<KeypointChain> {
    if k < 2 {
        return Err(FiberError::invalid(format!(
            "cannot resample to {k} keypoints (need >= 2)"
        )));
    }
    let mut points = table.equal_spacing(k);
    points[0] = chain.first();
    points[k - 1] = chain.last();
    KeypointChain::new(points)
}
