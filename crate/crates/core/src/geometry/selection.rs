//! Approximation quality of a resampled keypoint chain (SSR, BIC) and the
//! per-dataset optimum keypoint count.

use super::chain::{KeypointChain, Point2D};
use super::spline::{resample_from_table, ArcLengthTable};
use crate::error::{FiberError, Result};
use crate::par;

/// SSR values below this floor are clamped so the BIC stays finite for
/// perfect fits.
pub const SSR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsrConfig {
    /// Number of paired samples `N` drawn from each spline.
    pub sample_count: usize,
}

impl Default for SsrConfig {
    fn default() -> Self {
        Self { sample_count: 200 }
    }
}

impl SsrConfig {
    fn validate(&self) -> Result<()> {
        if self.sample_count < 2 {
            return Err(FiberError::invalid(format!(
                "SSR needs at least 2 samples, got {}",
                self.sample_count
            )));
        }
        Ok(())
    }
}

/// Search space for [`optimal_keypoint_count`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeypointSearch {
    pub min_k: usize,
    pub max_k: usize,
    /// Percentile (0, 100] of the per-fiber optima, nearest-rank.
    pub percentile: f64,
    pub ssr: SsrConfig,
}

impl Default for KeypointSearch {
    fn default() -> Self {
        Self {
            min_k: 4,
            max_k: 100,
            percentile: 90.0,
            ssr: SsrConfig::default(),
        }
    }
}

fn sum_squared_residuals(a: &[Point2D], b: &[Point2D]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p.x - q.x).powi(2) + (p.y - q.y).powi(2))
        .sum()
}

/// Sum of squared residuals between `N` pairs of points taken at equal
/// arc-length fractions `i / (N - 1)` on both splines.
pub fn ssr(approx: &KeypointChain, truth: &KeypointChain, cfg: &SsrConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.sample_count;
    let a = ArcLengthTable::for_chain(approx).equal_spacing(n);
    let t = ArcLengthTable::for_chain(truth).equal_spacing(n);
    Ok(sum_squared_residuals(&a, &t))
}

/// `N·ln(SSR/N) + k·ln(N)` with SSR clamped to [`SSR_FLOOR`].
pub fn bic_from_ssr(ssr: f64, sample_count: usize, k: usize) -> f64 {
    let n = sample_count as f64;
    n * (ssr.max(SSR_FLOOR) / n).ln() + k as f64 * n.ln()
}

/// Bayesian information criterion of approximating `truth` by `approx`
/// using `k` keypoints.
pub fn bic(
    approx: &KeypointChain,
    truth: &KeypointChain,
    k: usize,
    cfg: &SsrConfig,
) -> Result<f64> {
    if k < 2 {
        return Err(FiberError::invalid(format!("BIC needs k >= 2, got {k}")));
    }
    let residual = ssr(approx, truth, cfg)?;
    Ok(bic_from_ssr(residual, cfg.sample_count, k))
}

fn validate_search(search: &KeypointSearch) -> Result<()> {
    search.ssr.validate()?;
    if search.min_k < 2 || search.max_k < search.min_k {
        return Err(FiberError::invalid(format!(
            "invalid keypoint range [{}, {}]",
            search.min_k, search.max_k
        )));
    }
    if !(search.percentile > 0.0 && search.percentile <= 100.0) {
        return Err(FiberError::invalid(format!(
            "percentile {} outside (0, 100]",
            search.percentile
        )));
    }
    Ok(())
}

/// Keypoint count in the search range that minimises the BIC of
/// `resample_keypoints(truth, k)` against `truth`. Ties go to the smaller `k`.
pub fn optimal_keypoint_count_for(truth: &KeypointChain, search: &KeypointSearch) -> Result<usize> {
    validate_search(search)?;
    let n = search.ssr.sample_count;
    let truth_table = ArcLengthTable::for_chain(truth);
    let truth_samples = truth_table.equal_spacing(n);
    let mut best = (f64::INFINITY, search.min_k);
    for k in search.min_k..=search.max_k {
        let approx = resample_from_table(&truth_table, truth, k)?;
        let samples = ArcLengthTable::for_chain(&approx).equal_spacing(n);
        let score = bic_from_ssr(sum_squared_residuals(&samples, &truth_samples), n, k);
        if score < best.0 {
            best = (score, k);
        }
    }
    Ok(best.1)
}

/// Nearest-rank percentile of integer values (sorts `values` in place).
/// `values` must not be empty.
pub fn nearest_rank(values: &mut [usize], percentile: f64) -> usize {
    values.sort_unstable();
    let rank = ((percentile / 100.0) * values.len() as f64 - 1e-9)
        .ceil()
        .max(1.0) as usize;
    values[rank.min(values.len()) - 1]
}

/// Dataset-wide keypoint count: the nearest-rank percentile of the per-fiber
/// BIC optima.
pub fn optimal_keypoint_count(fibers: &[KeypointChain], search: &KeypointSearch) -> Result<usize> {
    if fibers.is_empty() {
        return Err(FiberError::invalid(
            "no fibers to select a keypoint count from",
        ));
    }
    let mut optima = per_fiber_optima(fibers, search)?;
    Ok(nearest_rank(&mut optima, search.percentile))
}

/// BIC-optimal keypoint count of every fiber, in input order.
pub fn per_fiber_optima(fibers: &[KeypointChain], search: &KeypointSearch) -> Result<Vec<usize>> {
    validate_search(search)?;
    par::try_map(fibers, |f| optimal_keypoint_count_for(f, search))
}
