use crate::error::{FiberError, Result};

/// Histogram normalised to a probability density over its bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.densities.len()
    }

    /// Probability mass per bin (density times bin width).
    pub fn masses(&self) -> Vec<f64> {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .collect()
    }
}

/// Range covering both samples; used so paired histograms share bin edges.
pub fn shared_range(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    let mut it = a.iter().chain(b).copied();
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

/// Weighted density histogram spanning the sample range.
pub fn weighted_histogram(values: &[f64], weights: &[f64], bins: usize) -> Result<Histogram> {
    let (lo, hi) = shared_range(values, &[])
        .ok_or_else(|| FiberError::invalid("histogram of an empty sample"))?;
    weighted_histogram_in(values, weights, bins, lo, hi)
}

/// Weighted density histogram over `[lo, hi]`; the last bin is closed.
/// A degenerate range is widened to `[lo - 0.5, lo + 0.5]`.
pub fn weighted_histogram_in(
    values: &[f64],
    weights: &[f64],
    bins: usize,
    lo: f64,
    hi: f64,
) -> Result<Histogram> {
    if values.len() != weights.len() {
        return Err(FiberError::invalid(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if bins == 0 {
        return Err(FiberError::invalid("histogram needs at least one bin"));
    }
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(FiberError::invalid(format!(
            "invalid histogram range [{lo}, {hi}]"
        )));
    }
    if values.iter().chain(weights).any(|v| !v.is_finite()) || weights.iter().any(|&w| w < 0.0) {
        return Err(FiberError::invalid(
            "histogram values and weights must be finite, weights non-negative",
        ));
    }
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut mass = vec![0.0; bins];
    for (&v, &w) in values.iter().zip(weights) {
        if v < lo || v > hi {
            continue;
        }
        let bin = (((v - lo) / width) as usize).min(bins - 1);
        mass[bin] += w;
    }
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return Err(FiberError::invalid("histogram has zero total weight"));
    }
    let densities = mass
        .iter()
        .zip(edges.windows(2))
        .map(|(m, e)| m / total / (e[1] - e[0]))
        .collect();
    Ok(Histogram { edges, densities })
}

/// `sum p ln(p / q)` over bin masses, restricted to bins where both are non-zero.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.edges != q.edges {
        return Err(FiberError::invalid(
            "KL divergence needs identical bin edges",
        ));
    }
    let mut common = false;
    let mut kl = 0.0;
    for (a, b) in p.masses().into_iter().zip(q.masses()) {
        if a > 0.0 && b > 0.0 {
            common = true;
            kl += a * (a / b).ln();
        }
    }
    if !common {
        return Err(FiberError::UndefinedResult(
            "histograms share no populated bin".into(),
        ));
    }
    Ok(kl)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_masses(m: &[f64]) -> Histogram {
        let edges: Vec<f64> = (0..=m.len()).map(|i| i as f64).collect();
        Histogram {
            edges,
            densities: m.to_vec(),
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let h = weighted_histogram(&[1.0, 2.0, 2.5, 4.0], &[1.0, 2.0, 1.0, 4.0], 3).unwrap();
        let total: f64 = h.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Max value falls in the closed last bin.
        assert!((h.masses()[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_range() {
        let h = weighted_histogram(&[3.0, 3.0], &[1.0, 1.0], 4).unwrap();
        assert_eq!(h.edges[0], 2.5);
        assert_eq!(*h.edges.last().unwrap(), 3.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(weighted_histogram(&[], &[], 3).is_err());
        assert!(weighted_histogram(&[1.0], &[0.0], 3).is_err());
        assert!(weighted_histogram(&[1.0], &[1.0, 2.0], 3).is_err());
        assert!(weighted_histogram(&[1.0], &[1.0], 0).is_err());
    }

    #[test]
    fn kl_known_value() {
        let p = from_masses(&[0.5, 0.5]);
        let q = from_masses(&[0.25, 0.75]);
        let expected = 0.5 * (2.0f64).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((kl_divergence(&p, &q).unwrap() - expected).abs() < 1e-12);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl_skips_one_sided_bins() {
        let p = from_masses(&[1.0, 0.0]);
        let q = from_masses(&[0.5, 0.5]);
        assert!((kl_divergence(&p, &q).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        let r = from_masses(&[0.0, 1.0]);
        assert!(matches!(
            kl_divergence(&p, &r),
            Err(FiberError::UndefinedResult(_))
        ));
        let other = Histogram {
            edges: vec![0.0, 1.0, 3.0],
            densities: vec![0.5, 0.25],
        };
        assert!(kl_divergence(&p, &other).is_err());
    }
}
