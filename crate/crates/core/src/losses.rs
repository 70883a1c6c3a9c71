//! Multi-task loss arithmetic for a fiber detection network.
//!
//! The class, box, mask and keypoint head losses come from the network
//! framework and enter here as plain scalars; the width and length
//! regression losses are weighted mean squared errors.

use crate::error::{FiberError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub width: f64,
    pub length: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            width: 1e-3,
            length: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub classification: f64,
    pub bounding_box: f64,
    pub mask: f64,
    pub keypoints: f64,
    pub width: f64,
    pub length: f64,
}

impl LossBreakdown {
    /// Fills in the width and length terms from predictions and targets.
    pub fn with_regressions(
        head_losses: [f64; 4],
        widths: (&[f64], &[f64]),
        lengths: (&[f64], &[f64]),
        weights: &LossWeights,
    ) -> Result<Self> {
        if let Some(v) = head_losses.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(FiberError::invalid(format!(
                "head loss must be non-negative, got {v}"
            )));
        }
        Ok(Self {
            classification: head_losses[0],
            bounding_box: head_losses[1],
            mask: head_losses[2],
            keypoints: head_losses[3],
            width: width_loss(widths.0, widths.1, weights)?,
            length: length_loss(lengths.0, lengths.1, weights)?,
        })
    }
}

fn check_pair(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.is_empty() || pred.len() != target.len() {
        return Err(FiberError::invalid(format!(
            "prediction/target lengths must match and be >= 1 (got {} and {})",
            pred.len(),
            target.len()
        )));
    }
    Ok(())
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_pair(pred, target)?;
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(sum / pred.len() as f64)
}

/// Gradient of `weight * mse(pred, target)` with respect to `pred`.
pub fn weighted_mse_gradient(pred: &[f64], target: &[f64], weight: f64) -> Result<Vec<f64>> {
    check_pair(pred, target)?;
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| 2.0 * weight * (p - t) / n)
        .collect())
}

pub fn width_loss(pred: &[f64], target: &[f64], weights: &LossWeights) -> Result<f64> {
    Ok(weights.width * mse(pred, target)?)
}

pub fn length_loss(pred: &[f64], target: &[f64], weights: &LossWeights) -> Result<f64> {
    Ok(weights.length * mse(pred, target)?)
}

pub fn total_loss(b: &LossBreakdown) -> f64 {
    b.classification + b.bounding_box + b.mask + b.keypoints + b.width + b.length
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_weights() {
        let w = LossWeights::default();
        assert_eq!(w.width, 1e-3);
        assert_eq!(w.length, 1e-6);
    }

    #[test]
    fn mse_values() {
        assert_eq!(mse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
        assert_eq!(mse(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn weighted_losses() {
        let w = LossWeights::default();
        // mse = 1000 and 1e6 respectively
        let p = [1000f64.sqrt()];
        assert!((width_loss(&p, &[0.0], &w).unwrap() - 1.0).abs() < 1e-12);
        assert!((length_loss(&[1000.0], &[0.0], &w).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(width_loss(&[5.0], &[5.0], &w).unwrap(), 0.0);
        assert_eq!(length_loss(&[5.0], &[5.0], &w).unwrap(), 0.0);
        let doubled = LossWeights {
            width: 2e-3,
            length: 2e-6,
        };
        assert!(
            (width_loss(&[3.0, 1.0], &[0.0, 0.0], &doubled).unwrap()
                - 2.0 * width_loss(&[3.0, 1.0], &[0.0, 0.0], &w).unwrap())
            .abs()
                < 1e-15
        );
        assert!(
            (length_loss(&[3.0, 1.0], &[0.0, 0.0], &doubled).unwrap()
                - 2.0 * length_loss(&[3.0, 1.0], &[0.0, 0.0], &w).unwrap())
            .abs()
                < 1e-18
        );
    }

    #[test]
    fn total_is_sum() {
        assert_eq!(total_loss(&LossBreakdown::default()), 0.0);
        let ones = LossBreakdown {
            classification: 1.0,
            bounding_box: 1.0,
            mask: 1.0,
            keypoints: 1.0,
            width: 1.0,
            length: 1.0,
        };
        assert_eq!(total_loss(&ones), 6.0);
        let b = LossBreakdown::with_regressions(
            [0.5, 0.25, 0.125, 1.0],
            (&[10.0], &[0.0]),
            (&[100.0], &[0.0]),
            &LossWeights::default(),
        )
        .unwrap();
        assert!((total_loss(&b) - (1.875 + 0.1 + 0.01)).abs() < 1e-12);
        assert!(LossBreakdown::with_regressions(
            [-1.0, 0.0, 0.0, 0.0],
            (&[1.0], &[1.0]),
            (&[1.0], &[1.0]),
            &LossWeights::default()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn mse_is_homogeneous(r in prop::collection::vec(-100.0f64..100.0, 1..20), c in -10.0f64..10.0) {
            let zeros = vec![0.0; r.len()];
            let scaled: Vec<f64> = r.iter().map(|v| v * c).collect();
            let a = mse(&scaled, &zeros).unwrap();
            let b = c * c * mse(&r, &zeros).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }

        #[test]
        fn total_is_permutation_invariant(v in prop::array::uniform6(0.0f64..10.0)) {
            let a = LossBreakdown { classification: v[0], bounding_box: v[1], mask: v[2], keypoints: v[3], width: v[4], length: v[5] };
            let b = LossBreakdown { classification: v[5], bounding_box: v[4], mask: v[3], keypoints: v[2], width: v[1], length: v[0] };
            prop_assert!((total_loss(&a) - total_loss(&b)).abs() < 1e-12);
            prop_assert!(total_loss(&a) >= 0.0);
        }
    }
}
