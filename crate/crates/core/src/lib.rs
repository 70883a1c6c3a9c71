//! Fiber morphology toolkit.
//!
//! Fibers are modelled as an ordered keypoint chain (the spine) with a constant
//! width and a total arc length. The crate covers everything around a fiber
//! detection network that is not the network itself:
//!
//! * [`geometry`]: uniform cubic splines through keypoints, arc length,
//!   resampling, ordering, rasterization and BIC-based keypoint-count selection.
//! * [`annotation`]: semiautomatic ground truth from grayscale images
//!   (segmentation, thinning, longest path, distance map, width estimate).
//! * [`synthesis`]: seeded synthetic fiber scenes with exact ground truth.
//! * [`pruning`]: length/IoU error detection and keypoint pruning.
//! * [`metrics`]: matching, precision/recall, 101-point AP, mAP, MAPE, KL divergence.
//! * [`losses`]: the multi-task loss arithmetic.
//! * [`dataset`]: annotation files, splits, subset aggregation and augmentation.
//!
//! Batch operations run on rayon when the `parallel` feature is enabled
//! (default) and fall back to plain iterators otherwise. Results never depend
//! on the number of worker threads.

pub mod annotation;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod losses;
pub mod metrics;
pub mod par;
pub mod pruning;
pub mod synthesis;

pub use error::{FiberError, Result};
pub use geometry::{Fiber, KeypointChain, Point2D, RasterMask};

/// Keypoint count used throughout the toolkit unless configured otherwise.
pub const DEFAULT_KEYPOINT_COUNT: usize = 40;
