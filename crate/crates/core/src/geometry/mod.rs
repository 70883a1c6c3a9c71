//! Fiber geometry: keypoint chains, uniform cubic splines, rasterization and
//! keypoint-count selection.
//!
//! Coordinates use the image frame: `x` grows rightwards, `y` grows downwards,
//! and pixel `(col, row)` has its center at `(col, row)`.

mod chain;
mod raster;
mod selection;
mod spline;

pub use chain::{order_keypoints, satisfies_ordering, Fiber, KeypointChain, Point2D};
pub use raster::{rasterize_chain, rasterize_fiber, BoundingBox, RasterMask, MAX_SAMPLE_SPACING};
pub use selection::{
    bic, bic_from_ssr, nearest_rank, optimal_keypoint_count, optimal_keypoint_count_for,
    per_fiber_optima, ssr, KeypointSearch, SsrConfig, SSR_FLOOR,
};
pub use spline::{
    resample_keypoints, spline_interpolate, spline_length, ArcLengthTable, CubicSpline,
};
