//! Seeded synthetic fiber scenes with exact ground truth.
//!
//! Realism is not the goal: scenes exist so that annotation, pruning and
//! evaluation can be checked against geometry that is known exactly. The
//! generator draws fibers with the same spline and rasterization code the
//! rest of the crate uses, so rasterizing a scene's annotations reproduces its
//! noise-free foreground bit for bit.

mod config;
mod fiber;
mod scene;

pub use config::{CountRange, SynthConfig, ValueRange};
pub use fiber::{sample_fiber, self_intersects};
pub use scene::{
    generate_dataset, generate_scenes, render_scene, synthesize_scene, RealizedFlags, SynthScene,
};
