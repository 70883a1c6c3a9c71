//! Semiautomatic annotation of single-fiber images: segmentation, thinning,
//! longest skeleton path, Euclidean distance map and width estimation.

mod distance;
mod image;
mod path;
mod pipeline;
mod segment;
mod skeleton;

pub use self::image::GrayImage;
pub use distance::{distance_map, estimate_width, DistanceMap};
pub use path::{connected_components, longest_path, SkeletonPath};
pub use pipeline::{annotate_fiber, AnnotateConfig, Annotation, QualityFlag, QualityReport};
pub use segment::{median_filter, otsu_threshold, segment, Polarity, SegmentConfig, Segmentation};
pub use skeleton::{skeletonize, Skeleton};
