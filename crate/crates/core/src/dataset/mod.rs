//! Annotation and prediction files, dataset manifests, subset flags,
//! train/test splitting, loop-subset aggregation and input augmentation.

mod augment;
mod png;
mod schema;
mod split;

pub use augment::{apply_augmentation, augment, AugmentDecision, AugmentParams};
pub use png::{read_gray_png, read_mask_png, write_gray_png, write_mask_png};
pub use schema::{
    load_annotations, parse_annotations, save_annotations, DatasetManifest, FiberRecord,
    ImageRecord, Provenance, Split, SubsetFlags, Tristate, SCHEMA_VERSION,
};
pub use split::{aggregate_loop_subsets, split_dataset, train_count, DEFAULT_TRAIN_FRACTION};
