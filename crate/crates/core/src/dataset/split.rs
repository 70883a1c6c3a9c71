use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::schema::{DatasetManifest, Split, SubsetFlags, Tristate};
use crate::error::{FiberError, Result};
use crate::par::stream_rng;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.85;

/// `floor(fraction * n)`, tolerant of representation error in `fraction`.
pub fn train_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

fn flag_code(flags: &SubsetFlags) -> u64 {
    let t = |s: Tristate| match s {
        Tristate::No => 0,
        Tristate::Yes => 1,
        Tristate::Random => 2,
    };
    9 * t(flags.loops) + 3 * t(flags.clutter) + t(flags.overlaps)
}

/// Assigns every entry to train or test, separately for each flag subset:
/// `floor(fraction * n)` random entries of a subset go to training, the rest
/// to test. Each subset shuffles with its own stream of `seed`.
pub fn split_dataset(
    manifest: &DatasetManifest,
    fraction: f64,
    seed: u64,
) -> Result<DatasetManifest> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(FiberError::invalid(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut groups: BTreeMap<SubsetFlags, Vec<usize>> = BTreeMap::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        groups.entry(e.flags).or_default().push(i);
    }
    let mut out = manifest.clone();
    for (flags, mut members) in groups {
        let n_train = train_count(members.len(), fraction);
        members.shuffle(&mut stream_rng(seed, flag_code(&flags)));
        for (rank, &idx) in members.iter().enumerate() {
            out.entries[idx].split = if rank < n_train {
                Split::Train
            } else {
                Split::Test
            };
        }
    }
    Ok(out)
}

/// Merges loop subsets into one `[+l|?c|?o]` subset. Splits are kept, so
/// split the original subsets first if per-subset proportions matter.
pub fn aggregate_loop_subsets(manifests: &[DatasetManifest]) -> Result<DatasetManifest> {
    let first = manifests
        .first()
        .ok_or_else(|| FiberError::invalid("no manifests to aggregate"))?;
    let mut out = DatasetManifest::new(first.provenance);
    let merged = SubsetFlags::new(Tristate::Yes, Tristate::Random, Tristate::Random);
    for (m, manifest) in manifests.iter().enumerate() {
        if manifest.provenance != first.provenance {
            return Err(FiberError::invalid(format!(
                "manifest {m} has provenance {:?}, expected {:?}",
                manifest.provenance, first.provenance
            )));
        }
        for entry in &manifest.entries {
            if entry.flags.loops != Tristate::Yes {
                return Err(FiberError::invalid(format!(
                    "manifest {m} entry {} is not a loop image ({})",
                    entry.file_name, entry.flags
                )));
            }
            let mut e = entry.clone();
            e.flags = merged;
            out.entries.push(e);
        }
    }
    out.validate()?;
    Ok(out)
}
