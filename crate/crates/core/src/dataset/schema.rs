use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};
use crate::geometry::{Fiber, KeypointChain, Point2D};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    Yes,
    No,
    Random,
}

impl From<bool> for Tristate {
    fn from(b: bool) -> Self {
        if b {
            Tristate::Yes
        } else {
            Tristate::No
        }
    }
}

impl fmt::Display for Tristate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tristate::Yes => "+",
            Tristate::No => "-",
            Tristate::Random => "?",
        })
    }
}

/// Presence of the three inhibiting factors in an image or subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetFlags {
    pub loops: Tristate,
    pub clutter: Tristate,
    pub overlaps: Tristate,
}

impl SubsetFlags {
    pub const CLEAN: SubsetFlags = SubsetFlags {
        loops: Tristate::No,
        clutter: Tristate::No,
        overlaps: Tristate::No,
    };

    pub fn new(loops: Tristate, clutter: Tristate, overlaps: Tristate) -> Self {
        Self {
            loops,
            clutter,
            overlaps,
        }
    }
}

/// Identifier in the `[-l|+c|?o]` notation.
impl fmt::Display for SubsetFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}l|{}c|{}o]", self.loops, self.clutter, self.overlaps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    #[default]
    Unsplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Manual,
    Semiautomatic,
    Synthetic,
}

/// One fiber; `score` and `mask_path` are only present in prediction files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberRecord {
    pub keypoints: Vec<[f64; 2]>,
    pub width_px: f64,
    pub length_px: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    /// PNG mask, relative to the file the record was loaded from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<String>,
    /// Keypoints after pruning, written next to the originals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruned_keypoints: Option<Vec<[f64; 2]>>,
}

impl FiberRecord {
    pub fn from_fiber(fiber: &Fiber) -> Self {
        Self {
            keypoints: fiber
                .keypoints
                .points()
                .iter()
                .map(|p| [p.x, p.y])
                .collect(),
            width_px: fiber.width,
            length_px: fiber.length,
            score: None,
            mask_path: None,
            pruned_keypoints: None,
        }
    }

    pub fn to_fiber(&self) -> Result<Fiber> {
        let points = self
            .keypoints
            .iter()
            .map(|&[x, y]| Point2D::new(x, y))
            .collect();
        Fiber::new(KeypointChain::new(points)?, self.width_px, self.length_px)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.width_px.is_finite() && self.width_px > 0.0) {
            return Err(format!("width_px must be > 0, got {}", self.width_px));
        }
        if !(self.length_px.is_finite() && self.length_px > 0.0) {
            return Err(format!("length_px must be > 0, got {}", self.length_px));
        }
        if let Some(p) = &self.pruned_keypoints {
            let points = p.iter().map(|&[x, y]| Point2D::new(x, y)).collect();
            KeypointChain::new(points).map_err(|e| format!("pruned_keypoints: {e}"))?;
        }
        if let Some(s) = self.score {
            if !(0.0..=1.0).contains(&s) {
                return Err(format!("score must lie in [0, 1], got {s}"));
            }
        }
        self.to_fiber().map(|_| ()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub schema_version: u32,
    pub file_name: String,
    pub width_px: u32,
    pub height_px: u32,
    pub flags: SubsetFlags,
    #[serde(default)]
    pub split: Split,
    pub fibers: Vec<FiberRecord>,
}

impl ImageRecord {
    pub fn new(
        file_name: impl Into<String>,
        width_px: u32,
        height_px: u32,
        flags: SubsetFlags,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            file_name: file_name.into(),
            width_px,
            height_px,
            flags,
            split: Split::Unsplit,
            fibers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub entries: Vec<ImageRecord>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self::new(Provenance::default())
    }
}

impl DatasetManifest {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            provenance,
            entries: Vec::new(),
        }
    }

    pub fn image_count(&self) -> usize {
        self.entries.len()
    }

    pub fn fiber_count(&self) -> usize {
        self.entries.iter().map(|e| e.fibers.len()).sum()
    }

    pub fn count_split(&self, split: Split) -> (usize, usize) {
        let picked = self.entries.iter().filter(|e| e.split == split);
        picked.fold((0, 0), |(i, f), e| (i + 1, f + e.fibers.len()))
    }

    /// Checks field ranges and that image file names are unique.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, entry) in self.entries.iter().enumerate() {
            let record = |extra: &str| format!("entries[{i}] ({}){extra}", entry.file_name);
            let fail = |extra: &str, message: String| FiberError::Validation {
                record: record(extra),
                message,
            };
            if entry.schema_version != SCHEMA_VERSION {
                return Err(fail(
                    "",
                    format!(
                        "schema_version {} != {SCHEMA_VERSION}",
                        entry.schema_version
                    ),
                ));
            }
            if entry.file_name.is_empty() {
                return Err(fail("", "empty file_name".into()));
            }
            if !seen.insert(entry.file_name.as_str()) {
                return Err(fail("", "duplicate file_name".into()));
            }
            if entry.width_px == 0 || entry.height_px == 0 {
                return Err(fail("", "image dimensions must be > 0".into()));
            }
            for (j, fiber) in entry.fibers.iter().enumerate() {
                fiber
                    .validate()
                    .map_err(|m| fail(&format!(" fiber {j}"), m))?;
            }
        }
        Ok(())
    }
}

/// Parses a manifest from JSON text; `path` is only used in error messages.
pub fn parse_annotations(text: &str, path: &Path) -> Result<DatasetManifest> {
    let parse_err = |e: serde_json::Error| FiberError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64);
    match version {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(FiberError::Version {
                path: path.to_path_buf(),
                found: u32::try_from(v).unwrap_or(u32::MAX),
                expected: SCHEMA_VERSION,
            })
        }
        None => {
            return Err(FiberError::Parse {
                path: path.to_path_buf(),
                line: 1,
                column: 1,
                message: "missing integer field `schema_version`".into(),
            })
        }
    }
    // Re-parse from text so field errors keep their line and column.
    let manifest: DatasetManifest = serde_json::from_str(text).map_err(parse_err)?;
    manifest.validate()?;
    Ok(manifest)
}

pub fn load_annotations(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| FiberError::io(path, e))?;
    parse_annotations(&text, path)
}

/// Writes the manifest as pretty-printed JSON after validating it.
pub fn save_annotations(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    manifest.validate()?;
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| FiberError::io(path, e))
}
