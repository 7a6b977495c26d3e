//! Dataset manifests.
//!
//! A manifest is a TOML file. Paths are relative to the manifest's directory.
//!
//! ```toml
//! [scene]
//! name = "tabletop"
//!
//! [intrinsics.d435]          # inline ...
//! fx = 615.0
//! fy = 615.0
//! cx = 319.5
//! cy = 239.5
//! width = 640
//! height = 480
//! depth_scale = 1000.0
//!
//! [intrinsics]
//! l515 = "l515.json"         # ... or a standalone JSON file
//!
//! [[sample]]
//! id = "0000"
//! rgb = "rgb/0000.png"
//! gt_depth = "gt/0000.png"
//! camera_depth = "raw/0000.png"   # optional
//! pred_depth = "pred/0000.png"    # optional
//! intrinsics = "d435"             # optional when exactly one entry exists
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Intrinsics, DEFAULT_DEPTH_SCALE};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    #[serde(default)]
    scene: BTreeMap<String, String>,
    #[serde(default)]
    intrinsics: BTreeMap<String, RawIntrinsics>,
    #[serde(default)]
    sample: Vec<RawSample>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawIntrinsics {
    Inline(Intrinsics),
    File(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    id: String,
    rgb: String,
    gt_depth: String,
    camera_depth: Option<String>,
    pred_depth: Option<String>,
    intrinsics: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub id: String,
    pub rgb_path: PathBuf,
    pub gt_depth_path: PathBuf,
    pub camera_depth_path: Option<PathBuf>,
    pub pred_depth_path: Option<PathBuf>,
    pub intrinsics_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingFile {
    pub id: String,
    pub field: &'static str,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub missing: Vec<MissingFile>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a MissingFile> + 'a {
        self.missing.iter().filter(move |m| m.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub scene: BTreeMap<String, String>,
    pub intrinsics: BTreeMap<String, Intrinsics>,
    pub samples: Vec<SampleRecord>,
    pub validation: ValidationReport,
}

impl DatasetManifest {
    /// Intrinsics for a sample: its named entry, or the only entry when the
    /// manifest declares exactly one.
    pub fn intrinsics_for(&self, sample: &SampleRecord) -> Option<&Intrinsics> {
        match &sample.intrinsics_ref {
            Some(name) => self.intrinsics.get(name),
            None if self.intrinsics.len() == 1 => self.intrinsics.values().next(),
            None => None,
        }
    }

    pub fn depth_scale_for(&self, sample: &SampleRecord) -> f64 {
        self.intrinsics_for(sample)
            .map_or(DEFAULT_DEPTH_SCALE, |k| k.depth_scale)
    }

    /// Re-checks every referenced file on disk.
    pub fn validate(&self) -> ValidationReport {
        let mut missing = Vec::new();
        for s in &self.samples {
            let mut check = |field: &'static str, path: &Path| {
                if !path.is_file() {
                    missing.push(MissingFile {
                        id: s.id.clone(),
                        field,
                        path: path.to_path_buf(),
                    });
                }
            };
            check("rgb", &s.rgb_path);
            check("gt_depth", &s.gt_depth_path);
            if let Some(p) = &s.camera_depth_path {
                check("camera_depth", p);
            }
            if let Some(p) = &s.pred_depth_path {
                check("pred_depth", p);
            }
        }
        ValidationReport { missing }
    }
}

pub fn parse_manifest(text: &str, root: &Path) -> Result<DatasetManifest> {
    let raw: RawManifest = toml::from_str(text).map_err(|e| Error::Malformed {
        what: "manifest",
        message: e.to_string(),
    })?;

    let mut intrinsics = BTreeMap::new();
    for (name, entry) in raw.intrinsics {
        let k = match entry {
            RawIntrinsics::Inline(k) => {
                k.validate()?;
                k
            }
            RawIntrinsics::File(rel) => Intrinsics::load_json(root.join(rel))?,
        };
        intrinsics.insert(name, k);
    }

    let mut seen = HashSet::new();
    let mut samples = Vec::with_capacity(raw.sample.len());
    for s in raw.sample {
        if !seen.insert(s.id.clone()) {
            return Err(Error::DuplicateId(s.id));
        }
        if let Some(name) = &s.intrinsics {
            if !intrinsics.contains_key(name) {
                return Err(Error::Unknown {
                    kind: "intrinsics",
                    name: name.clone(),
                });
            }
        }
        samples.push(SampleRecord {
            rgb_path: root.join(&s.rgb),
            gt_depth_path: root.join(&s.gt_depth),
            camera_depth_path: s.camera_depth.map(|p| root.join(p)),
            pred_depth_path: s.pred_depth.map(|p| root.join(p)),
            intrinsics_ref: s.intrinsics,
            id: s.id,
        });
    }

    let mut manifest = DatasetManifest {
        root: root.to_path_buf(),
        scene: raw.scene,
        intrinsics,
        samples,
        validation: ValidationReport::default(),
    };
    manifest.validation = manifest.validate();
    Ok(manifest)
}

/// Parses a manifest file. Missing sample files are reported in
/// [`DatasetManifest::validation`] rather than failing the parse.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, root)
}
