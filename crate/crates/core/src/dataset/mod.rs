//! Image records, datasets, and the on-disk formats they are loaded from.

mod features;
mod filename;
mod topology;

pub use features::{read_features, write_features_binary, write_features_csv, FeatureTable};
pub use filename::{format_image_filename, parse_image_filename, DEFAULT_FRAME_WIDTH};
pub use topology::CameraTopology;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed filename {name:?}: {reason}")]
    MalformedFilename { name: String, reason: String },
    #[error("frame number {frame_number} does not fit in {width} digits")]
    FrameWidthOverflow { frame_number: u64, width: usize },
    #[error("invalid camera id {0:?}, expected c<digits>")]
    InvalidCamera(String),
    #[error("no feature vector for {0:?}")]
    MissingFeature(String),
    #[error("feature for {name:?} has length {found}, expected {expected}")]
    DimensionMismatch { name: String, expected: usize, found: usize },
    #[error("feature for {0:?} contains a non-finite value")]
    NonFiniteFeature(String),
    #[error("duplicate filename {0:?}")]
    DuplicateFilename(String),
    #[error("manifest line {line}: {reason}")]
    MalformedManifest { line: usize, reason: String },
    #[error("malformed feature file: {0}")]
    MalformedFeatures(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("unknown camera {0}")]
    UnknownCamera(String),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::MalformedFilename { .. } => "MalformedFilename",
            DatasetError::FrameWidthOverflow { .. } => "FrameWidthOverflow",
            DatasetError::InvalidCamera(_) => "InvalidCamera",
            DatasetError::MissingFeature(_) => "MissingFeature",
            DatasetError::DimensionMismatch { .. } => "DimensionMismatch",
            DatasetError::NonFiniteFeature(_) => "NonFiniteFeature",
            DatasetError::DuplicateFilename(_) => "DuplicateFilename",
            DatasetError::MalformedManifest { .. } => "MalformedManifest",
            DatasetError::MalformedFeatures(_) => "MalformedFeatures",
            DatasetError::InvalidTopology(_) => "InvalidTopology",
            DatasetError::UnknownCamera(_) => "UnknownCamera",
            DatasetError::EmptySplit(_) => "EmptySplit",
            DatasetError::Io { .. } => "Io",
        }
    }
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Camera token of the form `c<digits>`, stored lowercased.
///
/// Equality is textual, so `c0900` and `c900` are different cameras. Topology
/// lookups additionally fall back to the numeric part, see
/// [`CameraTopology::index_of`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CameraId(String);

impl CameraId {
    pub fn parse(token: &str) -> Result<Self, DatasetError> {
        let lower = token.trim().to_ascii_lowercase();
        match lower.strip_prefix('c') {
            Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => Ok(CameraId(lower)),
            _ => Err(DatasetError::InvalidCamera(token.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Numeric value of the digits, ignoring leading zeros. `None` only when
    /// the digits overflow a u64.
    pub fn number(&self) -> Option<u64> {
        self.0[1..].parse().ok()
    }
}

impl fmt::Display for CameraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for CameraId {
    type Error = DatasetError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        CameraId::parse(&s)
    }
}

impl From<CameraId> for String {
    fn from(c: CameraId) -> String {
        c.0
    }
}

/// One detection. Timestamps are integer seconds since midnight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub person_id: u32,
    pub camera: CameraId,
    pub timestamp_sec: u64,
    pub frame_number: u64,
    pub bbox_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<Vec<f64>>,
}

impl ImageRecord {
    pub fn filename(&self) -> String {
        // Frame numbers wider than the default field are still emitted unpadded.
        format_image_filename(self, DEFAULT_FRAME_WIDTH)
            .unwrap_or_else(|_| format_image_filename(self, self.frame_number.to_string().len()).expect("width fits"))
    }

    pub fn feature(&self) -> Result<&[f64], DatasetError> {
        self.feature
            .as_deref()
            .ok_or_else(|| DatasetError::MissingFeature(self.filename()))
    }
}

/// Query and gallery records sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dimension: usize,
    queries: Vec<ImageRecord>,
    gallery: Vec<ImageRecord>,
}

impl Dataset {
    pub fn new(dimension: usize, queries: Vec<ImageRecord>, gallery: Vec<ImageRecord>) -> Result<Self, DatasetError> {
        if dimension == 0 {
            return Err(DatasetError::MalformedFeatures("dimension must be positive".into()));
        }
        if queries.is_empty() {
            return Err(DatasetError::EmptySplit("query"));
        }
        if gallery.is_empty() {
            return Err(DatasetError::EmptySplit("gallery"));
        }
        for rec in queries.iter().chain(&gallery) {
            if let Some(f) = &rec.feature {
                if f.len() != dimension {
                    return Err(DatasetError::DimensionMismatch {
                        name: rec.filename(),
                        expected: dimension,
                        found: f.len(),
                    });
                }
                if f.iter().any(|v| !v.is_finite()) {
                    return Err(DatasetError::NonFiniteFeature(rec.filename()));
                }
            }
        }
        Ok(Dataset {
            dimension,
            queries,
            gallery,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn queries(&self) -> &[ImageRecord] {
        &self.queries
    }

    pub fn gallery(&self) -> &[ImageRecord] {
        &self.gallery
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn num_gallery(&self) -> usize {
        self.gallery.len()
    }
}

/// Query and gallery filename lists, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub query: Vec<String>,
    pub gallery: Vec<String>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        #[derive(Clone, Copy)]
        enum Section {
            None,
            Query,
            Gallery,
        }
        let mut manifest = Manifest::default();
        let mut section = Section::None;
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[query]" => section = Section::Query,
                "[gallery]" => section = Section::Gallery,
                _ if line.starts_with('[') => {
                    return Err(DatasetError::MalformedManifest {
                        line: i + 1,
                        reason: format!("unknown section {line}"),
                    })
                }
                name => {
                    if !seen.insert(name.to_string()) {
                        return Err(DatasetError::DuplicateFilename(name.to_string()));
                    }
                    match section {
                        Section::Query => manifest.query.push(name.to_string()),
                        Section::Gallery => manifest.gallery.push(name.to_string()),
                        Section::None => {
                            return Err(DatasetError::MalformedManifest {
                                line: i + 1,
                                reason: "filename before any [query]/[gallery] header".into(),
                            })
                        }
                    }
                }
            }
        }
        Ok(manifest)
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Manifest::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("[query]\n");
        for n in &self.query {
            out.push_str(n);
            out.push('\n');
        }
        out.push_str("[gallery]\n");
        for n in &self.gallery {
            out.push_str(n);
            out.push('\n');
        }
        out
    }
}

/// Attaches features to every manifest entry. Record order follows the manifest.
pub fn assemble_dataset(manifest: &Manifest, features: &FeatureTable) -> Result<Dataset, DatasetError> {
    let index: HashMap<&str, &[f64]> = features
        .entries
        .iter()
        .map(|(n, v)| (n.as_str(), v.as_slice()))
        .collect();
    let attach = |names: &[String]| -> Result<Vec<ImageRecord>, DatasetError> {
        names
            .iter()
            .map(|name| {
                let mut rec = parse_image_filename(name)?;
                let f = index
                    .get(name.as_str())
                    .ok_or_else(|| DatasetError::MissingFeature(name.clone()))?;
                rec.feature = Some(f.to_vec());
                Ok(rec)
            })
            .collect()
    };
    let queries = attach(&manifest.query)?;
    let gallery = attach(&manifest.gallery)?;
    Dataset::new(features.dimension, queries, gallery)
}

/// Reads a manifest and a feature file (binary `RIDF` or CSV, detected by
/// content) into a [`Dataset`].
pub fn load_dataset(manifest_path: &Path, features_path: &Path) -> Result<Dataset, DatasetError> {
    let manifest = Manifest::read(manifest_path)?;
    let features = read_features(features_path)?;
    assemble_dataset(&manifest, &features)
}
