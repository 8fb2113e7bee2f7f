//! Time-window gallery reduction and query/gallery time and distance gaps.
//!
//! Windows are expressed in minutes; comparisons are done on the integer
//! second difference so integral windows are exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{CameraId, CameraTopology, Dataset, DatasetError, ImageRecord};
use crate::metrics::ValidityMask;

#[derive(Debug, Error)]
pub enum TemporalError {
    #[error("invalid time window: {0}")]
    InvalidWindow(String),
    #[error("no query/gallery pair shares a person ID across cameras")]
    NoMatchedPairs,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl TemporalError {
    pub fn code(&self) -> &'static str {
        match self {
            TemporalError::InvalidWindow(_) => "InvalidWindow",
            TemporalError::NoMatchedPairs => "NoMatchedPairs",
            TemporalError::Dataset(e) => e.code(),
        }
    }
}

/// Half-open window `[t_min, t_max)` in minutes relative to the query time.
/// Infinite bounds are allowed so the unbounded window is representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    t_min_minutes: f64,
    t_max_minutes: f64,
}

impl TimeWindow {
    pub fn new(t_min_minutes: f64, t_max_minutes: f64) -> Result<Self, TemporalError> {
        if t_min_minutes.is_nan() || t_max_minutes.is_nan() {
            return Err(TemporalError::InvalidWindow("NaN bound".into()));
        }
        if t_min_minutes >= t_max_minutes {
            return Err(TemporalError::InvalidWindow(format!(
                "t_min {t_min_minutes} must be below t_max {t_max_minutes}"
            )));
        }
        Ok(TimeWindow {
            t_min_minutes,
            t_max_minutes,
        })
    }

    pub fn unbounded() -> Self {
        TimeWindow {
            t_min_minutes: f64::NEG_INFINITY,
            t_max_minutes: f64::INFINITY,
        }
    }

    pub fn t_min_minutes(&self) -> f64 {
        self.t_min_minutes
    }

    pub fn t_max_minutes(&self) -> f64 {
        self.t_max_minutes
    }

    /// `t_min * 60 <= dt_sec < t_max * 60`.
    pub fn contains_seconds(&self, dt_sec: i64) -> bool {
        let dt = dt_sec as f64;
        self.t_min_minutes * 60.0 <= dt && dt < self.t_max_minutes * 60.0
    }

    pub fn contains(&self, query: &ImageRecord, gallery: &ImageRecord) -> bool {
        self.contains_seconds(delta_t_seconds(query, gallery))
    }

    pub fn label(&self) -> String {
        format!("window[{},{})min", self.t_min_minutes, self.t_max_minutes)
    }
}

impl std::str::FromStr for TimeWindow {
    type Err = TemporalError;

    /// `MIN:MAX` in minutes, e.g. `0:30`; `-inf`/`inf` are accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| TemporalError::InvalidWindow(format!("expected MIN:MAX, got {s:?}")))?;
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| TemporalError::InvalidWindow(format!("bad bound {v:?}")))
        };
        TimeWindow::new(num(lo)?, num(hi)?)
    }
}

pub fn delta_t_seconds(query: &ImageRecord, gallery: &ImageRecord) -> i64 {
    gallery.timestamp_sec as i64 - query.timestamp_sec as i64
}

/// Signed `(t_gallery - t_query) / 60`.
pub fn delta_t_minutes(query: &ImageRecord, gallery: &ImageRecord) -> f64 {
    delta_t_seconds(query, gallery) as f64 / 60.0
}

/// Walking distance between the two records' cameras.
pub fn delta_s_meters(query: &ImageRecord, gallery: &ImageRecord, topo: &CameraTopology) -> Result<f64, DatasetError> {
    topo.walking_distance(&query.camera, &gallery.camera)
}

/// Window constraint alone, without the same-camera exclusion.
pub fn window_mask(dataset: &Dataset, window: &TimeWindow) -> ValidityMask {
    let (q, g) = (dataset.queries(), dataset.gallery());
    ValidityMask::from_fn(q.len(), g.len(), window.label(), |i, j| window.contains(&q[i], &g[j]))
}

/// Exclusion rule combined with the window constraint.
pub fn reduce_gallery(dataset: &Dataset, window: &TimeWindow) -> ValidityMask {
    ValidityMask::exclusion(dataset)
        .and(&window_mask(dataset, window))
        .expect("masks built from one dataset share a shape")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSample {
    pub delta_t_minutes: f64,
    pub query_cam: CameraId,
    pub gallery_cam: CameraId,
    pub same_identity: bool,
}

/// Time gaps of every ground-truth match seen from a different camera, in
/// query-major order.
pub fn empirical_delta_t(dataset: &Dataset) -> Result<Vec<DeltaSample>, TemporalError> {
    let mut out = Vec::new();
    for q in dataset.queries() {
        for g in dataset.gallery() {
            if q.person_id == g.person_id && q.camera != g.camera {
                out.push(DeltaSample {
                    delta_t_minutes: delta_t_minutes(q, g),
                    query_cam: q.camera.clone(),
                    gallery_cam: g.camera.clone(),
                    same_identity: true,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(TemporalError::NoMatchedPairs);
    }
    Ok(out)
}
