//! Posterior re-ranking.
//!
//! Each query/gallery pair is scored by the product of a Gaussian appearance
//! likelihood `exp(-|x_q - x_g|^2 / (2 sigma^2))`, a temporal prior evaluated
//! at the signed time gap in minutes, and an optional spatial prior on the
//! walking distance between the two cameras. Scores are accumulated in log
//! space; a zero factor makes the whole score zero.
//!
//! Items with positive score are ranked by score, then by appearance distance,
//! then by gallery index. Zero-score items keep their place in the ranking and
//! follow in appearance order, so every valid gallery item is ranked.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dataset::{CameraId, CameraTopology, Dataset, DatasetError};
use crate::metrics::{
    compute_distances, evaluate_rankings, squared_euclidean, DistanceMatrix, EvalReport, Metric, MetricsError,
    ValidityMask,
};
use crate::prior::PriorSpec;
use crate::temporal::{delta_t_minutes, reduce_gallery, TimeWindow};

#[derive(Debug, Error)]
pub enum RerankError {
    #[error("invalid re-ranking config: {0}")]
    InvalidConfig(String),
    #[error("feature dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("spatial prior requested but no camera topology given")]
    MissingTopology,
    #[error("no frame rate configured for camera {0}")]
    MissingFps(CameraId),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl RerankError {
    pub fn code(&self) -> &'static str {
        match self {
            RerankError::InvalidConfig(_) => "InvalidConfig",
            RerankError::DimensionMismatch(..) => "DimensionMismatch",
            RerankError::MissingTopology => "MissingTopology",
            RerankError::MissingFps(_) => "MissingFps",
            RerankError::Dataset(e) => e.code(),
            RerankError::Metrics(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialMode {
    Off,
    /// `exp(-ds / sigma_s)`
    Laplace,
    /// Unnormalized `ds`; zero for same-camera pairs.
    Proportional,
}

impl std::str::FromStr for SpatialMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(SpatialMode::Off),
            "laplace" => Ok(SpatialMode::Laplace),
            "prop" | "proportional" => Ok(SpatialMode::Proportional),
            other => Err(format!("unknown spatial mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialConfig {
    pub mode: SpatialMode,
    /// Meters; only read in laplace mode.
    pub sigma_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPosteriorPolicy {
    #[default]
    RankByAppearance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    #[default]
    Minutes,
}

/// Frame-number variant: only same-camera pairs get a temporal factor, from
/// `|frame_g - frame_q| / fps / 60` minutes. Cross-camera pairs get 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMode {
    pub fps_per_camera: BTreeMap<CameraId, f64>,
}

impl FrameMode {
    fn fps(&self, cam: &CameraId) -> Result<f64, RerankError> {
        self.fps_per_camera
            .get(cam)
            .copied()
            .ok_or_else(|| RerankError::MissingFps(cam.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankConfig {
    /// Standard deviation of the appearance Gaussian, in feature units.
    pub sigma: f64,
    /// Prior over the time gap in minutes.
    pub temporal_prior: PriorSpec,
    #[serde(default)]
    pub spatial: Option<SpatialConfig>,
    #[serde(default)]
    pub dt_unit: TimeUnit,
    #[serde(default)]
    pub zero_posterior_policy: ZeroPosteriorPolicy,
    #[serde(default)]
    pub frame_mode: Option<FrameMode>,
}

impl RerankConfig {
    pub fn new(sigma: f64, temporal_prior: PriorSpec) -> Self {
        RerankConfig {
            sigma,
            temporal_prior,
            spatial: None,
            dt_unit: TimeUnit::Minutes,
            zero_posterior_policy: ZeroPosteriorPolicy::RankByAppearance,
            frame_mode: None,
        }
    }

    pub fn with_spatial(mut self, mode: SpatialMode, sigma_s: f64) -> Self {
        self.spatial = Some(SpatialConfig { mode, sigma_s });
        self
    }

    pub fn validate(&self) -> Result<(), RerankError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(RerankError::InvalidConfig(format!("sigma must be positive, got {}", self.sigma)));
        }
        if let Some(sp) = &self.spatial {
            if sp.mode == SpatialMode::Laplace && !(sp.sigma_s > 0.0 && sp.sigma_s.is_finite()) {
                return Err(RerankError::InvalidConfig(format!(
                    "sigma_s must be positive, got {}",
                    sp.sigma_s
                )));
            }
        }
        if let Some(fm) = &self.frame_mode {
            if let Some((cam, fps)) = fm.fps_per_camera.iter().find(|(_, f)| !(**f > 0.0 && f.is_finite())) {
                return Err(RerankError::InvalidConfig(format!("fps for {cam} must be positive, got {fps}")));
            }
        }
        Ok(())
    }

    fn spatial_mode(&self) -> SpatialMode {
        self.spatial.map_or(SpatialMode::Off, |s| s.mode)
    }
}

/// `exp(-|x_q - x_g|^2 / (2 sigma^2))`.
pub fn appearance_likelihood(x_q: &[f64], x_g: &[f64], sigma: f64) -> Result<f64, RerankError> {
    if x_q.len() != x_g.len() {
        return Err(RerankError::DimensionMismatch(x_q.len(), x_g.len()));
    }
    Ok((-squared_euclidean(x_q, x_g) / (2.0 * sigma * sigma)).exp())
}

/// `exp(-|ds| / sigma_s)`, with `ds` in meters.
pub fn spatial_prior(delta_s_m: f64, sigma_s: f64) -> f64 {
    (-delta_s_m.abs() / sigma_s).exp()
}

/// Unnormalized prior growing with walking distance.
pub fn spatial_prior_proportional(delta_s_m: f64) -> f64 {
    delta_s_m
}

/// Unnormalized log posterior scores; `-inf` marks a zero score (including
/// masked cells).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    rows: usize,
    cols: usize,
    log_scores: Vec<f64>,
}

impl PosteriorMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn log_score(&self, q: usize, g: usize) -> f64 {
        self.log_scores[q * self.cols + g]
    }

    pub fn log_row(&self, q: usize) -> &[f64] {
        &self.log_scores[q * self.cols..(q + 1) * self.cols]
    }

    /// Linear score; underflows to 0 for very negative log scores.
    pub fn score(&self, q: usize, g: usize) -> f64 {
        self.log_score(q, g).exp()
    }
}

fn log_sum(terms: &[f64]) -> f64 {
    if terms.contains(&f64::NEG_INFINITY) {
        f64::NEG_INFINITY
    } else {
        terms.iter().sum()
    }
}

/// Log prior factor for one pair; 0 means a factor of 1.
fn log_temporal(config: &RerankConfig, dataset: &Dataset, q: usize, g: usize) -> Result<f64, RerankError> {
    let (qr, gr) = (&dataset.queries()[q], &dataset.gallery()[g]);
    match &config.frame_mode {
        Some(fm) => {
            if qr.camera != gr.camera {
                return Ok(0.0);
            }
            let fps = fm.fps(&qr.camera)?;
            let dt = qr.frame_number.abs_diff(gr.frame_number) as f64 / fps / 60.0;
            Ok(config.temporal_prior.log_pdf(dt))
        }
        None => Ok(config.temporal_prior.log_pdf(delta_t_minutes(qr, gr))),
    }
}

/// Scores every pair the mask keeps. `appearance` must hold squared
/// Euclidean distances between the dataset's features.
pub fn posterior_scores(
    dataset: &Dataset,
    appearance: &DistanceMatrix,
    config: &RerankConfig,
    mask: &ValidityMask,
    topology: Option<&CameraTopology>,
) -> Result<PosteriorMatrix, RerankError> {
    config.validate()?;
    if appearance.metric() != Metric::SquaredEuclidean {
        return Err(RerankError::InvalidConfig("appearance term needs squared euclidean distances".into()));
    }
    let (rows, cols) = (dataset.num_queries(), dataset.num_gallery());
    if (appearance.rows(), appearance.cols()) != (rows, cols) || (mask.rows(), mask.cols()) != (rows, cols) {
        return Err(MetricsError::ShapeMismatch("posterior inputs disagree in shape".into()).into());
    }
    let spatial = config.spatial_mode();
    let topology = match spatial {
        SpatialMode::Off => None,
        _ => Some(topology.ok_or(RerankError::MissingTopology)?),
    };
    let two_var = 2.0 * config.sigma * config.sigma;

    let rows_out: Vec<Vec<f64>> = (0..rows)
        .into_par_iter()
        .map(|q| {
            (0..cols)
                .map(|g| {
                    if !mask.get(q, g) {
                        return Ok(f64::NEG_INFINITY);
                    }
                    let log_app = -appearance.get(q, g) / two_var;
                    let log_time = log_temporal(config, dataset, q, g)?;
                    let log_space = match (spatial, topology) {
                        (SpatialMode::Off, _) | (_, None) => 0.0,
                        (mode, Some(topo)) => {
                            let ds = topo.walking_distance(&dataset.queries()[q].camera, &dataset.gallery()[g].camera)?;
                            match mode {
                                SpatialMode::Laplace => -ds.abs() / config.spatial.expect("spatial set").sigma_s,
                                _ => spatial_prior_proportional(ds).ln(),
                            }
                        }
                    };
                    Ok(log_sum(&[log_app, log_time, log_space]))
                })
                .collect::<Result<Vec<f64>, RerankError>>()
        })
        .collect::<Result<_, _>>()?;

    Ok(PosteriorMatrix {
        rows,
        cols,
        log_scores: rows_out.concat(),
    })
}

/// Orders the mask's valid items per query: positive scores first (score
/// descending, then appearance ascending, then index), then zero scores by
/// appearance and index.
pub fn rank_by_posterior(
    posterior: &PosteriorMatrix,
    appearance: &DistanceMatrix,
    mask: &ValidityMask,
) -> Vec<Vec<usize>> {
    (0..posterior.rows)
        .into_par_iter()
        .map(|q| {
            let log = posterior.log_row(q);
            let app = appearance.row(q);
            let mut idx: Vec<usize> = (0..posterior.cols).filter(|&g| mask.get(q, g)).collect();
            idx.sort_by(|&a, &b| {
                let (za, zb) = (log[a] == f64::NEG_INFINITY, log[b] == f64::NEG_INFINITY);
                za.cmp(&zb)
                    .then_with(|| if za { Ordering::Equal } else { log[b].total_cmp(&log[a]) })
                    .then_with(|| app[a].total_cmp(&app[b]))
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RerankOutput {
    pub rankings: Vec<Vec<usize>>,
    pub posterior: PosteriorMatrix,
    pub mask: ValidityMask,
    pub appearance: DistanceMatrix,
    /// Resolved settings recorded in reports.
    pub config: Value,
}

impl RerankOutput {
    pub fn evaluate(&self, dataset: &Dataset) -> Result<EvalReport, MetricsError> {
        evaluate_rankings(dataset, &self.rankings, &self.mask, self.config.clone())
    }

    /// `query,rank,gallery_index,score` with 1-based ranks and linear scores.
    pub fn rankings_csv(&self) -> String {
        let mut out = String::from("query,rank,gallery_index,score\n");
        for (q, ranked) in self.rankings.iter().enumerate() {
            for (r, &g) in ranked.iter().enumerate() {
                out.push_str(&format!(
                    "{q},{},{g},{}\n",
                    r + 1,
                    crate::report::fmt_float(self.posterior.score(q, g))
                ));
            }
        }
        out
    }
}

fn run(
    dataset: &Dataset,
    config: &RerankConfig,
    mask: ValidityMask,
    topology: Option<&CameraTopology>,
    method: &str,
) -> Result<RerankOutput, RerankError> {
    let appearance = compute_distances(dataset, Metric::SquaredEuclidean)?;
    let posterior = posterior_scores(dataset, &appearance, config, &mask, topology)?;
    let rankings = rank_by_posterior(&posterior, &appearance, &mask);
    let config_json = json!({
        "method": method,
        "mask": mask.provenance(),
        "rerank": serde_json::to_value(config).expect("config serializes"),
    });
    Ok(RerankOutput {
        rankings,
        posterior,
        mask,
        appearance,
        config: config_json,
    })
}

/// Re-ranks every query over the exclusion-masked gallery, optionally reduced
/// to a time window first.
pub fn rerank(
    dataset: &Dataset,
    config: &RerankConfig,
    window: Option<&TimeWindow>,
    topology: Option<&CameraTopology>,
) -> Result<RerankOutput, RerankError> {
    let mask = match window {
        Some(w) => reduce_gallery(dataset, w),
        None => ValidityMask::exclusion(dataset),
    };
    let method = match config.spatial_mode() {
        SpatialMode::Off => "temporal_rerank",
        _ => "spatial_temporal_rerank",
    };
    run(dataset, config, mask, topology, method)
}

/// Frame-number re-ranking: within-camera time gaps from frame numbers,
/// no temporal information across cameras.
pub fn rerank_frames_tr(
    dataset: &Dataset,
    frame_mode: &FrameMode,
    sigma: f64,
    prior: &PriorSpec,
) -> Result<RerankOutput, RerankError> {
    let config = RerankConfig {
        frame_mode: Some(frame_mode.clone()),
        ..RerankConfig::new(sigma, prior.clone())
    };
    run(dataset, &config, ValidityMask::exclusion(dataset), None, "frame_rerank")
}
