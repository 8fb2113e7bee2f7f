//! Synthetic camera network with ground-truth trajectories.
//!
//! Every identity is first seen at the query camera, then walks a random path
//! over the gallery cameras. Gaps between leaving one camera and arriving at
//! the next are drawn from the transit prior. Pairs of identities can share a
//! feature centroid ("twins"); the second twin only enters the network after
//! the first has left it, so time separates what appearance cannot.
//!
//! All parameters here are synthetic choices, not measured values.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::dataset::{
    write_features_binary, CameraId, CameraTopology, Dataset, DatasetError, FeatureTable, ImageRecord, Manifest,
};
use crate::metrics::{compute_distances, evaluate, EvalReport, Metric, MetricsError, ValidityMask};
use crate::prior::{sample_prior, PriorError, PriorSpec};
use crate::report::fmt_float;
use crate::rerank::{rerank, RerankConfig, RerankError, SpatialMode};
use crate::temporal::{reduce_gallery, TimeWindow};

/// Walking distance = straight-line distance times this factor.
pub const DETOUR_FACTOR: f64 = 1.3;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Rerank(#[from] RerankError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::InvalidConfig(_) => "InvalidConfig",
            SynthError::Prior(e) => e.code(),
            SynthError::Dataset(e) => e.code(),
            SynthError::Metrics(e) => e.code(),
            SynthError::Rerank(e) => e.code(),
            SynthError::Io { .. } => "Io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Camera 0 is the query camera; the rest are gallery cameras.
    pub n_cameras: usize,
    pub n_identities: usize,
    pub feature_dim: usize,
    /// Identity pairs `(2k, 2k+1)`, `k < ambiguity_pairs`, share a centroid.
    pub ambiguity_pairs: usize,
    /// Gap between leaving a camera and reaching the next one, minutes.
    pub transit_prior: PriorSpec,
    /// Time spent in view of each gallery camera, minutes.
    pub dwell_minutes: f64,
    /// Per-coordinate std of appearance noise around the centroid.
    pub noise_std: f64,
    /// Per-coordinate std of identity centroids.
    pub centroid_std: f64,
    pub sightings_per_identity_per_camera: usize,
    /// Gallery cameras visited per identity.
    pub hops: usize,
    /// Query-camera arrivals are spread uniformly over this many minutes.
    pub arrival_span_minutes: f64,
    /// Minimum minutes between one twin's last sighting and the other twin's
    /// query sighting.
    pub twin_gap_minutes: f64,
    pub day_start_sec: u64,
    /// Frame rate used to derive frame numbers from timestamps.
    pub fps: u32,
    pub seed: u64,
    pub topology_scale_m: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_cameras: 5,
            n_identities: 50,
            feature_dim: 16,
            ambiguity_pairs: 10,
            transit_prior: PriorSpec::gamma(1.5, 0.0, 4.0).expect("valid"),
            dwell_minutes: 1.0,
            noise_std: 0.8,
            centroid_std: 1.0,
            sightings_per_identity_per_camera: 2,
            hops: 1,
            arrival_span_minutes: 90.0,
            twin_gap_minutes: 5.0,
            day_start_sec: 36_000,
            fps: 5,
            seed: 7,
            topology_scale_m: 100.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.n_cameras < 2 {
            return bad("n_cameras must be at least 2".into());
        }
        if self.n_identities < 2 {
            return bad("n_identities must be at least 2".into());
        }
        if self.feature_dim < 2 {
            return bad("feature_dim must be at least 2".into());
        }
        if 2 * self.ambiguity_pairs > self.n_identities {
            return bad(format!(
                "{} ambiguity pairs need {} identities",
                self.ambiguity_pairs,
                2 * self.ambiguity_pairs
            ));
        }
        if self.sightings_per_identity_per_camera == 0 || self.hops == 0 {
            return bad("sightings_per_identity_per_camera and hops must be positive".into());
        }
        if self.hops > 1 && self.n_cameras < 3 {
            return bad("multi-hop walks need at least two gallery cameras".into());
        }
        for (name, v) in [
            ("dwell_minutes", self.dwell_minutes),
            ("noise_std", self.noise_std),
            ("arrival_span_minutes", self.arrival_span_minutes),
            ("twin_gap_minutes", self.twin_gap_minutes),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        for (name, v) in [("centroid_std", self.centroid_std), ("topology_scale_m", self.topology_scale_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.fps == 0 {
            return bad("fps must be positive".into());
        }
        if self.n_cameras > 9100 {
            return bad("at most 9100 cameras".into());
        }
        // fails early for families without a sampler
        sample_prior(&self.transit_prior, 1, 0)?;
        Ok(())
    }

    pub fn camera_ids(&self) -> Vec<CameraId> {
        (0..self.n_cameras)
            .map(|i| CameraId::parse(&format!("c{:04}", 900 + i)).expect("valid token"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Query,
    Gallery,
}

/// One sighting in the ground-truth log (`truth.jsonl`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEvent {
    pub person_id: u32,
    pub split: Split,
    /// Position in its split, i.e. the query or gallery index.
    pub index: usize,
    pub camera: CameraId,
    /// 0 for the query camera, then 1..=hops.
    pub hop: usize,
    pub timestamp_sec: u64,
    pub frame_number: u64,
    pub bbox_index: u32,
    pub filename: String,
    /// The identity sharing this one's centroid, if any.
    pub twin: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub config: SynthConfig,
    pub dataset: Dataset,
    pub topology: CameraTopology,
    pub truth: Vec<TruthEvent>,
}

struct Sighting {
    person_id: u32,
    camera: usize,
    hop: usize,
    minutes: f64,
}

fn random_topology(config: &SynthConfig, rng: &mut ChaCha8Rng) -> CameraTopology {
    let n = config.n_cameras;
    let side = config.topology_scale_m;
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i], points[j]);
            let w = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() * DETOUR_FACTOR;
            d[i * n + j] = w;
            d[j * n + i] = w;
        }
    }
    CameraTopology::new(config.camera_ids(), d).expect("generated topology is valid")
}

fn transit_gap(config: &SynthConfig, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let seed = rng.gen::<u64>();
        let v = sample_prior(&config.transit_prior, 1, seed).expect("validated family")[0];
        if v >= 0.0 && v.is_finite() {
            return v;
        }
    }
}

fn walk(config: &SynthConfig, person_id: u32, start: f64, rng: &mut ChaCha8Rng) -> Vec<Sighting> {
    let mut out = vec![Sighting {
        person_id,
        camera: 0,
        hop: 0,
        minutes: start,
    }];
    let gallery_cams: Vec<usize> = (1..config.n_cameras).collect();
    let (mut current, mut depart) = (0usize, start);
    for hop in 1..=config.hops {
        let next = *gallery_cams
            .iter()
            .filter(|&&c| c != current)
            .collect::<Vec<_>>()
            .choose(rng)
            .expect("at least one other gallery camera");
        let arrival = depart + transit_gap(config, rng);
        let mut times: Vec<f64> = (0..config.sightings_per_identity_per_camera)
            .map(|_| arrival + rng.gen::<f64>() * config.dwell_minutes)
            .collect();
        times.sort_by(f64::total_cmp);
        out.extend(times.into_iter().map(|minutes| Sighting {
            person_id,
            camera: *next,
            hop,
            minutes,
        }));
        current = *next;
        depart = arrival + config.dwell_minutes;
    }
    out
}

/// Builds the dataset, topology and truth log. Deterministic in `config.seed`.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let topology = random_topology(config, &mut rng);
    let cams = config.camera_ids();

    let centroid_dist = Normal::new(0.0, config.centroid_std).expect("positive std");
    let mut centroids: Vec<Vec<f64>> = (0..config.n_identities)
        .map(|_| (0..config.feature_dim).map(|_| centroid_dist.sample(&mut rng)).collect())
        .collect();
    for k in 0..config.ambiguity_pairs {
        centroids[2 * k + 1] = centroids[2 * k].clone();
    }
    let twin_of = |pid: usize| -> Option<u32> {
        if pid < 2 * config.ambiguity_pairs {
            Some((pid ^ 1) as u32)
        } else {
            None
        }
    };

    // First twins and singletons get independent start times; second twins
    // start after their partner's last sighting.
    let mut walks: Vec<Vec<Sighting>> = (0..config.n_identities).map(|_| Vec::new()).collect();
    for (pid, slot) in walks.iter_mut().enumerate() {
        if pid < 2 * config.ambiguity_pairs && pid % 2 == 1 {
            continue;
        }
        let start = rng.gen::<f64>() * config.arrival_span_minutes;
        *slot = walk(config, pid as u32, start, &mut rng);
    }
    for k in 0..config.ambiguity_pairs {
        let end = walks[2 * k].last().expect("non-empty walk").minutes;
        let start = end + config.twin_gap_minutes * (1.0 + rng.gen::<f64>());
        walks[2 * k + 1] = walk(config, (2 * k + 1) as u32, start, &mut rng);
    }

    let noise = Normal::new(0.0, config.noise_std.max(f64::MIN_POSITIVE)).expect("valid std");
    let mut bbox_counts = std::collections::HashMap::<(usize, u64), u32>::new();
    let mut queries = Vec::new();
    let mut gallery = Vec::new();
    let mut truth = Vec::new();
    for sighting in walks.iter().flatten() {
        let timestamp_sec = config.day_start_sec + (sighting.minutes * 60.0).round() as u64;
        let frame_number = timestamp_sec * config.fps as u64;
        let counter = bbox_counts.entry((sighting.camera, frame_number)).or_insert(0);
        let bbox_index = *counter;
        *counter += 1;
        let pid = sighting.person_id as usize;
        let feature: Vec<f64> = centroids[pid]
            .iter()
            .map(|c| {
                let n = if config.noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                // stored as f32 on disk; keep memory and files identical
                (c + n) as f32 as f64
            })
            .collect();
        let record = ImageRecord {
            person_id: sighting.person_id,
            camera: cams[sighting.camera].clone(),
            timestamp_sec,
            frame_number,
            bbox_index,
            feature: Some(feature),
        };
        let (split, index) = if sighting.hop == 0 {
            queries.push(record.clone());
            (Split::Query, queries.len() - 1)
        } else {
            gallery.push(record.clone());
            (Split::Gallery, gallery.len() - 1)
        };
        truth.push(TruthEvent {
            person_id: sighting.person_id,
            split,
            index,
            camera: record.camera.clone(),
            hop: sighting.hop,
            timestamp_sec,
            frame_number,
            bbox_index,
            filename: record.filename(),
            twin: twin_of(pid),
        });
    }

    let dataset = Dataset::new(config.feature_dim, queries, gallery)?;
    Ok(SynthOutput {
        config: config.clone(),
        dataset,
        topology,
        truth,
    })
}

impl SynthOutput {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            query: self.dataset.queries().iter().map(ImageRecord::filename).collect(),
            gallery: self.dataset.gallery().iter().map(ImageRecord::filename).collect(),
        }
    }

    pub fn feature_table(&self) -> FeatureTable {
        FeatureTable {
            dimension: self.dataset.dimension(),
            entries: self
                .dataset
                .queries()
                .iter()
                .chain(self.dataset.gallery())
                .map(|r| (r.filename(), r.feature.clone().expect("synth records carry features")))
                .collect(),
        }
    }

    pub fn truth_jsonl(&self) -> String {
        self.truth
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }

    /// Writes `manifest.txt`, `features.ridf`, `topology.csv`, `truth.jsonl`
    /// and `synth_config.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SynthError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let p = dir.join("manifest.txt");
        fs::write(&p, self.manifest().to_text()).map_err(io(&p))?;
        let p = dir.join("features.ridf");
        let mut buf = Vec::new();
        write_features_binary(&self.feature_table(), &mut buf).map_err(io(&p))?;
        fs::write(&p, buf).map_err(io(&p))?;
        let p = dir.join("topology.csv");
        fs::write(&p, self.topology.to_csv()).map_err(io(&p))?;
        let p = dir.join("truth.jsonl");
        fs::write(&p, self.truth_jsonl()).map_err(io(&p))?;
        let p = dir.join("synth_config.json");
        let meta = json!({
            "config": self.config,
            "detour_factor": DETOUR_FACTOR,
            "note": "synthetic data; every generator parameter is an arbitrary choice",
        });
        fs::write(&p, serde_json::to_string_pretty(&meta).expect("serializes") + "\n").map_err(io(&p))?;
        Ok(())
    }
}

/// Settings for the four-way comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub window_min_minutes: f64,
    pub window_max_minutes: f64,
    pub sigma: f64,
    /// Defaults to the generator's transit prior.
    pub temporal_prior: Option<PriorSpec>,
    pub sigma_s: f64,
    pub metric: Metric,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            window_min_minutes: 0.0,
            window_max_minutes: 30.0,
            sigma: 1.13,
            temporal_prior: None,
            sigma_s: 100.0,
            metric: Metric::Euclidean,
        }
    }
}

/// A synth config plus benchmark settings, as read by `bench`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub synth: SynthConfig,
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub map: f64,
    pub rank1: f64,
    pub rank5: f64,
    pub rank10: f64,
}

impl BenchRow {
    fn from_report(method: &str, r: &EvalReport) -> Self {
        BenchRow {
            method: method.to_string(),
            map: r.map,
            rank1: r.cmc.rank1,
            rank5: r.cmc.rank5,
            rank10: r.cmc.rank10,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.map, self.rank1, self.rank5, self.rank10]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

pub const BENCH_METHODS: [&str; 4] = ["appearance", "window", "temporal", "spatial_temporal"];

impl BenchTable {
    pub fn row(&self, method: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,map,rank1,rank5,rank10\n");
        for r in &self.rows {
            out.push_str(&r.method);
            for v in r.values() {
                out.push(',');
                out.push_str(&fmt_float(v));
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates appearance-only ranking, window filtering, temporal re-ranking
/// and spatial+temporal re-ranking on one generated dataset. Both re-ranking
/// rows work on the windowed gallery.
pub fn run_benchmark_on(output: &SynthOutput, bench: &BenchConfig) -> Result<BenchTable, SynthError> {
    let ds = &output.dataset;
    let window = TimeWindow::new(bench.window_min_minutes, bench.window_max_minutes)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let dist = compute_distances(ds, bench.metric)?;
    let appearance = evaluate(ds, &dist, &ValidityMask::exclusion(ds))?;
    let windowed = evaluate(ds, &dist, &reduce_gallery(ds, &window))?;

    let prior = bench
        .temporal_prior
        .clone()
        .unwrap_or_else(|| output.config.transit_prior.clone());
    let temporal_cfg = RerankConfig::new(bench.sigma, prior);
    let temporal = rerank(ds, &temporal_cfg, Some(&window), None)?.evaluate(ds)?;
    let spatial_cfg = temporal_cfg.with_spatial(SpatialMode::Laplace, bench.sigma_s);
    let spatial = rerank(ds, &spatial_cfg, Some(&window), Some(&output.topology))?.evaluate(ds)?;

    Ok(BenchTable {
        rows: [appearance, windowed, temporal, spatial]
            .iter()
            .zip(BENCH_METHODS)
            .map(|(r, m)| BenchRow::from_report(m, r))
            .collect(),
    })
}

pub fn run_benchmark(config: &SynthConfig, bench: &BenchConfig) -> Result<BenchTable, SynthError> {
    run_benchmark_on(&generate(config)?, bench)
}

/// Mean and sample standard deviation per method and metric across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchAggregate {
    pub runs: usize,
    pub methods: Vec<String>,
    /// `[method][metric] -> (mean, std)`, metrics ordered map, rank1, rank5, rank10.
    pub stats: Vec<[(f64, f64); 4]>,
}

pub fn aggregate(tables: &[BenchTable]) -> Result<BenchAggregate, SynthError> {
    let first = tables
        .first()
        .ok_or_else(|| SynthError::InvalidConfig("nothing to aggregate".into()))?;
    let methods: Vec<String> = first.rows.iter().map(|r| r.method.clone()).collect();
    let n = tables.len() as f64;
    let mut stats = Vec::new();
    for (i, m) in methods.iter().enumerate() {
        let mut cols = [(0.0, 0.0); 4];
        for (k, col) in cols.iter_mut().enumerate() {
            let vals: Vec<f64> = tables
                .iter()
                .map(|t| match t.rows.get(i) {
                    Some(r) if &r.method == m => Ok(r.values()[k]),
                    _ => Err(SynthError::InvalidConfig("bench tables disagree on methods".into())),
                })
                .collect::<Result<_, _>>()?;
            let mean = vals.iter().sum::<f64>() / n;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            *col = (mean, std);
        }
        stats.push(cols);
    }
    Ok(BenchAggregate {
        runs: tables.len(),
        methods,
        stats,
    })
}

impl BenchAggregate {
    /// Mean columns under the usual names, then `_std` columns.
    pub fn to_csv(&self) -> String {
        let names = ["map", "rank1", "rank5", "rank10"];
        let mut out = String::from("method");
        for n in names {
            out.push_str(&format!(",{n}"));
        }
        for n in names {
            out.push_str(&format!(",{n}_std"));
        }
        out.push_str(",runs\n");
        for (m, cols) in self.methods.iter().zip(&self.stats) {
            out.push_str(m);
            for (mean, _) in cols {
                out.push(',');
                out.push_str(&fmt_float(*mean));
            }
            for (_, std) in cols {
                out.push(',');
                out.push_str(&fmt_float(*std));
            }
            out.push_str(&format!(",{}\n", self.runs));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_image_filename;

    fn tiny() -> SynthConfig {
        SynthConfig {
            n_identities: 6,
            ambiguity_pairs: 2,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            SynthConfig { n_cameras: 1, ..tiny() },
            SynthConfig { n_identities: 1, ..tiny() },
            SynthConfig { feature_dim: 1, ..tiny() },
            SynthConfig { ambiguity_pairs: 4, ..tiny() },
            SynthConfig { noise_std: -1.0, ..tiny() },
            SynthConfig { topology_scale_m: 0.0, ..tiny() },
            SynthConfig { sightings_per_identity_per_camera: 0, ..tiny() },
            SynthConfig {
                transit_prior: PriorSpec::kappa3(1.5, 0.0, 1.0).unwrap(),
                ..tiny()
            },
        ];
        for c in bad {
            assert!(generate(&c).is_err(), "{c:?}");
        }
        assert!(generate(&tiny()).is_ok());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate(&tiny()).unwrap();
        let b = generate(&tiny()).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.truth_jsonl(), b.truth_jsonl());
        let c = generate(&SynthConfig { seed: 8, ..tiny() }).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn shape_of_output() {
        let cfg = tiny();
        let out = generate(&cfg).unwrap();
        assert_eq!(out.dataset.num_queries(), cfg.n_identities);
        assert_eq!(
            out.dataset.num_gallery(),
            cfg.n_identities * cfg.hops * cfg.sightings_per_identity_per_camera
        );
        assert!(out.dataset.queries().iter().all(|r| r.camera.as_str() == "c0900"));
        assert!(out.dataset.gallery().iter().all(|r| r.camera.as_str() != "c0900"));
        assert_eq!(out.topology.len(), cfg.n_cameras);
    }

    #[test]
    fn twins_share_centroids_and_are_time_disjoint() {
        let cfg = SynthConfig {
            noise_std: 0.0,
            ..tiny()
        };
        let out = generate(&cfg).unwrap();
        let q = out.dataset.queries();
        assert_eq!(q[0].feature, q[1].feature);
        assert_ne!(q[0].feature, q[4].feature);
        let last0 = out.truth.iter().filter(|e| e.person_id == 0).map(|e| e.timestamp_sec).max().unwrap();
        let first1 = out.truth.iter().filter(|e| e.person_id == 1).map(|e| e.timestamp_sec).min().unwrap();
        assert!(first1 > last0);
    }

    #[test]
    fn consecutive_sightings_move_forward() {
        let out = generate(&SynthConfig::default()).unwrap();
        for pid in 0..out.config.n_identities as u32 {
            let times: Vec<u64> = out.truth.iter().filter(|e| e.person_id == pid).map(|e| e.timestamp_sec).collect();
            assert!(times.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn filenames_parse_to_records() {
        let out = generate(&tiny()).unwrap();
        for e in &out.truth {
            let r = match e.split {
                Split::Query => &out.dataset.queries()[e.index],
                Split::Gallery => &out.dataset.gallery()[e.index],
            };
            let mut parsed = parse_image_filename(&e.filename).unwrap();
            parsed.feature = r.feature.clone();
            assert_eq!(&parsed, r);
        }
    }

    #[test]
    fn twin_pair_is_resolved_by_time() {
        let cfg = SynthConfig {
            n_identities: 2,
            ambiguity_pairs: 1,
            noise_std: 0.0,
            ..Default::default()
        };
        let t = run_benchmark(&cfg, &BenchConfig::default()).unwrap();
        assert_eq!(t.row("appearance").unwrap().rank1, 0.5);
        assert_eq!(t.row("temporal").unwrap().rank1, 1.0);
    }

    #[test]
    fn uniform_prior_reproduces_window_row() {
        let bench = BenchConfig {
            temporal_prior: Some(PriorSpec::box_uniform(0.0, 30.0).unwrap()),
            ..Default::default()
        };
        let t = run_benchmark(&SynthConfig::default(), &bench).unwrap();
        assert_eq!(t.row("temporal").unwrap().values(), t.row("window").unwrap().values());
    }

    #[test]
    fn default_benchmark_direction() {
        let t = run_benchmark(&SynthConfig::default(), &BenchConfig::default()).unwrap();
        let m: Vec<f64> = BENCH_METHODS.iter().map(|k| t.row(k).unwrap().map).collect();
        assert!(m[0] < m[1] && m[1] < m[2], "{m:?}");
        assert!((m[3] - m[2]).abs() < 0.02, "{m:?}");
        assert_eq!(t.to_csv().lines().count(), 5);
    }

    #[test]
    fn truth_log_recovers_relevance_sets() {
        let out = generate(&SynthConfig::default()).unwrap();
        let expected = crate::metrics::relevant_sets(&out.dataset, &ValidityMask::exclusion(&out.dataset));
        let events: Vec<TruthEvent> = out
            .truth_jsonl()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        for (qi, rel) in expected.iter().enumerate() {
            let q = events.iter().find(|e| e.split == Split::Query && e.index == qi).unwrap();
            let from_log: std::collections::HashSet<usize> = events
                .iter()
                .filter(|e| e.split == Split::Gallery && e.person_id == q.person_id && e.camera != q.camera)
                .map(|e| e.index)
                .collect();
            assert_eq!(&from_log, rel);
        }
    }

    #[test]
    fn fitted_transit_prior_matches_generator() {
        let cfg = SynthConfig {
            n_identities: 300,
            ambiguity_pairs: 0,
            dwell_minutes: 0.0,
            sightings_per_identity_per_camera: 1,
            ..Default::default()
        };
        let out = generate(&cfg).unwrap();
        let dts: Vec<f64> = crate::temporal::empirical_delta_t(&out.dataset)
            .unwrap()
            .into_iter()
            .map(|d| d.delta_t_minutes)
            .collect();
        assert!(dts.len() >= 200 && dts.iter().all(|d| *d >= 0.0 && d.is_finite()));
        let fit = crate::prior::fit_prior(&dts, crate::prior::Family::Gamma, &crate::prior::FitOptions::fixed_loc(-0.01))
            .unwrap();
        let a = fit.spec.shape_param("a");
        assert!((a - 1.5).abs() / 1.5 < 0.15, "a = {a}");
        assert!((fit.spec.scale() - 4.0).abs() / 4.0 < 0.15, "scale = {}", fit.spec.scale());
    }

    #[test]
    fn aggregate_statistics() {
        let t = |m: f64| BenchTable {
            rows: vec![BenchRow {
                method: "x".into(),
                map: m,
                rank1: 1.0,
                rank5: 1.0,
                rank10: 1.0,
            }],
        };
        let agg = aggregate(&[t(0.2), t(0.4), t(0.6)]).unwrap();
        assert!((agg.stats[0][0].0 - 0.4).abs() < 1e-15);
        assert!((agg.stats[0][0].1 - 0.2).abs() < 1e-15);
        assert_eq!(agg.stats[0][1], (1.0, 0.0));
        assert!(aggregate(&[]).is_err());
        let csv = agg.to_csv();
        assert!(csv.starts_with("method,map,rank1,rank5,rank10,map_std,rank1_std,rank5_std,rank10_std,runs\n"));
    }
}
