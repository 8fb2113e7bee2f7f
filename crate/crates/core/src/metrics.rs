//! Distance matrices, ranked lists, AP/mAP and first-match CMC.
//!
//! Gallery items sharing both person ID and camera with the query are
//! excluded from evaluation, as are items removed by a temporal filter; the
//! combined flag lives in a [`ValidityMask`]. Queries with no valid relevant
//! gallery item are skipped and do not count towards any denominator.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::report::{digest_json, fmt_float};

/// Ranks reported in every [`EvalReport`].
pub const CMC_RANKS: [usize; 4] = [1, 5, 10, 20];

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("zero-norm feature vector for {0:?} under cosine distance")]
    ZeroNormVector(String),
    #[error("no relevant items in the ranked list")]
    NoRelevantItems,
    #[error("every query was skipped: no query has a valid relevant gallery item")]
    AllQueriesSkipped,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::Dataset(e) => e.code(),
            MetricsError::ZeroNormVector(_) => "ZeroNormVector",
            MetricsError::NoRelevantItems => "NoRelevantItems",
            MetricsError::AllQueriesSkipped => "AllQueriesSkipped",
            MetricsError::ShapeMismatch(_) => "ShapeMismatch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    SquaredEuclidean,
    CosineDistance,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::SquaredEuclidean => "squared_euclidean",
            Metric::CosineDistance => "cosine_distance",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "squared_euclidean" => Ok(Metric::SquaredEuclidean),
            "cosine" | "cosine_distance" => Ok(Metric::CosineDistance),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Row-major `|Q| x |G|` distances; lower means more similar.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>, metric: Metric) -> Result<Self, MetricsError> {
        if values.len() != rows * cols {
            return Err(MetricsError::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(MetricsError::ShapeMismatch(format!("distance {v} is not finite and non-negative")));
        }
        Ok(DistanceMatrix {
            rows,
            cols,
            values,
            metric,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, q: usize, g: usize) -> f64 {
        self.values[q * self.cols + g]
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.values[q * self.cols..(q + 1) * self.cols]
    }
}

pub fn compute_distances(dataset: &Dataset, metric: Metric) -> Result<DistanceMatrix, MetricsError> {
    let gallery: Vec<&[f64]> = dataset
        .gallery()
        .iter()
        .map(|r| r.feature())
        .collect::<Result<_, _>>()?;
    let gallery_norms: Vec<f64> = gallery.iter().map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    if metric == Metric::CosineDistance {
        if let Some(i) = gallery_norms.iter().position(|n| *n == 0.0) {
            return Err(MetricsError::ZeroNormVector(dataset.gallery()[i].filename()));
        }
    }

    let rows: Vec<Vec<f64>> = dataset
        .queries()
        .par_iter()
        .map(|rec| {
            let q = rec.feature()?;
            let q_norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if metric == Metric::CosineDistance && q_norm == 0.0 {
                return Err(MetricsError::ZeroNormVector(rec.filename()));
            }
            Ok(gallery
                .iter()
                .zip(&gallery_norms)
                .map(|(g, g_norm)| match metric {
                    Metric::Euclidean => squared_euclidean(q, g).sqrt(),
                    Metric::SquaredEuclidean => squared_euclidean(q, g),
                    Metric::CosineDistance => {
                        let dot: f64 = q.iter().zip(*g).map(|(a, b)| a * b).sum();
                        (1.0 - dot / (q_norm * g_norm)).max(0.0)
                    }
                })
                .collect())
        })
        .collect::<Result<_, MetricsError>>()?;

    Ok(DistanceMatrix {
        rows: dataset.num_queries(),
        cols: dataset.num_gallery(),
        values: rows.concat(),
        metric,
    })
}

/// Per query-gallery flag: `true` means the gallery item takes part in
/// ranking and evaluation for that query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityMask {
    rows: usize,
    cols: usize,
    kept: Vec<bool>,
    provenance: String,
}

impl ValidityMask {
    pub fn all_valid(rows: usize, cols: usize) -> Self {
        ValidityMask {
            rows,
            cols,
            kept: vec![true; rows * cols],
            provenance: "none".into(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, provenance: impl Into<String>, f: impl Fn(usize, usize) -> bool) -> Self {
        let kept = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        ValidityMask {
            rows,
            cols,
            kept,
            provenance: provenance.into(),
        }
    }

    /// Drops gallery items with the same person ID and camera as the query.
    pub fn exclusion(dataset: &Dataset) -> Self {
        let (q, g) = (dataset.queries(), dataset.gallery());
        Self::from_fn(q.len(), g.len(), "exclude_same_pid_same_camera", |i, j| {
            !(q[i].person_id == g[j].person_id && q[i].camera == g[j].camera)
        })
    }

    /// Cell-wise AND; provenance strings are joined with `+`.
    pub fn and(&self, other: &ValidityMask) -> Result<Self, MetricsError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MetricsError::ShapeMismatch("mask shapes differ".into()));
        }
        Ok(ValidityMask {
            rows: self.rows,
            cols: self.cols,
            kept: self.kept.iter().zip(&other.kept).map(|(a, b)| *a && *b).collect(),
            provenance: format!("{}+{}", self.provenance, other.provenance),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn get(&self, q: usize, g: usize) -> bool {
        self.kept[q * self.cols + g]
    }

    pub fn row(&self, q: usize) -> &[bool] {
        &self.kept[q * self.cols..(q + 1) * self.cols]
    }

    /// `self` keeps nothing that `other` drops.
    pub fn is_subset_of(&self, other: &ValidityMask) -> bool {
        self.kept.len() == other.kept.len() && self.kept.iter().zip(&other.kept).all(|(a, b)| !*a || *b)
    }

    pub fn count_kept(&self) -> usize {
        self.kept.iter().filter(|k| **k).count()
    }

    /// `q_index,g_index,kept` rows for auditing.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q_index,g_index,kept\n");
        for q in 0..self.rows {
            for g in 0..self.cols {
                out.push_str(&format!("{q},{g},{}\n", u8::from(self.get(q, g))));
            }
        }
        out
    }
}

/// Valid gallery indices per query, by distance ascending then index.
pub fn rank_gallery(dist: &DistanceMatrix, mask: &ValidityMask) -> Result<Vec<Vec<usize>>, MetricsError> {
    if (dist.rows, dist.cols) != (mask.rows, mask.cols) {
        return Err(MetricsError::ShapeMismatch(format!(
            "distances {}x{} vs mask {}x{}",
            dist.rows, dist.cols, mask.rows, mask.cols
        )));
    }
    Ok((0..dist.rows)
        .into_par_iter()
        .map(|q| {
            let d = dist.row(q);
            let mut idx: Vec<usize> = (0..dist.cols).filter(|&g| mask.get(q, g)).collect();
            idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
            idx
        })
        .collect())
}

/// Mean of precision@k over the positions of relevant items in `ranked`.
/// Relevant items absent from `ranked` are ignored.
pub fn average_precision(ranked: &[usize], relevant: &HashSet<usize>) -> Result<f64, MetricsError> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, g) in ranked.iter().enumerate() {
        if relevant.contains(g) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(MetricsError::NoRelevantItems);
    }
    Ok(sum / hits as f64)
}

/// 1-based position of the first relevant item.
pub fn first_match(ranked: &[usize], relevant: &HashSet<usize>) -> Option<usize> {
    ranked.iter().position(|g| relevant.contains(g)).map(|p| p + 1)
}

/// Fraction of evaluable queries whose first match is within the top `k`.
pub fn cmc_at(ranked: &[Vec<usize>], relevant: &[HashSet<usize>], ks: &[usize]) -> BTreeMap<usize, f64> {
    let firsts: Vec<usize> = ranked
        .iter()
        .zip(relevant)
        .filter_map(|(r, rel)| first_match(r, rel))
        .collect();
    ks.iter()
        .map(|&k| {
            let rate = if firsts.is_empty() {
                0.0
            } else {
                firsts.iter().filter(|&&p| p <= k).count() as f64 / firsts.len() as f64
            };
            (k, rate)
        })
        .collect()
}

/// Gallery items with the query's person ID that the mask keeps.
pub fn relevant_sets(dataset: &Dataset, mask: &ValidityMask) -> Vec<HashSet<usize>> {
    dataset
        .queries()
        .iter()
        .enumerate()
        .map(|(q, rec)| {
            dataset
                .gallery()
                .iter()
                .enumerate()
                .filter(|(g, grec)| grec.person_id == rec.person_id && mask.get(q, *g))
                .map(|(g, _)| g)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cmc {
    #[serde(rename = "1")]
    pub rank1: f64,
    #[serde(rename = "5")]
    pub rank5: f64,
    #[serde(rename = "10")]
    pub rank10: f64,
    #[serde(rename = "20")]
    pub rank20: f64,
}

impl Cmc {
    pub fn get(&self, k: usize) -> Option<f64> {
        match k {
            1 => Some(self.rank1),
            5 => Some(self.rank5),
            10 => Some(self.rank10),
            20 => Some(self.rank20),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub map: f64,
    pub cmc: Cmc,
    /// One entry per query; `None` for skipped queries.
    pub per_query_ap: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
    pub config: Value,
    pub config_digest: String,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "map,rank1,rank5,rank10,rank20,evaluated,skipped,config_digest";

    pub fn evaluated(&self) -> usize {
        self.per_query_ap.len() - self.skipped.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_float(self.map),
            fmt_float(self.cmc.rank1),
            fmt_float(self.cmc.rank5),
            fmt_float(self.cmc.rank10),
            fmt_float(self.cmc.rank20),
            self.evaluated(),
            self.skipped.len(),
            self.config_digest
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

/// Scores precomputed rankings. Relevance is taken from person IDs, restricted
/// to items the mask keeps.
pub fn evaluate_rankings(
    dataset: &Dataset,
    rankings: &[Vec<usize>],
    mask: &ValidityMask,
    config: Value,
) -> Result<EvalReport, MetricsError> {
    if rankings.len() != dataset.num_queries() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} rankings for {} queries",
            rankings.len(),
            dataset.num_queries()
        )));
    }
    let relevant = relevant_sets(dataset, mask);
    let per_query_ap: Vec<Option<f64>> = rankings
        .iter()
        .zip(&relevant)
        .map(|(r, rel)| average_precision(r, rel).ok())
        .collect();
    let skipped: Vec<usize> = per_query_ap
        .iter()
        .enumerate()
        .filter(|(_, ap)| ap.is_none())
        .map(|(q, _)| q)
        .collect();
    let aps: Vec<f64> = per_query_ap.iter().flatten().copied().collect();
    if aps.is_empty() {
        return Err(MetricsError::AllQueriesSkipped);
    }
    let map = aps.iter().sum::<f64>() / aps.len() as f64;
    let cmc = cmc_at(rankings, &relevant, &CMC_RANKS);
    let config_digest = digest_json(&config);
    Ok(EvalReport {
        map,
        cmc: Cmc {
            rank1: cmc[&1],
            rank5: cmc[&5],
            rank10: cmc[&10],
            rank20: cmc[&20],
        },
        per_query_ap,
        skipped,
        config,
        config_digest,
    })
}

/// Full protocol: rank by distance under `mask`, then score.
pub fn evaluate(dataset: &Dataset, dist: &DistanceMatrix, mask: &ValidityMask) -> Result<EvalReport, MetricsError> {
    let rankings = rank_gallery(dist, mask)?;
    let config = json!({
        "method": "appearance",
        "metric": dist.metric().name(),
        "mask": mask.provenance(),
    });
    evaluate_rankings(dataset, &rankings, mask, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CameraId, ImageRecord};
    use proptest::prelude::*;

    fn rec(pid: u32, cam: &str, feature: Vec<f64>) -> ImageRecord {
        ImageRecord {
            person_id: pid,
            camera: CameraId::parse(cam).unwrap(),
            timestamp_sec: 0,
            frame_number: 0,
            bbox_index: 0,
            feature: Some(feature),
        }
    }

    fn set(items: &[usize]) -> HashSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn euclidean_three_four_five() {
        let ds = Dataset::new(2, vec![rec(0, "c1", vec![0.0, 0.0])], vec![rec(1, "c2", vec![3.0, 4.0])]).unwrap();
        assert_eq!(compute_distances(&ds, Metric::Euclidean).unwrap().get(0, 0), 5.0);
        assert_eq!(compute_distances(&ds, Metric::SquaredEuclidean).unwrap().get(0, 0), 25.0);
    }

    #[test]
    fn identical_vectors_have_zero_distance() {
        let v = vec![0.3, -1.2, 2.5];
        let ds = Dataset::new(3, vec![rec(0, "c1", v.clone())], vec![rec(1, "c2", v)]).unwrap();
        for m in [Metric::Euclidean, Metric::SquaredEuclidean, Metric::CosineDistance] {
            assert!(compute_distances(&ds, m).unwrap().get(0, 0).abs() < 1e-15, "{m:?}");
        }
    }

    #[test]
    fn cosine_rejects_zero_norm() {
        let ds = Dataset::new(2, vec![rec(0, "c1", vec![1.0, 0.0])], vec![rec(1, "c2", vec![0.0, 0.0])]).unwrap();
        assert!(matches!(
            compute_distances(&ds, Metric::CosineDistance),
            Err(MetricsError::ZeroNormVector(_))
        ));
        assert!(compute_distances(&ds, Metric::Euclidean).is_ok());
    }

    #[test]
    fn missing_feature_propagates() {
        let mut g = rec(1, "c2", vec![0.0, 0.0]);
        g.feature = None;
        let ds = Dataset::new(2, vec![rec(0, "c1", vec![1.0, 0.0])], vec![g]).unwrap();
        assert!(matches!(
            compute_distances(&ds, Metric::Euclidean),
            Err(MetricsError::Dataset(DatasetError::MissingFeature(_)))
        ));
    }

    fn dm(rows: usize, cols: usize, v: Vec<f64>) -> DistanceMatrix {
        DistanceMatrix::from_values(rows, cols, v, Metric::Euclidean).unwrap()
    }

    #[test]
    fn ranking_order_and_ties() {
        let all = ValidityMask::all_valid(1, 3);
        assert_eq!(rank_gallery(&dm(1, 3, vec![0.2, 0.1, 0.3]), &all).unwrap(), vec![vec![1, 0, 2]]);
        let all2 = ValidityMask::all_valid(1, 2);
        assert_eq!(rank_gallery(&dm(1, 2, vec![0.1, 0.1]), &all2).unwrap(), vec![vec![0, 1]]);
        let mask = ValidityMask::from_fn(1, 3, "t", |_, g| g != 1);
        assert_eq!(rank_gallery(&dm(1, 3, vec![0.2, 0.1, 0.3]), &mask).unwrap(), vec![vec![0, 2]]);
    }

    #[test]
    fn ap_examples() {
        let ap = average_precision(&[0, 1, 2, 3, 4], &set(&[0, 2])).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&[3, 1, 0, 2], &set(&[3, 1])).unwrap(), 1.0);
        assert!(matches!(
            average_precision(&[0, 1], &set(&[5])),
            Err(MetricsError::NoRelevantItems)
        ));
    }

    #[test]
    fn cmc_first_match_example() {
        let ranked = vec![(0..10).collect::<Vec<_>>(), (0..10).collect()];
        let rel = vec![set(&[0]), set(&[5, 7])];
        let cmc = cmc_at(&ranked, &rel, &[1, 5, 10]);
        assert_eq!(cmc[&1], 0.5);
        assert_eq!(cmc[&5], 0.5);
        assert_eq!(cmc[&10], 1.0);
    }

    #[test]
    fn cmc_skips_queries_without_relevant_items() {
        let ranked = vec![vec![0, 1], vec![0, 1]];
        let rel = vec![set(&[0]), set(&[])];
        assert_eq!(cmc_at(&ranked, &rel, &[1])[&1], 1.0);
    }

    #[test]
    fn evaluate_single_query() {
        // Gallery relevant at ranks 1 and 3 by distance.
        let ds = Dataset::new(
            1,
            vec![rec(7, "c1", vec![0.0])],
            vec![
                rec(7, "c2", vec![0.1]),
                rec(3, "c2", vec![0.2]),
                rec(7, "c3", vec![0.3]),
                rec(4, "c3", vec![0.4]),
            ],
        )
        .unwrap();
        let dist = compute_distances(&ds, Metric::Euclidean).unwrap();
        let report = evaluate(&ds, &dist, &ValidityMask::exclusion(&ds)).unwrap();
        assert!((report.map - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(report.cmc.rank1, 1.0);
        assert!(report.skipped.is_empty());
    }

    #[test]
    fn same_camera_match_is_excluded() {
        let base = vec![rec(7, "c2", vec![0.5]), rec(3, "c2", vec![0.2])];
        let mut with_junk = base.clone();
        with_junk.insert(0, rec(7, "c1", vec![0.0]));
        let q = vec![rec(7, "c1", vec![0.0])];
        let a = Dataset::new(1, q.clone(), base).unwrap();
        let b = Dataset::new(1, q, with_junk).unwrap();
        let ra = evaluate(&a, &compute_distances(&a, Metric::Euclidean).unwrap(), &ValidityMask::exclusion(&a)).unwrap();
        let rb = evaluate(&b, &compute_distances(&b, Metric::Euclidean).unwrap(), &ValidityMask::exclusion(&b)).unwrap();
        assert_eq!(ra.map, 0.5);
        assert_eq!(ra.map, rb.map);
        assert_eq!(ra.cmc, rb.cmc);
    }

    #[test]
    fn all_skipped_is_an_error() {
        let ds = Dataset::new(1, vec![rec(1, "c1", vec![0.0])], vec![rec(2, "c2", vec![0.0])]).unwrap();
        let dist = compute_distances(&ds, Metric::Euclidean).unwrap();
        assert!(matches!(
            evaluate(&ds, &dist, &ValidityMask::exclusion(&ds)),
            Err(MetricsError::AllQueriesSkipped)
        ));
    }

    #[test]
    fn report_json_shape() {
        let ds = Dataset::new(1, vec![rec(1, "c1", vec![0.0])], vec![rec(1, "c2", vec![0.0])]).unwrap();
        let dist = compute_distances(&ds, Metric::Euclidean).unwrap();
        let report = evaluate(&ds, &dist, &ValidityMask::exclusion(&ds)).unwrap();
        let v: Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["map"], 1.0);
        assert_eq!(v["cmc"]["20"], 1.0);
        assert_eq!(v["per_query_ap"][0], 1.0);
        assert!(v["skipped"].as_array().unwrap().is_empty());
        assert_eq!(v["config"]["metric"], "euclidean");
        let text = report.to_json();
        let order: Vec<usize> = ["\"1\"", "\"5\"", "\"10\"", "\"20\""].iter().map(|k| text.find(k).unwrap()).collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(report.to_csv().lines().count(), 2);
    }

    fn random_instance() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<bool>, Vec<bool>)> {
        (1usize..8, 1usize..25).prop_flat_map(|(q, g)| {
            (
                Just(q),
                Just(g),
                prop::collection::vec(0.0f64..10.0, q * g),
                prop::collection::vec(prop::bool::weighted(0.8), q * g),
                prop::collection::vec(prop::bool::weighted(0.3), q * g),
            )
        })
    }

    proptest! {
        #[test]
        fn masked_items_never_ranked((q, g, d, keep, _rel) in random_instance()) {
            let mask = ValidityMask::from_fn(q, g, "p", |i, j| keep[i * g + j]);
            let ranked = rank_gallery(&dm(q, g, d.clone()), &mask).unwrap();
            for (i, r) in ranked.iter().enumerate() {
                prop_assert_eq!(r.len(), keep[i * g..(i + 1) * g].iter().filter(|k| **k).count());
                for &j in r {
                    prop_assert!(mask.get(i, j));
                }
                for w in r.windows(2) {
                    let (a, b) = (d[i * g + w[0]], d[i * g + w[1]]);
                    prop_assert!(a < b || (a == b && w[0] < w[1]));
                }
            }
        }

        #[test]
        fn ap_bounds_and_perfect_iff_relevant_first((q, g, d, keep, rel) in random_instance()) {
            let mask = ValidityMask::from_fn(q, g, "p", |i, j| keep[i * g + j]);
            let ranked = rank_gallery(&dm(q, g, d), &mask).unwrap();
            for (i, r) in ranked.iter().enumerate() {
                let relevant: HashSet<usize> = (0..g).filter(|&j| rel[i * g + j]).collect();
                if let Ok(ap) = average_precision(r, &relevant) {
                    prop_assert!((0.0..=1.0).contains(&ap));
                    let n_rel = r.iter().filter(|j| relevant.contains(j)).count();
                    let perfect = r[..n_rel].iter().all(|j| relevant.contains(j));
                    prop_assert_eq!(ap == 1.0, perfect);
                }
            }
        }

        #[test]
        fn cmc_is_monotone((q, g, d, keep, rel) in random_instance()) {
            let mask = ValidityMask::from_fn(q, g, "p", |i, j| keep[i * g + j]);
            let ranked = rank_gallery(&dm(q, g, d), &mask).unwrap();
            let relevant: Vec<HashSet<usize>> = (0..q).map(|i| (0..g).filter(|&j| rel[i * g + j]).collect()).collect();
            let cmc = cmc_at(&ranked, &relevant, &[1, 5, 10, 20]);
            prop_assert!(cmc[&1] <= cmc[&5] && cmc[&5] <= cmc[&10] && cmc[&10] <= cmc[&20]);
        }

        #[test]
        fn map_invariant_under_increasing_transform((q, g, d, keep, rel) in random_instance()) {
            let mask = ValidityMask::from_fn(q, g, "p", |i, j| keep[i * g + j]);
            let relevant: Vec<HashSet<usize>> = (0..q).map(|i| (0..g).filter(|&j| rel[i * g + j]).collect()).collect();
            let transformed: Vec<f64> = d.iter().map(|x| (x * 0.5).exp() + 3.0).collect();
            let a = rank_gallery(&dm(q, g, d), &mask).unwrap();
            let b = rank_gallery(&dm(q, g, transformed), &mask).unwrap();
            for i in 0..q {
                prop_assert_eq!(average_precision(&a[i], &relevant[i]).ok(), average_precision(&b[i], &relevant[i]).ok());
            }
        }

        #[test]
        fn removing_irrelevant_items_never_lowers_ap((q, g, d, keep, rel) in random_instance(), drop in prop::collection::vec(any::<bool>(), 25)) {
            let mask = ValidityMask::from_fn(q, g, "p", |i, j| keep[i * g + j]);
            let reduced = ValidityMask::from_fn(q, g, "p", |i, j| keep[i * g + j] && (rel[i * g + j] || !drop[j]));
            let relevant: Vec<HashSet<usize>> = (0..q).map(|i| (0..g).filter(|&j| rel[i * g + j]).collect()).collect();
            let a = rank_gallery(&dm(q, g, d.clone()), &mask).unwrap();
            let b = rank_gallery(&dm(q, g, d), &reduced).unwrap();
            for i in 0..q {
                if let (Ok(full), Ok(red)) = (average_precision(&a[i], &relevant[i]), average_precision(&b[i], &relevant[i])) {
                    prop_assert!(red >= full - 1e-15);
                }
            }
        }
    }
}
