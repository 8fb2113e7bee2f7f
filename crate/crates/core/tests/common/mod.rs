//! Independent oracles shared by integration tests: double-exponential
//! quadrature, brute-force retrieval metrics and random instance builders.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reid_temporal::dataset::{CameraId, Dataset, ImageRecord};

/// Trapezoid sums over `t in [-t_max, t_max]` with step `h`, refined by
/// halving until two levels agree.
fn refine(term: impl Fn(f64) -> f64, t_max: f64) -> f64 {
    let sum_at = |h: f64, odd_only: bool| -> f64 {
        let n = (t_max / h).ceil() as i64;
        let mut s = 0.0;
        for k in -n..=n {
            if odd_only && k % 2 == 0 {
                continue;
            }
            let v = term(k as f64 * h);
            if v.is_finite() {
                s += v;
            }
        }
        s
    };
    let mut h = 0.5;
    let mut total = sum_at(h, false);
    let mut estimate = total * h;
    for _ in 0..10 {
        h /= 2.0;
        total += sum_at(h, true);
        let next = total * h;
        if (next - estimate).abs() < 1e-12 * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// tanh-sinh on a finite interval. Endpoint singularities are tolerated:
/// abscissae that round onto an endpoint, or where `f` is not finite, are
/// dropped.
pub fn tanh_sinh(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let w = b - a;
    refine(
        |t| {
            let u = FRAC_PI_2 * t.sinh();
            let x = if u < 0.0 { a + w / (1.0 + (-2.0 * u).exp()) } else { b - w / (1.0 + (2.0 * u).exp()) };
            if x <= a || x >= b {
                return 0.0;
            }
            let c = u.cosh();
            f(x) * w * FRAC_PI_2 * t.cosh() / (2.0 * c * c)
        },
        4.0,
    )
}

/// exp-sinh on `[a, inf)`.
pub fn exp_sinh(f: &dyn Fn(f64) -> f64, a: f64) -> f64 {
    refine(
        |t| {
            let e = (FRAC_PI_2 * t.sinh()).exp();
            let x = a + e;
            if x <= a || !x.is_finite() {
                return 0.0;
            }
            f(x) * e * FRAC_PI_2 * t.cosh()
        },
        4.5,
    )
}

/// Integral of `f` over `[lo, hi]` with optional interior break point.
pub fn integrate(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, split: Option<f64>) -> f64 {
    if let Some(s) = split.filter(|s| lo < *s && *s < hi) {
        return integrate(f, lo, s, None) + integrate(f, s, hi, None);
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => tanh_sinh(f, lo, hi),
        (true, false) => exp_sinh(f, lo),
        (false, true) => exp_sinh(&|x| f(-x), -hi),
        (false, false) => integrate(f, f64::NEG_INFINITY, 0.0, None) + integrate(f, 0.0, f64::INFINITY, None),
    }
}

/// mAP and first-match CMC at 1/5/10/20 straight from the definitions:
/// rank valid items by Euclidean distance (ties by index), average the
/// precision at each relevant position.
pub struct BruteForce {
    pub map: f64,
    pub cmc: [f64; 4],
    pub evaluated: usize,
}

pub fn brute_force_metrics(
    query_feats: &[Vec<f64>],
    gallery_feats: &[Vec<f64>],
    relevant: &dyn Fn(usize, usize) -> bool,
    valid: &dyn Fn(usize, usize) -> bool,
) -> Option<BruteForce> {
    let mut ap_sum = 0.0;
    let mut hits = [0usize; 4];
    let mut evaluated = 0;
    for (q, xq) in query_feats.iter().enumerate() {
        let mut items: Vec<(f64, usize)> = Vec::new();
        for (g, xg) in gallery_feats.iter().enumerate() {
            if valid(q, g) {
                let mut s = 0.0;
                for i in 0..xq.len() {
                    s += (xq[i] - xg[i]) * (xq[i] - xg[i]);
                }
                items.push((s.sqrt(), g));
            }
        }
        // insertion sort: stable, so equal distances keep index order
        for i in 1..items.len() {
            let mut j = i;
            while j > 0 && items[j - 1].0 > items[j].0 {
                items.swap(j - 1, j);
                j -= 1;
            }
        }
        let flags: Vec<bool> = items.iter().map(|&(_, g)| relevant(q, g)).collect();
        let total = flags.iter().filter(|&&f| f).count();
        if total == 0 {
            continue;
        }
        evaluated += 1;
        let mut found = 0;
        let mut precisions = 0.0;
        for (pos, &flag) in flags.iter().enumerate() {
            if flag {
                found += 1;
                precisions += found as f64 / (pos + 1) as f64;
            }
        }
        ap_sum += precisions / total as f64;
        let first = flags.iter().position(|&f| f).unwrap();
        for (slot, k) in [1, 5, 10, 20].iter().enumerate() {
            if first < *k {
                hits[slot] += 1;
            }
        }
    }
    if evaluated == 0 {
        return None;
    }
    Some(BruteForce {
        map: ap_sum / evaluated as f64,
        cmc: hits.map(|h| h as f64 / evaluated as f64),
        evaluated,
    })
}

pub fn cam(n: u32) -> CameraId {
    CameraId::parse(&format!("c{n}")).unwrap()
}

pub fn record(pid: u32, camera: u32, t: u64, feature: Vec<f64>) -> ImageRecord {
    ImageRecord {
        person_id: pid,
        camera: cam(camera),
        timestamp_sec: t,
        frame_number: t,
        bbox_index: 0,
        feature: Some(feature),
    }
}

/// Random small dataset. Features sit on a coarse grid so distance ties are
/// common; identities, cameras and times are drawn from small ranges so
/// matches, exclusions and window boundaries all occur.
pub fn random_dataset(rng: &mut ChaCha8Rng, max_q: usize, max_g: usize) -> Dataset {
    let dim = rng.gen_range(1..=4);
    let n_q = rng.gen_range(1..=max_q);
    let n_g = rng.gen_range(1..=max_g);
    let n_ids = rng.gen_range(1..=8u32);
    let make = |rng: &mut ChaCha8Rng| {
        record(
            rng.gen_range(0..n_ids),
            rng.gen_range(1..=3),
            rng.gen_range(0..7200),
            (0..dim).map(|_| rng.gen_range(0..4) as f64 * 0.5).collect(),
        )
    };
    let queries = (0..n_q).map(|_| make(rng)).collect();
    let gallery = (0..n_g).map(|_| make(rng)).collect();
    Dataset::new(dim, queries, gallery).unwrap()
}
