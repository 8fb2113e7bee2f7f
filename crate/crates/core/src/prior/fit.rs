//! Maximum-likelihood fitting of priors to time-gap samples (minutes).
//!
//! Families bounded below (gamma, exponential, chi2, weibull_min, kappa3, beta,
//! pareto) have their location either fixed or profiled over a coarse grid
//! below the sample minimum; with a free location the gamma likelihood is
//! unbounded for `a < 1`. Real-line families optimize location jointly.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use super::nelder_mead::{minimize, NelderMeadOptions};
use super::{Family, PriorError, PriorSpec};

pub const MIN_FIT_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocPolicy {
    Fixed(f64),
    /// Grid of `grid_points` locations `min - 1 + k / grid_points`,
    /// `k = 0..grid_points`, for families bounded below.
    Profile { grid_points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub loc: LocPolicy,
    /// Use closed-form estimators where they exist (laplace, exponential,
    /// pareto); otherwise everything goes through Nelder-Mead.
    pub closed_form: bool,
    pub optimizer: NelderMeadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            loc: LocPolicy::Profile { grid_points: 20 },
            closed_form: true,
            optimizer: NelderMeadOptions::default(),
        }
    }
}

impl FitOptions {
    pub fn fixed_loc(loc: f64) -> Self {
        FitOptions {
            loc: LocPolicy::Fixed(loc),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: PriorSpec,
    pub log_likelihood: f64,
    pub n: usize,
}

fn lower_bounded(family: Family) -> bool {
    matches!(
        family,
        Family::Gamma
            | Family::Exponential
            | Family::Chi2
            | Family::WeibullMin
            | Family::Kappa3
            | Family::Beta
            | Family::Pareto
    )
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn fit_prior(samples: &[f64], family: Family, opts: &FitOptions) -> Result<FitResult, PriorError> {
    if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(PriorError::NonFiniteSample(*bad));
    }
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(PriorError::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(PriorError::DegenerateSamples);
    }

    let spec = if family == Family::BoxUniform {
        PriorSpec::box_uniform(sorted[0], sorted[sorted.len() - 1].next_up())?
    } else if lower_bounded(family) {
        let locs: Vec<f64> = match opts.loc {
            LocPolicy::Fixed(loc) => vec![loc],
            LocPolicy::Profile { grid_points } => {
                let g = grid_points.max(1);
                (0..g).map(|k| sorted[0] - 1.0 + k as f64 / g as f64).collect()
            }
        };
        let mut best: Option<(PriorSpec, f64)> = None;
        for loc in locs {
            let spec = fit_bounded(&sorted, family, loc, opts)?;
            let ll = spec.log_likelihood(samples);
            if best.as_ref().is_none_or(|(_, b)| ll > *b) {
                best = Some((spec, ll));
            }
        }
        best.expect("at least one grid point").0
    } else {
        let fixed = match opts.loc {
            LocPolicy::Fixed(loc) => Some(loc),
            LocPolicy::Profile { .. } => None,
        };
        fit_real_line(&sorted, family, fixed, opts)?
    };
    let log_likelihood = spec.log_likelihood(samples);
    Ok(FitResult {
        spec,
        log_likelihood,
        n: samples.len(),
    })
}

fn invalid(family: Family, reason: impl Into<String>) -> PriorError {
    PriorError::InvalidParameters {
        family,
        reason: reason.into(),
    }
}

/// MLE of shape and scale for a fixed location.
fn fit_bounded(sorted: &[f64], family: Family, loc: f64, opts: &FitOptions) -> Result<PriorSpec, PriorError> {
    let y: Vec<f64> = sorted.iter().map(|x| x - loc).collect();
    let n = y.len() as f64;
    if y[0] < 0.0 || (y[0] == 0.0 && family != Family::Beta) {
        return Err(invalid(family, format!("location {loc} is not below every sample")));
    }
    let mean = y.iter().sum::<f64>() / n;
    match family {
        Family::Gamma => {
            let (a, scale) = gamma_mle(&y)?;
            PriorSpec::gamma(a, loc, scale)
        }
        Family::Chi2 => {
            let (a, scale) = gamma_mle(&y)?;
            PriorSpec::chi2(2.0 * a, loc, scale / 2.0)
        }
        Family::Exponential if opts.closed_form => PriorSpec::exponential(loc, mean),
        Family::Pareto if opts.closed_form => {
            let scale = y[0];
            let b = n / y.iter().map(|v| (v / scale).ln()).sum::<f64>();
            PriorSpec::pareto(b, loc, scale)
        }
        _ => {
            let start = start_point(family, &y);
            let build = |p: &[f64]| -> Result<PriorSpec, PriorError> {
                match family {
                    Family::Exponential => PriorSpec::exponential(loc, p[0].exp()),
                    Family::WeibullMin => PriorSpec::weibull_min(p[0].exp(), loc, p[1].exp()),
                    Family::Kappa3 => PriorSpec::kappa3(p[0].exp(), loc, p[1].exp()),
                    Family::Pareto => PriorSpec::pareto(p[0].exp(), loc, p[1].exp()),
                    Family::Beta => PriorSpec::beta(p[0].exp(), p[1].exp(), loc, p[2].exp()),
                    _ => unreachable!("handled above"),
                }
            };
            optimize(sorted, start, build, opts)
        }
    }
}

fn start_point(family: Family, y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let max = y[y.len() - 1];
    match family {
        Family::Exponential => vec![mean.ln()],
        Family::WeibullMin | Family::Kappa3 => vec![0.0, mean.ln()],
        Family::Pareto => vec![0.0, y[0].ln()],
        Family::Beta => {
            let scale = max * 1.05;
            let m = mean / scale;
            let v = y.iter().map(|x| (x / scale - m).powi(2)).sum::<f64>() / n;
            let common = (m * (1.0 - m) / v - 1.0).max(0.1);
            vec![(m * common).ln(), ((1.0 - m) * common).ln(), scale.ln()]
        }
        _ => unreachable!("no generic start for {family}"),
    }
}

fn optimize(
    samples: &[f64],
    start: Vec<f64>,
    build: impl Fn(&[f64]) -> Result<PriorSpec, PriorError>,
    opts: &FitOptions,
) -> Result<PriorSpec, PriorError> {
    let objective = |p: &[f64]| match build(p) {
        Ok(spec) => -spec.log_likelihood(samples),
        Err(_) => f64::INFINITY,
    };
    let result = minimize(objective, &start, &opts.optimizer);
    if !result.converged || !result.f.is_finite() {
        return Err(PriorError::NonConvergence(result.iterations));
    }
    build(&result.x)
}

/// Gamma shape and scale for positive data: solves `ln a - digamma(a) = s`
/// with `s = ln(mean) - mean(ln y)` by bisection on `ln a`.
fn gamma_mle(y: &[f64]) -> Result<(f64, f64), PriorError> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mean_log = y.iter().map(|v| v.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_log;
    if !(s > 0.0 && s.is_finite()) {
        return Err(PriorError::DegenerateSamples);
    }
    let residual = |ln_a: f64| {
        let a = ln_a.exp();
        a.ln() - digamma(a) - s
    };
    // residual decreases in a, from +inf at a -> 0 to 0 as a -> inf
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let a = (0.5 * (lo + hi)).exp();
    Ok((a, mean / a))
}

fn fit_real_line(sorted: &[f64], family: Family, fixed_loc: Option<f64>, opts: &FitOptions) -> Result<PriorSpec, PriorError> {
    let med = median(sorted);
    if family == Family::Laplace && opts.closed_form {
        let loc = fixed_loc.unwrap_or(med);
        let scale = sorted.iter().map(|x| (x - loc).abs()).sum::<f64>() / sorted.len() as f64;
        return PriorSpec::laplace(loc, scale);
    }
    let n = sorted.len();
    let iqr = sorted[(3 * n) / 4] - sorted[n / 4];
    let spread = if iqr > 0.0 {
        iqr / 2.0
    } else {
        let mean = sorted.iter().sum::<f64>() / n as f64;
        (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let loc_of = |p: &[f64]| fixed_loc.unwrap_or(p[0]);
    let off = usize::from(fixed_loc.is_none());
    let mut start = Vec::new();
    if fixed_loc.is_none() {
        start.push(med);
    }
    start.push(spread.ln());
    match family {
        Family::Laplace => optimize(sorted, start, |p| PriorSpec::laplace(loc_of(p), p[off].exp()), opts),
        Family::Cauchy => optimize(sorted, start, |p| PriorSpec::cauchy(loc_of(p), p[off].exp()), opts),
        Family::StudentT => {
            start.push(0.0);
            optimize(
                sorted,
                start,
                |p| PriorSpec::student_t(p[off + 1].exp(), loc_of(p), p[off].exp()),
                opts,
            )
        }
        Family::LaplaceAsymmetric => {
            start.push(0.0);
            optimize(
                sorted,
                start,
                |p| PriorSpec::laplace_asymmetric(p[off + 1].exp(), loc_of(p), p[off].exp()),
                opts,
            )
        }
        _ => unreachable!("{family} is bounded below"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::sample_prior;

    #[test]
    fn constant_samples_are_degenerate() {
        let s = vec![4.2; 100];
        for f in [Family::Gamma, Family::Laplace, Family::Cauchy, Family::BoxUniform] {
            assert!(matches!(fit_prior(&s, f, &FitOptions::default()), Err(PriorError::DegenerateSamples)));
        }
    }

    #[test]
    fn too_few_or_non_finite_samples() {
        assert!(matches!(
            fit_prior(&[1.0, 2.0], Family::Gamma, &FitOptions::default()),
            Err(PriorError::InsufficientSamples { got: 2, .. })
        ));
        let mut s: Vec<f64> = (0..40).map(|i| i as f64).collect();
        s[3] = f64::INFINITY;
        assert!(matches!(
            fit_prior(&s, Family::Gamma, &FitOptions::default()),
            Err(PriorError::NonFiniteSample(_))
        ));
    }

    #[test]
    fn fixed_loc_above_minimum_is_rejected() {
        let s: Vec<f64> = (0..40).map(|i| i as f64).collect();
        assert!(fit_prior(&s, Family::Gamma, &FitOptions::fixed_loc(0.0)).is_err());
        assert!(fit_prior(&s, Family::Gamma, &FitOptions::fixed_loc(-0.5)).is_ok());
    }

    #[test]
    fn gamma_mle_satisfies_score_equations() {
        let spec = PriorSpec::gamma(2.0, 0.0, 3.0).unwrap();
        let s = sample_prior(&spec, 2000, 11).unwrap();
        let fit = fit_prior(&s, Family::Gamma, &FitOptions::fixed_loc(0.0)).unwrap();
        let (a, scale) = (fit.spec.shape_param("a"), fit.spec.scale());
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        assert!((a * scale - mean).abs() < 1e-9 * mean);
        // perturbing either parameter lowers the likelihood
        for (da, ds) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            let other = PriorSpec::gamma(a * (1.0 + da), 0.0, scale * (1.0 + ds)).unwrap();
            assert!(other.log_likelihood(&s) < fit.log_likelihood);
        }
    }

    #[test]
    fn chi2_is_reparameterized_gamma() {
        let s = sample_prior(&PriorSpec::gamma(1.5, 0.0, 2.0).unwrap(), 500, 3).unwrap();
        let g = fit_prior(&s, Family::Gamma, &FitOptions::fixed_loc(-0.2)).unwrap();
        let c = fit_prior(&s, Family::Chi2, &FitOptions::fixed_loc(-0.2)).unwrap();
        assert!((c.spec.shape_param("df") - 2.0 * g.spec.shape_param("a")).abs() < 1e-12);
        assert!((c.log_likelihood - g.log_likelihood).abs() < 1e-8 * g.log_likelihood.abs());
    }

    #[test]
    fn box_uniform_fit_covers_samples() {
        let s: Vec<f64> = (0..50).map(|i| i as f64 * 0.5 - 3.0).collect();
        let fit = fit_prior(&s, Family::BoxUniform, &FitOptions::default()).unwrap();
        assert!(s.iter().all(|&x| fit.spec.pdf(x) > 0.0));
        assert_eq!(fit.spec.shape_param("lo"), -3.0);
    }

    #[test]
    fn profiled_loc_beats_or_matches_every_grid_point() {
        let s = sample_prior(&PriorSpec::gamma(0.8, -0.1, 5.0).unwrap(), 400, 5).unwrap();
        let fit = fit_prior(&s, Family::Gamma, &FitOptions::default()).unwrap();
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        for k in 0..20 {
            let loc = min - 1.0 + k as f64 / 20.0;
            let other = fit_prior(&s, Family::Gamma, &FitOptions::fixed_loc(loc)).unwrap();
            assert!(fit.log_likelihood >= other.log_likelihood);
        }
    }

    #[test]
    fn every_family_fits_a_positive_sample() {
        let s = sample_prior(&PriorSpec::gamma(1.2, 0.0, 4.0).unwrap(), 300, 21).unwrap();
        for family in Family::ALL {
            let fit = fit_prior(&s, family, &FitOptions::default())
                .unwrap_or_else(|e| panic!("{family}: {e}"));
            assert!(fit.log_likelihood.is_finite(), "{family}");
            assert_eq!(fit.spec.family(), family);
        }
    }
}
