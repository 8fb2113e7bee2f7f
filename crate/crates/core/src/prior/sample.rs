use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::{Family, PriorError, PriorSpec};

/// Draws `n` values from `spec`. Deterministic for a given seed on every
/// platform. Supported families: gamma, exponential, laplace, box_uniform,
/// weibull_min, cauchy.
pub fn sample_prior(spec: &PriorSpec, n: usize, seed: u64) -> Result<Vec<f64>, PriorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(spec, n, &mut rng)
}

pub(crate) fn sample_with<R: Rng>(spec: &PriorSpec, n: usize, rng: &mut R) -> Result<Vec<f64>, PriorError> {
    let (loc, scale) = (spec.loc(), spec.scale());
    // open interval (0, 1) so inverse CDFs stay finite
    let unit = |rng: &mut R| loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    };
    let draw: Box<dyn FnMut(&mut R) -> f64> = match spec.family() {
        Family::Gamma => {
            let g = Gamma::new(spec.shape_param("a"), 1.0).map_err(|e| PriorError::InvalidParameters {
                family: Family::Gamma,
                reason: e.to_string(),
            })?;
            Box::new(move |rng| g.sample(rng))
        }
        Family::Exponential => Box::new(move |rng| -unit(rng).ln()),
        Family::Laplace => Box::new(move |rng| {
            let u = unit(rng) - 0.5;
            -u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }),
        Family::WeibullMin => {
            let c = spec.shape_param("c");
            Box::new(move |rng| (-unit(rng).ln()).powf(1.0 / c))
        }
        Family::Cauchy => Box::new(move |rng| (std::f64::consts::PI * (unit(rng) - 0.5)).tan()),
        Family::BoxUniform => {
            let (lo, hi) = (spec.shape_param("lo"), spec.shape_param("hi"));
            return Ok((0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect());
        }
        other => return Err(PriorError::UnsupportedFamily(other)),
    };
    let mut draw = draw;
    Ok((0..n).map(|_| loc + scale * draw(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn box_uniform_mean() {
        let s = sample_prior(&PriorSpec::box_uniform(0.0, 1.0).unwrap(), 10_000, 1).unwrap();
        assert!((0.48..=0.52).contains(&mean(&s)));
        assert!(s.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn unit_gamma_mean() {
        let s = sample_prior(&PriorSpec::gamma(1.0, 0.0, 1.0).unwrap(), 10_000, 2).unwrap();
        assert!((0.97..=1.03).contains(&mean(&s)), "{}", mean(&s));
    }

    #[test]
    fn gamma_mean_within_three_standard_errors() {
        let (a, loc, scale) = (2.5, -0.1, 3.0);
        let s = sample_prior(&PriorSpec::gamma(a, loc, scale).unwrap(), 10_000, 3).unwrap();
        let se = (a * scale * scale / 10_000.0).sqrt();
        assert!((mean(&s) - (a * scale + loc)).abs() < 3.0 * se);
    }

    #[test]
    fn same_seed_same_output() {
        for spec in [
            PriorSpec::gamma(0.5, -0.1, 9.4).unwrap(),
            PriorSpec::laplace(1.1, 2.3).unwrap(),
            PriorSpec::cauchy(0.9, 0.633).unwrap(),
            PriorSpec::weibull_min(0.74, -0.1, 2.2).unwrap(),
            PriorSpec::exponential(0.0, 2.0).unwrap(),
        ] {
            assert_eq!(sample_prior(&spec, 100, 9).unwrap(), sample_prior(&spec, 100, 9).unwrap());
            assert_ne!(sample_prior(&spec, 100, 9).unwrap(), sample_prior(&spec, 100, 10).unwrap());
            assert!(sample_prior(&spec, 100, 9).unwrap().iter().all(|x| spec.pdf(*x) > 0.0));
        }
    }

    #[test]
    fn unsupported_family() {
        let spec = PriorSpec::kappa3(1.5, 0.0, 1.0).unwrap();
        assert!(matches!(
            sample_prior(&spec, 10, 0),
            Err(PriorError::UnsupportedFamily(Family::Kappa3))
        ));
    }
}
