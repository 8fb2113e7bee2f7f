//! Location-scale temporal priors.
//!
//! Every family is evaluated as `f(x) = g((x - loc) / scale) / scale` where
//! `g` is the family's standard-form density. Arguments are time gaps in
//! minutes.

mod fit;
mod nelder_mead;
mod sample;

pub use fit::{fit_prior, FitOptions, FitResult, LocPolicy};
pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadResult};
pub use sample::sample_prior;

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParameters { family: Family, reason: String },
    #[error("samples are degenerate (zero variance)")]
    DegenerateSamples,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("non-finite sample value {0}")]
    NonFiniteSample(f64),
    #[error("optimizer did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("no sampler for family {0}")]
    UnsupportedFamily(Family),
}

impl PriorError {
    pub fn code(&self) -> &'static str {
        match self {
            PriorError::InvalidParameters { .. } => "InvalidParameters",
            PriorError::DegenerateSamples => "DegenerateSamples",
            PriorError::InsufficientSamples { .. } => "InsufficientSamples",
            PriorError::NonFiniteSample(_) => "NonFiniteSample",
            PriorError::NonConvergence(_) => "NonConvergence",
            PriorError::UnsupportedFamily(_) => "UnsupportedFamily",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gamma,
    Exponential,
    Beta,
    Pareto,
    Chi2,
    Laplace,
    LaplaceAsymmetric,
    StudentT,
    WeibullMin,
    Cauchy,
    Kappa3,
    BoxUniform,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Gamma,
        Family::Exponential,
        Family::Beta,
        Family::Pareto,
        Family::Chi2,
        Family::Laplace,
        Family::LaplaceAsymmetric,
        Family::StudentT,
        Family::WeibullMin,
        Family::Cauchy,
        Family::Kappa3,
        Family::BoxUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gamma => "gamma",
            Family::Exponential => "exponential",
            Family::Beta => "beta",
            Family::Pareto => "pareto",
            Family::Chi2 => "chi2",
            Family::Laplace => "laplace",
            Family::LaplaceAsymmetric => "laplace_asymmetric",
            Family::StudentT => "student_t",
            Family::WeibullMin => "weibull_min",
            Family::Cauchy => "cauchy",
            Family::Kappa3 => "kappa3",
            Family::BoxUniform => "box_uniform",
        }
    }

    /// Names of the shape parameters, in canonical order.
    pub fn shape_names(self) -> &'static [&'static str] {
        match self {
            Family::Gamma | Family::Kappa3 => &["a"],
            Family::Beta => &["a", "b"],
            Family::Pareto => &["b"],
            Family::Chi2 | Family::StudentT => &["df"],
            Family::LaplaceAsymmetric => &["kappa"],
            Family::WeibullMin => &["c"],
            Family::BoxUniform => &["lo", "hi"],
            Family::Exponential | Family::Laplace | Family::Cauchy => &[],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match norm.as_str() {
            "t" => "student_t",
            "weibull" => "weibull_min",
            "laplace_asymm" => "laplace_asymmetric",
            "box" | "uniform" => "box_uniform",
            other => other,
        };
        Family::ALL
            .into_iter()
            .find(|f| f.name() == alias)
            .ok_or_else(|| format!("unknown prior family {s:?}"))
    }
}

/// A validated distribution: family, shape parameters, location and scale.
///
/// JSON form: `{"family": "gamma", "shape": {"a": 0.5}, "loc": -0.1, "scale": 9.4}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPriorSpec", into = "RawPriorSpec")]
pub struct PriorSpec {
    family: Family,
    shape: BTreeMap<String, f64>,
    loc: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPriorSpec {
    family: Family,
    #[serde(default)]
    shape: BTreeMap<String, f64>,
    #[serde(default)]
    loc: f64,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawPriorSpec> for PriorSpec {
    type Error = PriorError;
    fn try_from(raw: RawPriorSpec) -> Result<Self, PriorError> {
        PriorSpec::new(raw.family, raw.shape, raw.loc, raw.scale)
    }
}

impl From<PriorSpec> for RawPriorSpec {
    fn from(s: PriorSpec) -> Self {
        RawPriorSpec {
            family: s.family,
            shape: s.shape,
            loc: s.loc,
            scale: s.scale,
        }
    }
}

impl PriorSpec {
    pub fn new(family: Family, shape: BTreeMap<String, f64>, loc: f64, scale: f64) -> Result<Self, PriorError> {
        let invalid = |reason: String| PriorError::InvalidParameters { family, reason };
        if !loc.is_finite() {
            return Err(invalid(format!("loc must be finite, got {loc}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("scale must be positive and finite, got {scale}")));
        }
        let names = family.shape_names();
        for key in shape.keys() {
            if !names.contains(&key.as_str()) {
                return Err(invalid(format!("unexpected shape parameter {key:?}")));
            }
        }
        for name in names {
            match shape.get(*name) {
                None => return Err(invalid(format!("missing shape parameter {name:?}"))),
                Some(v) if !v.is_finite() => return Err(invalid(format!("{name} must be finite"))),
                Some(v) if family != Family::BoxUniform && *v <= 0.0 => {
                    return Err(invalid(format!("{name} must be positive, got {v}")))
                }
                _ => {}
            }
        }
        if family == Family::BoxUniform {
            if shape["lo"] >= shape["hi"] {
                return Err(invalid("lo must be below hi".into()));
            }
            if loc != 0.0 || scale != 1.0 {
                return Err(invalid("box_uniform has fixed loc 0 and scale 1".into()));
            }
        }
        Ok(PriorSpec {
            family,
            shape,
            loc,
            scale,
        })
    }

    fn with_shape(family: Family, params: &[(&str, f64)], loc: f64, scale: f64) -> Result<Self, PriorError> {
        let shape = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        PriorSpec::new(family, shape, loc, scale)
    }

    pub fn gamma(a: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Gamma, &[("a", a)], loc, scale)
    }

    pub fn exponential(loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Exponential, &[], loc, scale)
    }

    pub fn beta(a: f64, b: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Beta, &[("a", a), ("b", b)], loc, scale)
    }

    pub fn pareto(b: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Pareto, &[("b", b)], loc, scale)
    }

    pub fn chi2(df: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Chi2, &[("df", df)], loc, scale)
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Laplace, &[], loc, scale)
    }

    pub fn laplace_asymmetric(kappa: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::LaplaceAsymmetric, &[("kappa", kappa)], loc, scale)
    }

    pub fn student_t(df: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::StudentT, &[("df", df)], loc, scale)
    }

    pub fn weibull_min(c: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::WeibullMin, &[("c", c)], loc, scale)
    }

    pub fn cauchy(loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Cauchy, &[], loc, scale)
    }

    pub fn kappa3(a: f64, loc: f64, scale: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::Kappa3, &[("a", a)], loc, scale)
    }

    /// Uniform on `[lo, hi)` minutes.
    pub fn box_uniform(lo: f64, hi: f64) -> Result<Self, PriorError> {
        Self::with_shape(Family::BoxUniform, &[("lo", lo), ("hi", hi)], 0.0, 1.0)
    }

    /// The fitted parameters reported for the airport dataset, one per family
    /// (exponential excepted).
    pub fn airport_fitted() -> Vec<PriorSpec> {
        vec![
            PriorSpec::gamma(0.5, -0.1, 9.4),
            PriorSpec::beta(0.68, 98.68, -0.1, 416.75),
            PriorSpec::pareto(1.2, -1.4, 1.3),
            PriorSpec::chi2(1.19, -0.1, 2.46),
            PriorSpec::laplace(1.1, 2.3),
            PriorSpec::laplace_asymmetric(0.1, 0.0, 0.3),
            PriorSpec::student_t(1.0, 0.9, 0.63),
            PriorSpec::kappa3(1.5, -0.1, 1.6),
            PriorSpec::weibull_min(0.74, -0.1, 2.2),
            PriorSpec::cauchy(0.9, 0.633),
        ]
        .into_iter()
        .map(|s| s.expect("published parameters are valid"))
        .collect()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn shape(&self) -> &BTreeMap<String, f64> {
        &self.shape
    }

    pub fn shape_param(&self, name: &str) -> f64 {
        self.shape[name]
    }

    pub fn loc(&self) -> f64 {
        self.loc
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same family and shape with location 0 and scale 1.
    pub fn standardized(&self) -> PriorSpec {
        if self.family == Family::BoxUniform {
            return self.clone();
        }
        PriorSpec {
            loc: 0.0,
            scale: 1.0,
            ..self.clone()
        }
    }

    fn standard(&self, x: f64) -> f64 {
        (x - self.loc) / self.scale
    }

    /// Support `[lo, hi]` in x (endpoints may be infinite; box_uniform's upper
    /// end is open).
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = match self.family {
            Family::Gamma | Family::Exponential | Family::Chi2 | Family::WeibullMin | Family::Kappa3 => {
                (0.0, f64::INFINITY)
            }
            Family::Beta => (0.0, 1.0),
            Family::Pareto => (1.0, f64::INFINITY),
            Family::Laplace | Family::LaplaceAsymmetric | Family::StudentT | Family::Cauchy => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Family::BoxUniform => return (self.shape["lo"], self.shape["hi"]),
        };
        (self.loc + self.scale * lo, self.loc + self.scale * hi)
    }

    /// Density at `x`. Zero outside the support, `+inf` at integrable
    /// boundary singularities (e.g. gamma with `a < 1` at `x = loc`).
    pub fn pdf(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return 0.0;
        }
        if self.family == Family::BoxUniform {
            let (lo, hi) = (self.shape["lo"], self.shape["hi"]);
            return if lo <= x && x < hi { 1.0 / (hi - lo) } else { 0.0 };
        }
        let v = standard_pdf(self.family, &self.shape, self.standard(x)) / self.scale;
        if v.is_nan() {
            // inf * 0 in the direct formula far out in a tail
            self.log_pdf(x).exp()
        } else {
            v
        }
    }

    /// Natural log of the density; `-inf` outside the support.
    pub fn log_pdf(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        if self.family == Family::BoxUniform {
            let (lo, hi) = (self.shape["lo"], self.shape["hi"]);
            return if lo <= x && x < hi { -(hi - lo).ln() } else { f64::NEG_INFINITY };
        }
        standard_log_pdf(self.family, &self.shape, self.standard(x)) - self.scale.ln()
    }

    /// Sum of `log_pdf` over `samples`.
    pub fn log_likelihood(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.log_pdf(x)).sum()
    }
}

/// `coef * ln(z)` with the convention `0 * ln(0) = 0`.
fn xlogy(coef: f64, z: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * z.ln()
    }
}

/// `z^p` with `0^0 = 1`, matching [`xlogy`].
fn powf0(z: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        z.powf(p)
    }
}

fn standard_pdf(family: Family, shape: &BTreeMap<String, f64>, z: f64) -> f64 {
    match family {
        Family::Gamma => gamma_pdf(shape["a"], z),
        Family::Exponential => {
            if z < 0.0 {
                0.0
            } else {
                (-z).exp()
            }
        }
        Family::Chi2 => gamma_pdf(shape["df"] / 2.0, z / 2.0) / 2.0,
        Family::Beta => {
            let (a, b) = (shape["a"], shape["b"]);
            if !(0.0..=1.0).contains(&z) {
                0.0
            } else {
                powf0(z, a - 1.0) * powf0(1.0 - z, b - 1.0) / ln_beta(a, b).exp()
            }
        }
        Family::Pareto => {
            let b = shape["b"];
            if z < 1.0 {
                0.0
            } else {
                b * z.powf(-b - 1.0)
            }
        }
        Family::Laplace => 0.5 * (-z.abs()).exp(),
        Family::LaplaceAsymmetric => {
            let k = shape["kappa"];
            let norm = k / (1.0 + k * k);
            if z >= 0.0 {
                norm * (-z * k).exp()
            } else {
                norm * (z / k).exp()
            }
        }
        Family::StudentT => {
            let nu = shape["df"];
            let norm = gamma((nu + 1.0) / 2.0) / ((nu * PI).sqrt() * gamma(nu / 2.0));
            norm * (1.0 + z * z / nu).powf(-(nu + 1.0) / 2.0)
        }
        Family::WeibullMin => {
            let c = shape["c"];
            if z < 0.0 {
                0.0
            } else {
                c * powf0(z, c - 1.0) * (-z.powf(c)).exp()
            }
        }
        Family::Cauchy => 1.0 / (PI * (1.0 + z * z)),
        Family::Kappa3 => {
            let a = shape["a"];
            if z < 0.0 {
                0.0
            } else {
                a * (a + z.powf(a)).powf(-(a + 1.0) / a)
            }
        }
        Family::BoxUniform => unreachable!("box_uniform is evaluated without standardization"),
    }
}

fn gamma_pdf(a: f64, z: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    if a > 170.0 {
        return gamma_log_pdf(a, z).exp();
    }
    powf0(z, a - 1.0) * (-z).exp() / gamma(a)
}

fn gamma_log_pdf(a: f64, z: f64) -> f64 {
    if z < 0.0 {
        return f64::NEG_INFINITY;
    }
    xlogy(a - 1.0, z) - z - ln_gamma(a)
}

fn standard_log_pdf(family: Family, shape: &BTreeMap<String, f64>, z: f64) -> f64 {
    match family {
        Family::Gamma => gamma_log_pdf(shape["a"], z),
        Family::Exponential => {
            if z < 0.0 {
                f64::NEG_INFINITY
            } else {
                -z
            }
        }
        Family::Chi2 => gamma_log_pdf(shape["df"] / 2.0, z / 2.0) - LN_2,
        Family::Beta => {
            let (a, b) = (shape["a"], shape["b"]);
            if !(0.0..=1.0).contains(&z) {
                f64::NEG_INFINITY
            } else {
                xlogy(a - 1.0, z) + xlogy(b - 1.0, 1.0 - z) - ln_beta(a, b)
            }
        }
        Family::Pareto => {
            let b = shape["b"];
            if z < 1.0 {
                f64::NEG_INFINITY
            } else {
                b.ln() - (b + 1.0) * z.ln()
            }
        }
        Family::Laplace => -LN_2 - z.abs(),
        Family::LaplaceAsymmetric => {
            let k = shape["kappa"];
            let ln_norm = k.ln() - (1.0 + k * k).ln();
            if z >= 0.0 {
                ln_norm - z * k
            } else {
                ln_norm + z / k
            }
        }
        Family::StudentT => {
            let nu = shape["df"];
            ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI).ln()
                - (nu + 1.0) / 2.0 * (z * z / nu).ln_1p()
        }
        Family::WeibullMin => {
            let c = shape["c"];
            if z < 0.0 {
                f64::NEG_INFINITY
            } else {
                c.ln() + xlogy(c - 1.0, z) - z.powf(c)
            }
        }
        Family::Cauchy => -PI.ln() - (z * z).ln_1p(),
        Family::Kappa3 => {
            let a = shape["a"];
            if z < 0.0 {
                f64::NEG_INFINITY
            } else {
                a.ln() - (a + 1.0) / a * (a + z.powf(a)).ln()
            }
        }
        Family::BoxUniform => unreachable!("box_uniform is evaluated without standardization"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn gamma_shape_one_is_exponential() {
        let beta = 9.4;
        let g = PriorSpec::gamma(1.0, 0.0, beta).unwrap();
        let e = PriorSpec::exponential(0.0, beta).unwrap();
        assert!(close(g.pdf(0.0), 1.0 / beta, 1e-12));
        for x in [0.0, 0.3, 1.0, 7.5, 40.0, 300.0] {
            assert!(close(g.pdf(x), (-x / beta).exp() / beta, 1e-12), "x={x}");
            assert!(close(g.pdf(x), e.pdf(x), 1e-12));
            assert!(close(g.log_pdf(x), e.log_pdf(x), 1e-12) || g.log_pdf(x) == e.log_pdf(x));
        }
        assert_eq!(g.pdf(-0.01), 0.0);
    }

    #[test]
    fn laplace_peak() {
        let l = PriorSpec::laplace(1.1, 2.3).unwrap();
        assert!(close(l.pdf(1.1), 1.0 / (2.0 * 2.3), 1e-15));
        assert!(close(l.pdf(1.1), 0.217_391_304_347_826_1, 1e-15));
    }

    #[test]
    fn box_uniform_log_density() {
        let b = PriorSpec::box_uniform(0.0, 30.0).unwrap();
        assert!(close(b.log_pdf(10.0), -(30.0f64).ln(), 1e-15));
        assert_eq!(b.log_pdf(30.0), f64::NEG_INFINITY);
        assert_eq!(b.pdf(30.0), 0.0);
        assert!(close(b.pdf(0.0), 1.0 / 30.0, 1e-15));
        assert_eq!(b.log_pdf(-0.001), f64::NEG_INFINITY);
    }

    #[test]
    fn gamma_published_parameters_log_consistency() {
        let g = PriorSpec::gamma(0.5, -0.1, 9.4).unwrap();
        let z: f64 = 5.1 / 9.4;
        let expected = z.powf(-0.5) * (-z).exp() / PI.sqrt() / 9.4;
        assert!(close(g.pdf(5.0), expected, 1e-13));
        assert!(close(g.log_pdf(5.0), expected.ln(), 1e-12));
        assert_eq!(g.pdf(-0.1), f64::INFINITY);
        assert_eq!(g.pdf(-0.2), 0.0);
        assert_eq!(g.log_pdf(-0.2), f64::NEG_INFINITY);
    }

    #[test]
    fn outside_support_is_zero() {
        for spec in PriorSpec::airport_fitted() {
            let (lo, hi) = spec.support();
            if lo.is_finite() {
                assert_eq!(spec.pdf(lo - 1e-6), 0.0, "{}", spec.family());
                assert_eq!(spec.log_pdf(lo - 1e-6), f64::NEG_INFINITY);
            }
            if hi.is_finite() {
                assert_eq!(spec.pdf(hi + 1e-6), 0.0, "{}", spec.family());
            }
            assert_eq!(spec.pdf(f64::NAN), 0.0);
        }
    }

    #[test]
    fn pdf_never_nan_far_in_tails() {
        let mut specs = PriorSpec::airport_fitted();
        specs.push(PriorSpec::gamma(200.0, 0.0, 1.0).unwrap());
        specs.push(PriorSpec::box_uniform(-5.0, 5.0).unwrap());
        for spec in specs {
            for x in [-1e300, -1e6, -1.0, 0.0, 1e-300, 1.0, 1e6, 1e300, f64::INFINITY, f64::NEG_INFINITY] {
                let p = spec.pdf(x);
                assert!(!p.is_nan() && p >= 0.0, "{} at {x}: {p}", spec.family());
                assert!(!spec.log_pdf(x).is_nan(), "{} log at {x}", spec.family());
            }
        }
    }

    #[test]
    fn validation() {
        assert!(PriorSpec::gamma(0.0, 0.0, 1.0).is_err());
        assert!(PriorSpec::gamma(1.0, 0.0, 0.0).is_err());
        assert!(PriorSpec::gamma(1.0, f64::NAN, 1.0).is_err());
        assert!(PriorSpec::box_uniform(3.0, 3.0).is_err());
        assert!(PriorSpec::new(Family::BoxUniform, [("lo".into(), 0.0), ("hi".into(), 1.0)].into(), 1.0, 1.0).is_err());
        assert!(PriorSpec::new(Family::Gamma, BTreeMap::new(), 0.0, 1.0).is_err());
        assert!(PriorSpec::new(Family::Laplace, [("a".into(), 1.0)].into(), 0.0, 1.0).is_err());
        assert!(PriorSpec::beta(1.0, -1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn json_form() {
        let spec = PriorSpec::gamma(0.5, -0.1, 9.4).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"family":"gamma","shape":{"a":0.5},"loc":-0.1,"scale":9.4}"#);
        assert_eq!(serde_json::from_str::<PriorSpec>(&text).unwrap(), spec);
        let bad = r#"{"family":"gamma","shape":{"a":-1},"loc":0,"scale":1}"#;
        assert!(serde_json::from_str::<PriorSpec>(bad).is_err());
        let lap: PriorSpec = serde_json::from_str(r#"{"family":"laplace","loc":1.1,"scale":2.3}"#).unwrap();
        assert_eq!(lap, PriorSpec::laplace(1.1, 2.3).unwrap());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("t".parse::<Family>().unwrap(), Family::StudentT);
        assert_eq!("weibull-min".parse::<Family>().unwrap(), Family::WeibullMin);
        assert_eq!("laplace-asymm".parse::<Family>().unwrap(), Family::LaplaceAsymmetric);
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("lognormal".parse::<Family>().is_err());
    }

    #[test]
    fn location_scale_coherence() {
        for spec in PriorSpec::airport_fitted() {
            let std = spec.standardized();
            for i in 0..50 {
                let x = spec.loc() + spec.scale() * (i as f64 * 0.37 - 3.0);
                let z = (x - spec.loc()) / spec.scale();
                let a = spec.pdf(x);
                let b = std.pdf(z) / spec.scale();
                assert!(a == b || close(a, b, 1e-12), "{} x={x}: {a} vs {b}", spec.family());
            }
        }
    }
}
