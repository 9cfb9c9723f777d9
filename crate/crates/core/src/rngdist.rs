//! Seeded random streams, the handful of laws the samplers draw from, and the
//! nine generating error distributions used by the simulation study.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, a counter-based generator: every `stream_id` selects a
/// distinct 2^64-block keystream under the same key, so replications can be
/// handed independent sub-streams of one master seed. Not `Clone`; a stream
/// has exactly one owner.
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    /// A stream keyed by `(seed, purpose)` rather than `seed` alone, so that
    /// different consumers within one replication never share keystream.
    pub fn derived(seed: u64, purpose: u64, stream_id: u64) -> Self {
        let key = splitmix64(seed ^ splitmix64(purpose.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Self::new(key, stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("stream_id", &self.stream_id)
            .finish_non_exhaustive()
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Inverse gamma law with density `λ^α / Γ(α) · x^{-α-1} exp(-λ/x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseGammaParams<F> {
    pub shape: F,
    pub rate: F,
}

impl<F: Real> InverseGammaParams<F> {
    pub fn new(shape: F, rate: F) -> Result<Self> {
        let p = Self { shape, rate };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape > F::zero() && self.shape.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "inverse gamma shape must be positive, got {}",
                self.shape
            )));
        }
        if !(self.rate > F::zero() && self.rate.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "inverse gamma rate must be positive, got {}",
                self.rate
            )));
        }
        Ok(())
    }

    /// Mean `λ/(α-1)`, infinite when `α ≤ 1`.
    pub fn mean(&self) -> F {
        if self.shape > F::one() {
            self.rate / (self.shape - F::one())
        } else {
            F::infinity()
        }
    }

    pub fn ln_pdf(&self, x: F) -> F {
        if x <= F::zero() {
            return F::neg_infinity();
        }
        let lg = lit::<F>(statrs::function::gamma::ln_gamma(crate::scalar::to_f64(self.shape)));
        self.shape * self.rate.ln() - lg - (self.shape + F::one()) * x.ln() - self.rate / x
    }

    /// Draws `1 / Gamma(shape, rate)`.
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> F {
        self.rate / F::draw_gamma(rng, self.shape)
    }
}

/// The laws drawn by the samplers and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Dist<F> {
    /// Mean and variance.
    Normal { mean: F, var: F },
    InverseGamma(InverseGammaParams<F>),
    StudentT { df: F },
    Uniform { lo: F, hi: F },
    Beta { a: F, b: F },
    /// Unnormalized log-weights.
    Categorical(Vec<F>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variate<F> {
    Real(F),
    Index(usize),
}

impl<F: Copy> Variate<F> {
    pub fn real(self) -> Option<F> {
        match self {
            Variate::Real(x) => Some(x),
            Variate::Index(_) => None,
        }
    }
    pub fn index(self) -> Option<usize> {
        match self {
            Variate::Index(i) => Some(i),
            Variate::Real(_) => None,
        }
    }
}

fn positive<F: Real>(what: &str, v: F) -> Result<()> {
    if v > F::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{what} must be positive and finite, got {v}")))
    }
}

impl<F: Real> Dist<F> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Dist::Normal { mean, var } => {
                if !mean.is_finite() {
                    return Err(Error::ParameterDomain(format!("normal mean {mean} not finite")));
                }
                positive("normal variance", *var)
            }
            Dist::InverseGamma(p) => p.validate(),
            Dist::StudentT { df } => positive("degrees of freedom", *df),
            Dist::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(Error::ParameterDomain(format!("uniform requires lo < hi, got ({lo}, {hi})")))
                }
            }
            Dist::Beta { a, b } => {
                positive("beta a", *a)?;
                positive("beta b", *b)
            }
            Dist::Categorical(lw) => {
                if lw.is_empty() {
                    return Err(Error::ParameterDomain("categorical with no classes".into()));
                }
                if lw.iter().any(|w| w.is_nan() || *w == F::infinity()) {
                    return Err(Error::ParameterDomain("categorical log-weight is NaN or +inf".into()));
                }
                if lw.iter().all(|w| *w == F::neg_infinity()) {
                    return Err(Error::ParameterDomain("categorical has zero total mass".into()));
                }
                Ok(())
            }
        }
    }
}

/// One draw from `dist`; parameters are validated first.
pub fn sample<F: Real, R: RngCore + ?Sized>(rng: &mut R, dist: &Dist<F>) -> Result<Variate<F>> {
    dist.validate()?;
    Ok(match dist {
        Dist::Normal { mean, var } => Variate::Real(normal(rng, *mean, var.sqrt())),
        Dist::InverseGamma(p) => Variate::Real(p.sample(rng)),
        Dist::StudentT { df } => Variate::Real(F::draw_student_t(rng, *df)),
        Dist::Uniform { lo, hi } => Variate::Real(*lo + (*hi - *lo) * F::draw_open01(rng)),
        Dist::Beta { a, b } => Variate::Real(F::draw_beta(rng, *a, *b)),
        Dist::Categorical(lw) => Variate::Index(categorical_log(rng, lw)),
    })
}

/// `N(mean, sd²)` draw without parameter checks, for inner loops.
#[inline]
pub fn normal<F: Real, R: RngCore + ?Sized>(rng: &mut R, mean: F, sd: F) -> F {
    mean + sd * F::draw_std_normal(rng)
}

/// Samples an index from unnormalized log-weights.
///
/// Weights are shifted by their maximum before exponentiation, so spreads of
/// hundreds of nats are fine. Panics if no entry is finite; callers in this
/// crate always include at least one finite weight.
pub fn categorical_log<F: Real, R: RngCore + ?Sized>(rng: &mut R, log_weights: &[F]) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(F::neg_infinity(), F::max);
    assert!(
        max.is_finite(),
        "categorical_log: no finite log-weight among {} entries",
        log_weights.len()
    );
    let total: F = log_weights.iter().map(|&w| (w - max).exp()).sum();
    let mut u = F::draw_open01(rng) * total;
    let mut last_positive = 0;
    for (k, &w) in log_weights.iter().enumerate() {
        let p = (w - max).exp();
        if p > F::zero() {
            last_positive = k;
        }
        if u < p {
            return k;
        }
        u = u - p;
    }
    last_positive
}

#[inline]
pub fn ln_normal_pdf<F: Real>(x: F, sd: F) -> F {
    let z = x / sd;
    -lit::<F>(0.5) * z * z - sd.ln() - lit::<F>(0.918_938_533_204_672_8)
}

#[inline]
pub fn normal_pdf<F: Real>(x: F, sd: F) -> F {
    let z = x / sd;
    (-lit::<F>(0.5) * z * z).exp() / (sd * (F::PI() + F::PI()).sqrt())
}

/// The generating error laws of the simulation study.
///
/// `SymMixture` uses the mirrored parameterization
/// `p(x) = Σ_k π_k (φ(x − z_k) + φ(x + z_k))` with unit component sd, so the
/// weights satisfy `2 Σ π_k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorSpec<F> {
    StudentT { df: F },
    StandardNormal,
    Uniform { lo: F, hi: F },
    SymMixture { weights: Vec<F>, centers: Vec<F> },
}

const E8_CENTERS: [f64; 4] = [0.0, 1.5, 2.5, 3.5];
const E8_WEIGHTS: [f64; 4] = [0.1, 0.2, 0.15, 0.05];
const E9_CENTERS: [f64; 4] = [0.0, 1.0, 2.0, 4.0];
const E9_WEIGHTS: [f64; 4] = [0.05, 0.15, 0.1, 0.2];

impl<F: Real> ErrorSpec<F> {
    /// The nine named laws `E1`..`E9`.
    pub fn from_token(token: &str) -> Result<Self> {
        let spec = match token.trim().to_ascii_uppercase().as_str() {
            "E1" => ErrorSpec::StudentT { df: lit(1.0) },
            "E2" => ErrorSpec::StudentT { df: lit(2.0) },
            "E3" => ErrorSpec::StudentT { df: lit(4.0) },
            "E4" => ErrorSpec::StudentT { df: lit(8.0) },
            "E5" => ErrorSpec::StudentT { df: lit(16.0) },
            "E6" => ErrorSpec::StandardNormal,
            "E7" => ErrorSpec::Uniform {
                lo: lit(-3.0),
                hi: lit(3.0),
            },
            "E8" => ErrorSpec::SymMixture {
                weights: E8_WEIGHTS.iter().map(|&w| lit(w)).collect(),
                centers: E8_CENTERS.iter().map(|&z| lit(z)).collect(),
            },
            "E9" => ErrorSpec::SymMixture {
                weights: E9_WEIGHTS.iter().map(|&w| lit(w)).collect(),
                centers: E9_CENTERS.iter().map(|&z| lit(z)).collect(),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown error token {other:?}; expected E1..E9"
                )))
            }
        };
        Ok(spec)
    }

    /// Parses either a token `E1`..`E9` or a JSON object such as
    /// `{"kind":"sym_mixture","weights":[0.25,0.25],"centers":[0,2]}`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            let spec: Self = serde_json::from_str(t)?;
            spec.validate()?;
            Ok(spec)
        } else {
            Self::from_token(t)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ErrorSpec::StudentT { df } => positive("degrees of freedom", *df),
            ErrorSpec::StandardNormal => Ok(()),
            ErrorSpec::Uniform { lo, hi } => Dist::Uniform { lo: *lo, hi: *hi }.validate(),
            ErrorSpec::SymMixture { weights, centers } => {
                if weights.is_empty() || weights.len() != centers.len() {
                    return Err(Error::ParameterDomain(format!(
                        "mixture needs equal, nonzero numbers of weights and centers ({} vs {})",
                        weights.len(),
                        centers.len()
                    )));
                }
                if weights.iter().any(|w| !(*w >= F::zero()) || !w.is_finite()) {
                    return Err(Error::ParameterDomain("mixture weights must be nonnegative".into()));
                }
                if centers.iter().any(|z| !z.is_finite()) {
                    return Err(Error::ParameterDomain("mixture centers must be finite".into()));
                }
                let mass = lit::<F>(2.0) * weights.iter().copied().sum::<F>();
                if (mass - F::one()).abs() > lit(1e-9) {
                    return Err(Error::ParameterDomain(format!(
                        "mirrored mixture mass 2·Σπ must equal 1, got {mass}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self, ErrorSpec::SymMixture { .. })
    }

    /// Density of the law at `x`. Evaluated at `|x|`, so symmetric bit for bit.
    pub fn density(&self, x: F) -> F {
        let ax = x.abs();
        match self {
            ErrorSpec::StudentT { df } => student_t_pdf(ax, *df),
            ErrorSpec::StandardNormal => normal_pdf(ax, F::one()),
            ErrorSpec::Uniform { lo, hi } => {
                let t = if *lo == -*hi { ax } else { x };
                if t >= *lo && t <= *hi {
                    F::one() / (*hi - *lo)
                } else {
                    F::zero()
                }
            }
            ErrorSpec::SymMixture { weights, centers } => weights
                .iter()
                .zip(centers)
                .map(|(&w, &z)| w * (normal_pdf(ax - z, F::one()) + normal_pdf(ax + z, F::one())))
                .sum(),
        }
    }

    /// One draw from the law.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> F {
        match self {
            ErrorSpec::StudentT { df } => F::draw_student_t(rng, *df),
            ErrorSpec::StandardNormal => F::draw_std_normal(rng),
            ErrorSpec::Uniform { lo, hi } => *lo + (*hi - *lo) * F::draw_open01(rng),
            ErrorSpec::SymMixture { weights, centers } => {
                let lw: Vec<F> = weights.iter().map(|w| w.ln()).collect();
                let k = categorical_log(rng, &lw);
                let sign = if F::draw_open01(rng) < lit(0.5) {
                    F::one()
                } else {
                    -F::one()
                };
                normal(rng, sign * centers[k], F::one())
            }
        }
    }

    /// Variance of the law (infinite for t with `df ≤ 2`).
    pub fn variance(&self) -> F {
        match self {
            ErrorSpec::StudentT { df } => {
                if *df > lit(2.0) {
                    *df / (*df - lit(2.0))
                } else {
                    F::infinity()
                }
            }
            ErrorSpec::StandardNormal => F::one(),
            ErrorSpec::Uniform { lo, hi } => (*hi - *lo) * (*hi - *lo) / lit(12.0),
            ErrorSpec::SymMixture { weights, centers } => {
                F::one()
                    + weights
                        .iter()
                        .zip(centers)
                        .map(|(&w, &z)| lit::<F>(2.0) * w * z * z)
                        .sum::<F>()
            }
        }
    }
}

impl<F: Real> FromStr for ErrorSpec<F> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Density of the law at `x`.
pub fn error_density<F: Real>(spec: &ErrorSpec<F>, x: F) -> F {
    spec.density(x)
}

/// One draw from the law.
pub fn error_sample<F: Real, R: RngCore + ?Sized>(rng: &mut R, spec: &ErrorSpec<F>) -> F {
    spec.sample(rng)
}

fn student_t_pdf<F: Real>(x: F, df: F) -> F {
    let v = crate::scalar::to_f64(df);
    let ln_c = statrs::function::gamma::ln_gamma((v + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(v / 2.0)
        - 0.5 * (v * std::f64::consts::PI).ln();
    let half = lit::<F>(0.5);
    (lit::<F>(ln_c) - (df + F::one()) * half * (x * x / df).ln_1p()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn degenerate_normal_is_rejected() {
        let mut rng = RngStream::new(1, 0);
        let err = sample(&mut rng, &Dist::Normal { mean: 0.0, var: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::ParameterDomain(_)));
        assert!(sample(&mut rng, &Dist::Uniform { lo: 1.0, hi: 1.0 }).is_err());
        assert!(sample(&mut rng, &Dist::<f64>::Categorical(vec![])).is_err());
        assert!(InverseGammaParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn fair_categorical_is_fair() {
        let mut rng = RngStream::new(7, 3);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| categorical_log(&mut rng, &[0.0_f64, 0.0]) == 1)
            .count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn categorical_survives_700_nat_spread() {
        let mut rng = RngStream::new(7, 4);
        let lw = [-1000.0_f64, -300.0, -300.0 + 2f64.ln()];
        let n = 30_000;
        let twos = (0..n).filter(|_| categorical_log(&mut rng, &lw) == 2).count();
        assert!((twos as f64 / n as f64 - 2.0 / 3.0).abs() < 0.015);
    }

    #[test]
    fn inverse_gamma_mean_matches_moment_formula() {
        let mut rng = RngStream::new(11, 0);
        let ig = InverseGammaParams::new(3.0_f64, 2.0).unwrap();
        let n = 1_000_000;
        let mean = (0..n).map(|_| ig.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
        assert_eq!(ig.mean(), 1.0);
    }

    #[test]
    fn e8_density_at_zero() {
        // Eight Gaussian terms summed directly with the exact 1/sqrt(2π).
        let inv_sqrt_2pi = 0.398_942_280_401_432_7_f64;
        let z = [0.0_f64, 1.5, 2.5, 3.5];
        let pi = [0.1, 0.2, 0.15, 0.05];
        let oracle: f64 = z
            .iter()
            .zip(pi)
            .map(|(z, p)| p * 2.0 * inv_sqrt_2pi * (-0.5 * z * z).exp())
            .sum();
        let spec = ErrorSpec::<f64>::from_token("E8").unwrap();
        assert!((spec.density(0.0) - oracle).abs() < 1e-14);
        assert!((spec.density(0.0) - 0.13694).abs() < 5e-6);
        let n = ErrorSpec::<f64>::StandardNormal;
        assert!((n.density(0.0) - 0.398_942_3).abs() < 1e-7);
    }

    #[test]
    fn every_named_law_is_symmetric() {
        for k in 1..=9 {
            let spec = ErrorSpec::<f64>::from_token(&format!("E{k}")).unwrap();
            for x in [0.3, 1.7, 4.2, 2.999, 3.0, 3.001] {
                assert_eq!(spec.density(x), spec.density(-x), "E{k} at {x}");
            }
        }
    }

    #[test]
    fn error_sampler_moments() {
        let n = 1_000_000;
        let mut rng = RngStream::new(5, 0);
        let e6 = ErrorSpec::<f64>::from_token("E6").unwrap();
        let m = (0..n).map(|_| e6.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(m.abs() < 0.005);

        let e7 = ErrorSpec::<f64>::from_token("E7").unwrap();
        let xs: Vec<f64> = (0..n).map(|_| e7.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 3.0).abs() < 0.02, "var {var}");

        let e1 = ErrorSpec::<f64>::from_token("E1").unwrap();
        let mut c: Vec<f64> = (0..100_000).map(|_| e1.sample(&mut rng)).collect();
        c.sort_by(f64::total_cmp);
        let med = 0.5 * (c[49_999] + c[50_000]);
        assert!(med.abs() < 0.02, "median {med}");
    }

    #[test]
    fn mixture_json_and_tokens() {
        let s: ErrorSpec<f64> =
            ErrorSpec::parse(r#"{"kind":"sym_mixture","weights":[0.25,0.25],"centers":[0,2]}"#)
                .unwrap();
        assert!(s.is_mixture());
        assert!(ErrorSpec::<f64>::parse(r#"{"kind":"sym_mixture","weights":[0.5,0.25],"centers":[0,2]}"#).is_err());
        assert!(ErrorSpec::<f64>::parse(r#"{"kind":"uniform","lo":1,"hi":-1}"#).is_err());
        assert!(ErrorSpec::<f64>::parse("E10").is_err());
        assert_eq!(
            "e7".parse::<ErrorSpec<f64>>().unwrap(),
            ErrorSpec::Uniform { lo: -3.0, hi: 3.0 }
        );
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(42, 9);
        let mut b = RngStream::new(42, 9);
        let mut c = RngStream::new(42, 10);
        let xa: Vec<u64> = (0..1000).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..1000).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..1000).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        let mut d = RngStream::derived(42, 1, 9);
        assert_ne!(d.random::<u64>(), xa[0]);
    }
}
