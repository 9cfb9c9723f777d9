//! Grouped regression data, the generative model used by the simulation study,
//! and the conditional likelihood shared by the samplers.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rngdist::{ln_normal_pdf, ErrorSpec};
use crate::scalar::{lit, Real};

/// One group (subject) of a panel: `m` responses, an `m×p` row-major design,
/// and optionally the covariate multiplying a random slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group<F> {
    pub y: Vec<F>,
    pub x: Vec<F>,
    #[serde(default = "Option::default")]
    pub slope: Option<Vec<F>>,
}

impl<F: Real> Group<F> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    #[inline]
    pub fn row(&self, j: usize, p: usize) -> &[F] {
        &self.x[j * p..(j + 1) * p]
    }
}

/// Grouped observations `{(Y_ij, X_ij)}`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelDataset<F> {
    groups: Vec<Group<F>>,
    p: usize,
    covariate_names: Vec<String>,
    offsets: Vec<usize>,
}

impl<F: Real> PanelDataset<F> {
    pub fn new(groups: Vec<Group<F>>, p: usize) -> Result<Self> {
        let names = (1..=p).map(|k| format!("beta_{k}")).collect();
        Self::with_names(groups, p, names)
    }

    pub fn with_names(groups: Vec<Group<F>>, p: usize, covariate_names: Vec<String>) -> Result<Self> {
        if p == 0 {
            return Err(Error::DimensionMismatch("covariate dimension must be at least 1".into()));
        }
        if groups.is_empty() {
            return Err(Error::DimensionMismatch("dataset has no groups".into()));
        }
        if covariate_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate names for p = {p}",
                covariate_names.len()
            )));
        }
        let mut offsets = Vec::with_capacity(groups.len() + 1);
        let mut total = 0;
        for (i, g) in groups.iter().enumerate() {
            if g.y.is_empty() {
                return Err(Error::DimensionMismatch(format!("group {i} is empty")));
            }
            if g.x.len() != g.y.len() * p {
                return Err(Error::DimensionMismatch(format!(
                    "group {i}: design has {} entries, expected {}×{p}",
                    g.x.len(),
                    g.y.len()
                )));
            }
            if let Some(s) = &g.slope {
                if s.len() != g.y.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "group {i}: slope covariate length {} vs {} responses",
                        s.len(),
                        g.y.len()
                    )));
                }
            }
            let finite = g.y.iter().chain(&g.x).chain(g.slope.iter().flatten()).all(|v| v.is_finite());
            if !finite {
                return Err(Error::ParameterDomain(format!("group {i} has non-finite entries")));
            }
            offsets.push(total);
            total += g.y.len();
        }
        offsets.push(total);
        Ok(Self {
            groups,
            p,
            covariate_names,
            offsets,
        })
    }

    pub fn groups(&self) -> &[Group<F>] {
        &self.groups
    }
    pub fn group(&self, i: usize) -> &Group<F> {
        &self.groups[i]
    }
    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }
    pub fn n_obs(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }
    /// Index of observation `(i, 0)` in the flattened observation order.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }
    pub fn has_slope(&self) -> bool {
        self.groups.iter().all(|g| g.slope.is_some())
    }

    /// `Σ_ij X_ij X_ijᵀ`, row-major `p×p`.
    pub fn gram(&self) -> Vec<F> {
        let p = self.p;
        let mut a = vec![F::zero(); p * p];
        for g in &self.groups {
            for j in 0..g.len() {
                let r = g.row(j, p);
                for u in 0..p {
                    for v in 0..p {
                        a[u * p + v] = a[u * p + v] + r[u] * r[v];
                    }
                }
            }
        }
        a
    }

    /// Same design with responses replaced (flattened order).
    pub fn with_responses(&self, y: &[F]) -> Result<Self> {
        if y.len() != self.n_obs() {
            return Err(Error::DimensionMismatch(format!(
                "{} responses for {} observations",
                y.len(),
                self.n_obs()
            )));
        }
        let mut out = self.clone();
        for (i, g) in out.groups.iter_mut().enumerate() {
            let o = self.offsets[i];
            let m = g.y.len();
            g.y.copy_from_slice(&y[o..o + m]);
        }
        Ok(out)
    }

    pub fn responses(&self) -> Vec<F> {
        self.groups.iter().flat_map(|g| g.y.iter().copied()).collect()
    }
}

/// Which random effects a model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomEffects {
    None,
    Intercept,
    /// Independent `b₁ + b₂·t_ij`; needs the slope covariate in every group.
    InterceptSlope,
}

/// Error law assumed by a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    Normal,
    /// Location mixture of normals under a symmetrized DP prior.
    SdpMixture,
}

/// A concrete model: random-effect structure plus error law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub random_effects: RandomEffects,
    pub errors: ErrorModel,
}

/// The three model families. `Location` is `FixedEffects` with a single
/// all-ones covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Location,
    FixedEffects,
    RandomIntercept,
}

impl ModelKind {
    pub fn random_effects(self) -> RandomEffects {
        match self {
            ModelKind::Location | ModelKind::FixedEffects => RandomEffects::None,
            ModelKind::RandomIntercept => RandomEffects::Intercept,
        }
    }

    pub fn with_errors(self, errors: ErrorModel) -> ModelSpec {
        ModelSpec {
            random_effects: self.random_effects(),
            errors,
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "location" => Ok(ModelKind::Location),
            "fixed-effects" | "regression" => Ok(ModelKind::FixedEffects),
            "random-intercept" => Ok(ModelKind::RandomIntercept),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?}; expected location, fixed-effects or random-intercept"
            ))),
        }
    }
}

/// Submodels of the growth-curve analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrowthModel {
    /// No random effects, normal errors.
    M1,
    /// Random intercept, normal errors.
    M2,
    /// Random intercept, symmetric mixture errors.
    M3,
    /// Random intercept and slope, normal errors.
    M4,
    /// Random intercept and slope, symmetric mixture errors.
    M5,
}

impl GrowthModel {
    pub const ALL: [GrowthModel; 5] = [
        GrowthModel::M1,
        GrowthModel::M2,
        GrowthModel::M3,
        GrowthModel::M4,
        GrowthModel::M5,
    ];

    pub fn spec(self) -> ModelSpec {
        let (random_effects, errors) = match self {
            GrowthModel::M1 => (RandomEffects::None, ErrorModel::Normal),
            GrowthModel::M2 => (RandomEffects::Intercept, ErrorModel::Normal),
            GrowthModel::M3 => (RandomEffects::Intercept, ErrorModel::SdpMixture),
            GrowthModel::M4 => (RandomEffects::InterceptSlope, ErrorModel::Normal),
            GrowthModel::M5 => (RandomEffects::InterceptSlope, ErrorModel::SdpMixture),
        };
        ModelSpec {
            random_effects,
            errors,
        }
    }
}

impl std::str::FromStr for GrowthModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M1" => Ok(GrowthModel::M1),
            "M2" => Ok(GrowthModel::M2),
            "M3" => Ok(GrowthModel::M3),
            "M4" => Ok(GrowthModel::M4),
            "M5" => Ok(GrowthModel::M5),
            other => Err(Error::Config(format!("unknown growth model {other:?}; expected M1..M5"))),
        }
    }
}

/// How covariates are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateLaw<F> {
    /// Independent Bernoulli(1/2) entries, `p = β₀.len()`.
    BernoulliHalf,
    /// Single all-ones column (location model).
    Intercept,
    /// Fixed per-group designs, e.g. read from a file; each is `m×p` row-major.
    Fixed(Vec<Vec<F>>),
}

/// Generative settings: `Y_ij = β₀ᵀX_ij + b_i + ε_ij`, `b_i ~ N(0, σ_b²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeConfig<F> {
    pub beta: Vec<F>,
    pub error: ErrorSpec<F>,
    pub random_effect_sd: F,
    pub n_groups: usize,
    pub group_size: usize,
    pub covariates: CovariateLaw<F>,
}

impl<F: Real> GenerativeConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_empty() {
            return Err(Error::Config("β₀ must have at least one coordinate".into()));
        }
        if !(self.random_effect_sd >= F::zero()) {
            return Err(Error::ParameterDomain(format!(
                "random-effect sd must be nonnegative, got {}",
                self.random_effect_sd
            )));
        }
        if self.n_groups == 0 || self.group_size == 0 {
            return Err(Error::Config("need at least one group of at least one observation".into()));
        }
        self.error.validate()?;
        match &self.covariates {
            CovariateLaw::Intercept if self.beta.len() != 1 => Err(Error::DimensionMismatch(
                "location model needs a one-dimensional β₀".into(),
            )),
            CovariateLaw::Fixed(xs) => {
                if xs.len() != self.n_groups
                    || xs.iter().any(|x| x.len() != self.group_size * self.beta.len())
                {
                    Err(Error::DimensionMismatch(
                        "fixed designs must match n_groups × group_size × p".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Draws one dataset from the generative model.
pub fn simulate_dataset<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    cfg: &GenerativeConfig<F>,
) -> Result<PanelDataset<F>> {
    cfg.validate()?;
    let p = cfg.beta.len();
    let m = cfg.group_size;
    let half = lit::<F>(0.5);
    let mut groups = Vec::with_capacity(cfg.n_groups);
    for i in 0..cfg.n_groups {
        let x: Vec<F> = match &cfg.covariates {
            CovariateLaw::BernoulliHalf => (0..m * p)
                .map(|_| if F::draw_open01(rng) < half { F::one() } else { F::zero() })
                .collect(),
            CovariateLaw::Intercept => vec![F::one(); m],
            CovariateLaw::Fixed(xs) => xs[i].clone(),
        };
        let b = if cfg.random_effect_sd > F::zero() {
            cfg.random_effect_sd * F::draw_std_normal(rng)
        } else {
            F::zero()
        };
        let y = (0..m)
            .map(|j| {
                let mean: F = x[j * p..(j + 1) * p]
                    .iter()
                    .zip(&cfg.beta)
                    .map(|(a, b)| *a * *b)
                    .sum();
                mean + b + cfg.error.sample(rng)
            })
            .collect();
        groups.push(Group { y, x, slope: None });
    }
    PanelDataset::new(groups, p)
}

/// `Σ_ij log φ_σ(Y_ij − βᵀX_ij − b_i − z_ij)`; `z` is in flattened
/// observation order, `b` has one entry per group.
pub fn loglik_given_latents<F: Real>(
    data: &PanelDataset<F>,
    beta: &[F],
    sigma: F,
    z: &[F],
    b: &[F],
) -> Result<F> {
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch(format!("β has {} entries, p = {}", beta.len(), data.p())));
    }
    if z.len() != data.n_obs() {
        return Err(Error::DimensionMismatch(format!(
            "{} latent locations for {} observations",
            z.len(),
            data.n_obs()
        )));
    }
    if b.len() != data.n_groups() {
        return Err(Error::DimensionMismatch(format!(
            "{} random effects for {} groups",
            b.len(),
            data.n_groups()
        )));
    }
    if !(sigma > F::zero()) {
        return Err(Error::ParameterDomain(format!("σ must be positive, got {sigma}")));
    }
    let p = data.p();
    let mut total = F::zero();
    for (i, g) in data.groups().iter().enumerate() {
        let o = data.offset(i);
        for j in 0..g.len() {
            let fit: F = g.row(j, p).iter().zip(beta).map(|(a, b)| *a * *b).sum();
            total = total + ln_normal_pdf(g.y[j] - fit - b[i] - z[o + j], sigma);
        }
    }
    Ok(total)
}

/// Growth-curve panel read from CSV with header `subject,sex,age,distance`.
///
/// `sex` is 0 for boys and 1 for girls. Each subject becomes one group with
/// design `[1, sex, age, sex·age]` and the age as random-slope covariate.
pub fn load_growth_csv<F: Real>(path: impl AsRef<Path>) -> Result<PanelDataset<F>> {
    let file = std::fs::File::open(path)?;
    read_growth_csv(file)
}

pub fn read_growth_csv<F: Real, Rd: Read>(reader: Rd) -> Result<PanelDataset<F>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (c_subj, c_sex, c_age, c_dist) = (col("subject")?, col("sex")?, col("age")?, col("distance")?);

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(F, F, F)>> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |k: usize, what: &str| -> Result<f64> {
            let raw = rec.get(k).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing {what}"),
            })?;
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{what} {raw:?} is not a number"),
            })
        };
        let subject = rec.get(c_subj).unwrap_or("").to_string();
        if subject.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty subject id".into(),
            });
        }
        let sex = field(c_sex, "sex")?;
        if sex != 0.0 && sex != 1.0 {
            return Err(Error::Parse {
                line,
                message: format!("sex must be 0 or 1, got {sex}"),
            });
        }
        let age = field(c_age, "age")?;
        let dist = field(c_dist, "distance")?;
        if !age.is_finite() || !dist.is_finite() {
            return Err(Error::Parse {
                line,
                message: "non-finite age or distance".into(),
            });
        }
        if !rows.contains_key(&subject) {
            order.push(subject.clone());
        }
        rows.entry(subject).or_default().push((lit(sex), lit(age), lit(dist)));
    }
    if order.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    let mut groups = Vec::with_capacity(order.len());
    for s in &order {
        let r = &rows[s];
        let sex0 = r[0].0;
        if r.iter().any(|row| row.0 != sex0) {
            return Err(Error::Parse {
                line: 0,
                message: format!("subject {s} has inconsistent sex codes"),
            });
        }
        let mut x = Vec::with_capacity(4 * r.len());
        for &(sex, age, _) in r {
            x.extend_from_slice(&[F::one(), sex, age, sex * age]);
        }
        groups.push(Group {
            y: r.iter().map(|row| row.2).collect(),
            x,
            slope: Some(r.iter().map(|row| row.1).collect()),
        });
    }
    let names = (0..4).map(|k| format!("beta_{k}")).collect();
    PanelDataset::with_names(groups, 4, names)
}
