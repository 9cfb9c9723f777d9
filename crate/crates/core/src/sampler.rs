//! Gibbs sampler for `Y_ij = βᵀX_ij + b_i + z_ij + ε_ij`, `ε_ij ~ N(0, σ²)`,
//! with `z_ij` drawn from a symmetrized DP mixing measure (or fixed at zero
//! for normal errors).
//!
//! One cycle updates, in order: (i) β, (ii) σ², (iii) random effects,
//! (iv) random-effect variances, (v) latent classes, signs and locations.
//! Steps are skipped when the model lacks the corresponding component.

use std::io::Write;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::models::{ErrorModel, ModelSpec, PanelDataset, RandomEffects};
use crate::rngdist::{normal, InverseGammaParams, RngStream};
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::sdp::{gibbs_class_sweep, ClassAssignment, NewClusterMode, SdpPrior};

pub mod geweke;

/// Priors: `β ~ N(0, τ₀² I)`, `σ² ~ IG(α₀, λ₀)`, each random-effect variance
/// `~ IG(α₁, λ₁)`, error mixing measure `~ DP_S(α, N(0, τ₁²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig<F> {
    pub beta_var: F,
    pub sigma2: InverseGammaParams<F>,
    pub sigma_b2: InverseGammaParams<F>,
    pub sdp: SdpPrior<F>,
}

impl<F: Real> PriorConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_var > F::zero() && self.beta_var.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "β prior variance must be positive, got {}",
                self.beta_var
            )));
        }
        self.sigma2.validate()?;
        self.sigma_b2.validate()?;
        self.sdp.validate()
    }
}

impl<F: Real> Default for PriorConfig<F> {
    /// `τ₀² = 100`, `IG(1, 1)` for both variances, `DP_S(1, N(0, 3²))`.
    fn default() -> Self {
        Self {
            beta_var: lit(100.0),
            sigma2: InverseGammaParams {
                shape: F::one(),
                rate: F::one(),
            },
            sigma_b2: InverseGammaParams {
                shape: F::one(),
                rate: F::one(),
            },
            sdp: SdpPrior {
                concentration: F::one(),
                base_sd: lit(3.0),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 6000,
            burn_in: 1000,
            thin: 1,
            seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be smaller than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

/// Bayesian estimators of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Normal errors, no random effects.
    B1,
    /// Normal errors, normal random intercept.
    B2,
    /// Symmetric DP-mixture errors, normal random intercept.
    B3,
}

impl Variant {
    pub fn model(self) -> ModelSpec {
        match self {
            Variant::B1 => ModelSpec {
                random_effects: RandomEffects::None,
                errors: ErrorModel::Normal,
            },
            Variant::B2 => ModelSpec {
                random_effects: RandomEffects::Intercept,
                errors: ErrorModel::Normal,
            },
            Variant::B3 => ModelSpec {
                random_effects: RandomEffects::Intercept,
                errors: ErrorModel::SdpMixture,
            },
        }
    }
}

/// Model plus sampler switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub model: ModelSpec,
    pub new_cluster_mode: NewClusterMode,
    /// Keep the mixture state at its initial single class `ϑ = 0` and skip
    /// step (v). Reduces an SDP-mixture model to its normal-error counterpart.
    pub freeze_latents: bool,
}

impl From<ModelSpec> for SamplerSpec {
    fn from(model: ModelSpec) -> Self {
        Self {
            model,
            new_cluster_mode: NewClusterMode::Integrated,
            freeze_latents: false,
        }
    }
}

impl From<Variant> for SamplerSpec {
    fn from(v: Variant) -> Self {
        v.model().into()
    }
}

impl SamplerSpec {
    pub fn has_mixture(&self) -> bool {
        self.model.errors == ErrorModel::SdpMixture
    }

    fn check_data<F: Real>(&self, data: &PanelDataset<F>) -> Result<()> {
        if self.model.random_effects == RandomEffects::InterceptSlope && !data.has_slope() {
            return Err(Error::Config(
                "random slope requested but the dataset carries no slope covariate".into(),
            ));
        }
        Ok(())
    }
}

/// Every latent quantity of one Gibbs cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState<F> {
    pub beta: Vec<F>,
    pub sigma2: F,
    /// Random intercepts, one per group (zero when absent).
    pub b: Vec<F>,
    pub sigma_b2: F,
    /// Random slopes, one per group (zero when absent).
    pub b_slope: Vec<F>,
    pub sigma_b2_slope: F,
    /// Mixture state; `None` means `z ≡ 0`.
    pub assign: Option<ClassAssignment<F>>,
}

impl<F: Real> ChainState<F> {
    /// Starting point: ridge estimate of β, residual variance for σ², zero
    /// random effects, one mixture class at zero.
    pub fn initial(data: &PanelDataset<F>, spec: &SamplerSpec, priors: &PriorConfig<F>) -> Result<Self> {
        let p = data.p();
        let mut a = data.gram();
        for k in 0..p {
            a[k * p + k] = a[k * p + k] + F::one() / priors.beta_var;
        }
        let mut rhs = vec![F::zero(); p];
        for g in data.groups() {
            for j in 0..g.len() {
                for (r, x) in rhs.iter_mut().zip(g.row(j, p)) {
                    *r = *r + *x * g.y[j];
                }
            }
        }
        let beta = Cholesky::new(&a, p)?.solve(&rhs);
        let mut rss = F::zero();
        for g in data.groups() {
            for j in 0..g.len() {
                let fit: F = g.row(j, p).iter().zip(&beta).map(|(x, b)| *x * *b).sum();
                rss = rss + (g.y[j] - fit) * (g.y[j] - fit);
            }
        }
        let sigma2 = (rss / from_usize::<F>(data.n_obs())).max(lit(1e-4));
        let n = data.n_groups();
        Ok(Self {
            beta,
            sigma2,
            b: vec![F::zero(); n],
            sigma_b2: match spec.model.random_effects {
                RandomEffects::None => F::zero(),
                _ => F::one(),
            },
            b_slope: vec![F::zero(); n],
            sigma_b2_slope: match spec.model.random_effects {
                RandomEffects::InterceptSlope => lit(0.1),
                _ => F::zero(),
            },
            assign: spec
                .has_mixture()
                .then(|| ClassAssignment::single_class(data.n_obs())),
        })
    }

    /// `z_k` for flattened observation `k`.
    #[inline]
    pub fn latent(&self, k: usize) -> F {
        match &self.assign {
            Some(a) => a.latent(k),
            None => F::zero(),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.assign.as_ref().map_or(0, |a| a.n_classes())
    }

    /// Random-effect contribution `b_i + b_slope_i · t_ij`.
    #[inline]
    fn effect(&self, data: &PanelDataset<F>, i: usize, j: usize) -> F {
        let slope = match &data.group(i).slope {
            Some(t) => self.b_slope[i] * t[j],
            None => F::zero(),
        };
        self.b[i] + slope
    }
}

#[inline]
fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Conditional `N(μ_n, Σ_n)` of β in precision form: returns the mean and the
/// Cholesky factor of `Σ_n⁻¹ = I/τ₀² + ΣXXᵀ/σ²`.
///
/// Equal to `μ_n = τ₀²(σ²I + τ₀²ΣXXᵀ)⁻¹ Σ(Y − z − b)X`,
/// `Σ_n = τ₀²σ²(σ²I + τ₀²ΣXXᵀ)⁻¹`.
pub fn beta_conditional<F: Real>(
    state: &ChainState<F>,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
) -> Result<(Vec<F>, Cholesky<F>)> {
    let p = data.p();
    let inv_s2 = F::one() / state.sigma2;
    let mut prec = data.gram();
    prec.iter_mut().for_each(|v| *v = *v * inv_s2);
    for k in 0..p {
        prec[k * p + k] = prec[k * p + k] + F::one() / priors.beta_var;
    }
    let mut rhs = vec![F::zero(); p];
    for (i, g) in data.groups().iter().enumerate() {
        let o = data.offset(i);
        for j in 0..g.len() {
            let r = (g.y[j] - state.latent(o + j) - state.effect(data, i, j)) * inv_s2;
            for (acc, x) in rhs.iter_mut().zip(g.row(j, p)) {
                *acc = *acc + *x * r;
            }
        }
    }
    let chol = Cholesky::new(&prec, p)
        .map_err(|e| Error::NotPositiveDefinite(format!("β conditional precision: {e}")))?;
    let mean = chol.solve(&rhs);
    Ok((mean, chol))
}

/// Step (i).
pub fn update_beta<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &mut ChainState<F>,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
) -> Result<()> {
    let (mean, chol) = beta_conditional(state, data, priors)?;
    state.beta = chol.sample_precision(rng, &mean);
    Ok(())
}

/// `IG(α₀ + N/2, λ₀ + ½ Σ (Y − βᵀX − z − b)²)`.
pub fn sigma2_conditional<F: Real>(
    state: &ChainState<F>,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
) -> InverseGammaParams<F> {
    let p = data.p();
    let half = lit::<F>(0.5);
    let mut ss = F::zero();
    for (i, g) in data.groups().iter().enumerate() {
        let o = data.offset(i);
        for j in 0..g.len() {
            let r = g.y[j] - dot(g.row(j, p), &state.beta) - state.latent(o + j) - state.effect(data, i, j);
            ss = ss + r * r;
        }
    }
    InverseGammaParams {
        shape: priors.sigma2.shape + half * from_usize::<F>(data.n_obs()),
        rate: priors.sigma2.rate + half * ss,
    }
}

/// Step (ii).
pub fn update_sigma2<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &mut ChainState<F>,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
) {
    state.sigma2 = sigma2_conditional(state, data, priors).sample(rng);
}

/// Conditional mean and variance of the random intercept of group `i`:
/// `N(σ_b²/(σ² + mσ_b²)·Σ_j r_ij, σ²σ_b²/(σ² + mσ_b²))`, `r_ij = Y − βᵀX − z`.
pub fn random_intercept_conditional<F: Real>(
    state: &ChainState<F>,
    data: &PanelDataset<F>,
    i: usize,
) -> (F, F) {
    let p = data.p();
    let g = data.group(i);
    let o = data.offset(i);
    let sum: F = (0..g.len())
        .map(|j| g.y[j] - dot(g.row(j, p), &state.beta) - state.latent(o + j))
        .sum();
    let m = from_usize::<F>(g.len());
    let denom = state.sigma2 + m * state.sigma_b2;
    (state.sigma_b2 / denom * sum, state.sigma2 * state.sigma_b2 / denom)
}

/// Step (iii). With a random slope, `(b₁, b₂)` of each group is drawn jointly
/// from its bivariate normal conditional under prior `diag(σ_b1², σ_b2²)`.
pub fn update_random_effects<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &mut ChainState<F>,
    data: &PanelDataset<F>,
    effects: RandomEffects,
) -> Result<()> {
    match effects {
        RandomEffects::None => Ok(()),
        RandomEffects::Intercept => {
            for i in 0..data.n_groups() {
                let (m, v) = random_intercept_conditional(state, data, i);
                state.b[i] = normal(rng, m, v.sqrt());
            }
            Ok(())
        }
        RandomEffects::InterceptSlope => {
            let p = data.p();
            let inv_s2 = F::one() / state.sigma2;
            for i in 0..data.n_groups() {
                let g = data.group(i);
                let t = g.slope.as_ref().ok_or_else(|| {
                    Error::Config(format!("group {i} lacks the random-slope covariate"))
                })?;
                let o = data.offset(i);
                let mut prec = [
                    F::one() / state.sigma_b2,
                    F::zero(),
                    F::zero(),
                    F::one() / state.sigma_b2_slope,
                ];
                let mut rhs = [F::zero(); 2];
                for j in 0..g.len() {
                    let r = g.y[j] - dot(g.row(j, p), &state.beta) - state.latent(o + j);
                    prec[0] = prec[0] + inv_s2;
                    prec[1] = prec[1] + inv_s2 * t[j];
                    prec[3] = prec[3] + inv_s2 * t[j] * t[j];
                    rhs[0] = rhs[0] + inv_s2 * r;
                    rhs[1] = rhs[1] + inv_s2 * r * t[j];
                }
                prec[2] = prec[1];
                let chol = Cholesky::new(&prec, 2)?;
                let mean = chol.solve(&rhs);
                let draw = chol.sample_precision(rng, &mean);
                state.b[i] = draw[0];
                state.b_slope[i] = draw[1];
            }
            Ok(())
        }
    }
}

/// `IG(α₁ + n/2, λ₁ + ½ Σ b_i²)`.
pub fn variance_conditional<F: Real>(effects: &[F], prior: &InverseGammaParams<F>) -> InverseGammaParams<F> {
    let half = lit::<F>(0.5);
    InverseGammaParams {
        shape: prior.shape + half * from_usize::<F>(effects.len()),
        rate: prior.rate + half * effects.iter().map(|b| *b * *b).sum::<F>(),
    }
}

/// Step (iv).
pub fn update_sigma_b2<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &mut ChainState<F>,
    priors: &PriorConfig<F>,
    effects: RandomEffects,
) {
    if effects == RandomEffects::None {
        return;
    }
    state.sigma_b2 = variance_conditional(&state.b, &priors.sigma_b2).sample(rng);
    if effects == RandomEffects::InterceptSlope {
        state.sigma_b2_slope = variance_conditional(&state.b_slope, &priors.sigma_b2).sample(rng);
    }
}

/// `e_ij = Y_ij − βᵀX_ij − b_i` (minus the slope effect), flattened.
pub fn residuals<F: Real>(state: &ChainState<F>, data: &PanelDataset<F>) -> Vec<F> {
    let p = data.p();
    let mut e = Vec::with_capacity(data.n_obs());
    for (i, g) in data.groups().iter().enumerate() {
        for j in 0..g.len() {
            e.push(g.y[j] - dot(g.row(j, p), &state.beta) - state.effect(data, i, j));
        }
    }
    e
}

/// Step (v): one class/sign/location sweep on the current residuals.
pub fn update_latent_classes<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &mut ChainState<F>,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
    mode: NewClusterMode,
) {
    let e = residuals(state, data);
    let sd = state.sigma2.sqrt();
    if let Some(assign) = state.assign.as_mut() {
        gibbs_class_sweep(rng, assign, &e, sd, &priors.sdp, mode);
    }
}

/// One full cycle (i)–(v) for the given model.
pub fn gibbs_cycle<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &mut ChainState<F>,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
    spec: &SamplerSpec,
) -> Result<()> {
    let effects = spec.model.random_effects;
    update_beta(rng, state, data, priors)?;
    update_sigma2(rng, state, data, priors);
    update_random_effects(rng, state, data, effects)?;
    update_sigma_b2(rng, state, priors, effects);
    if spec.has_mixture() && !spec.freeze_latents {
        update_latent_classes(rng, state, data, priors, spec.new_cluster_mode);
    }
    Ok(())
}

/// Location summaries of one monitored quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary<F> {
    pub name: String,
    pub mean: F,
    pub sd: F,
    pub median: F,
    pub q025: F,
    pub q975: F,
}

/// Summaries over retained (post-burn-in, thinned) draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary<F> {
    pub names: Vec<String>,
    /// Iteration index of each retained draw.
    pub iterations: Vec<usize>,
    /// One row per retained draw, columns as in `names`.
    pub draws: Vec<Vec<F>>,
    pub params: Vec<ParamSummary<F>>,
}

impl<F: Real> PosteriorSummary<F> {
    pub fn from_draws(names: Vec<String>, iterations: Vec<usize>, draws: Vec<Vec<F>>) -> Self {
        let params = names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let col: Vec<F> = draws.iter().map(|row| row[k]).collect();
                summarize(name, col)
            })
            .collect();
        Self {
            names,
            iterations,
            draws,
            params,
        }
    }

    pub fn param(&self, name: &str) -> Option<&ParamSummary<F>> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<F>> {
        let k = self.names.iter().position(|n| n == name)?;
        Some(self.draws.iter().map(|r| r[k]).collect())
    }

    /// Posterior means of the regression coefficients.
    pub fn beta_mean(&self) -> Vec<F> {
        self.params
            .iter()
            .filter(|p| p.name.starts_with("beta_"))
            .map(|p| p.mean)
            .collect()
    }

    /// Writes `iter,beta_1..beta_p,sigma2,sigma_b2,n_classes`, one row per
    /// retained draw; `sigma_b2` is the random-intercept variance.
    pub fn write_draw_log<W: Write>(&self, out: W) -> Result<()> {
        let betas: Vec<usize> = (0..self.names.len())
            .filter(|&k| self.names[k].starts_with("beta_"))
            .collect();
        let find = |n: &str| self.names.iter().position(|x| x == n);
        let (k_s2, k_b2, k_nc) = (find("sigma2"), find("var_b1"), find("n_classes"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iter".to_string()];
        header.extend((1..=betas.len()).map(|k| format!("beta_{k}")));
        header.extend(["sigma2", "sigma_b2", "n_classes"].map(String::from));
        w.write_record(&header)?;
        for (row, it) in self.draws.iter().zip(&self.iterations) {
            let mut rec = vec![it.to_string()];
            rec.extend(betas.iter().map(|&k| fmt_num(row[k])));
            rec.push(k_s2.map_or("0".into(), |k| fmt_num(row[k])));
            rec.push(k_b2.map_or("0".into(), |k| fmt_num(row[k])));
            rec.push(k_nc.map_or("0".into(), |k| format!("{}", to_f64(row[k]) as usize)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt_num<F: Real>(x: F) -> String {
    format!("{}", to_f64(x))
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted<F: Real>(sorted: &[F], q: F) -> F {
    if sorted.is_empty() {
        return F::nan();
    }
    let h = q * from_usize::<F>(sorted.len() - 1);
    let lo = h.floor().to_usize().unwrap_or(0).min(sorted.len() - 1);
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - from_usize::<F>(lo);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn summarize<F: Real>(name: &str, mut col: Vec<F>) -> ParamSummary<F> {
    let n = col.len();
    let nf = from_usize::<F>(n.max(1));
    let mean = col.iter().copied().sum::<F>() / nf;
    let var = if n > 1 {
        col.iter().map(|x| (*x - mean) * (*x - mean)).sum::<F>() / from_usize::<F>(n - 1)
    } else {
        F::zero()
    };
    col.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ParamSummary {
        name: name.to_string(),
        mean,
        sd: var.sqrt(),
        median: quantile_sorted(&col, lit(0.5)),
        q025: quantile_sorted(&col, lit(0.025)),
        q975: quantile_sorted(&col, lit(0.975)),
    }
}

/// Names of the monitored quantities for a model on `data`.
pub fn monitored_names<F: Real>(data: &PanelDataset<F>, spec: &SamplerSpec) -> Vec<String> {
    let mut names: Vec<String> = data.covariate_names().to_vec();
    names.push("sigma2".into());
    names.push("sigma".into());
    if spec.model.random_effects != RandomEffects::None {
        names.push("var_b1".into());
        names.push("sigma_b1".into());
    }
    if spec.model.random_effects == RandomEffects::InterceptSlope {
        names.push("var_b2".into());
        names.push("sigma_b2".into());
    }
    if spec.has_mixture() {
        names.push("n_classes".into());
    }
    names
}

fn record<F: Real>(state: &ChainState<F>, spec: &SamplerSpec) -> Vec<F> {
    let mut row = state.beta.clone();
    row.push(state.sigma2);
    row.push(state.sigma2.sqrt());
    if spec.model.random_effects != RandomEffects::None {
        row.push(state.sigma_b2);
        row.push(state.sigma_b2.sqrt());
    }
    if spec.model.random_effects == RandomEffects::InterceptSlope {
        row.push(state.sigma_b2_slope);
        row.push(state.sigma_b2_slope.sqrt());
    }
    if spec.has_mixture() {
        row.push(from_usize(state.n_classes()));
    }
    row
}

/// Runs one chain with a stream derived from `chain.seed`.
pub fn run_chain<F: Real>(
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
    chain: &ChainConfig,
    spec: impl Into<SamplerSpec>,
) -> Result<PosteriorSummary<F>> {
    let mut rng = RngStream::new(chain.seed, 0);
    run_chain_with(&mut rng, data, priors, chain, spec)
}

/// Runs one chain on a caller-supplied stream.
pub fn run_chain_with<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    data: &PanelDataset<F>,
    priors: &PriorConfig<F>,
    chain: &ChainConfig,
    spec: impl Into<SamplerSpec>,
) -> Result<PosteriorSummary<F>> {
    let spec = spec.into();
    chain.validate()?;
    priors.validate()?;
    spec.check_data(data)?;
    let mut state = ChainState::initial(data, &spec, priors)?;
    let mut iterations = Vec::with_capacity(chain.retained());
    let mut draws = Vec::with_capacity(chain.retained());
    for it in 0..chain.iterations {
        gibbs_cycle(rng, &mut state, data, priors, &spec)?;
        if it >= chain.burn_in && (it - chain.burn_in) % chain.thin == 0 {
            iterations.push(it);
            draws.push(record(&state, &spec));
        }
    }
    Ok(PosteriorSummary::from_draws(
        monitored_names(data, &spec),
        iterations,
        draws,
    ))
}
