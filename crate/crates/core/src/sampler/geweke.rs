//! Joint-distribution ("getting it right") test of the Gibbs transition.
//!
//! The marginal-conditional simulator draws parameters from the prior and
//! data given parameters. The successive-conditional simulator alternates one
//! Gibbs cycle with a fresh data draw. Both target the same joint law, so
//! monitored moments must agree up to Monte Carlo error.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{gibbs_cycle, ChainState, PriorConfig, SamplerSpec};
use crate::error::{Error, Result};
use crate::models::{PanelDataset, RandomEffects};
use crate::rngdist::normal;
use crate::scalar::{from_usize, to_f64, Real};
use crate::sdp::ClassAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GewekeConfig {
    /// Samples per simulator.
    pub samples: usize,
    /// Gibbs cycles between recorded successive-conditional samples.
    pub cycles_per_sample: usize,
    /// Batches for the batch-means standard error of the dependent chain.
    pub batches: usize,
}

impl Default for GewekeConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            cycles_per_sample: 1,
            batches: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeStat {
    pub name: String,
    pub marginal_mean: f64,
    pub successive_mean: f64,
    pub z: f64,
}

/// Draws latent state and data from the prior on the design of `design`
/// (responses ignored).
pub fn prior_draw<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    design: &PanelDataset<F>,
    priors: &PriorConfig<F>,
    spec: &SamplerSpec,
) -> Result<(ChainState<F>, PanelDataset<F>)> {
    let sd0 = priors.beta_var.sqrt();
    let beta: Vec<F> = (0..design.p()).map(|_| normal(rng, F::zero(), sd0)).collect();
    let sigma2 = priors.sigma2.sample(rng);
    let n = design.n_groups();
    let effects = spec.model.random_effects;
    let (sigma_b2, b) = if effects == RandomEffects::None {
        (F::zero(), vec![F::zero(); n])
    } else {
        let v = priors.sigma_b2.sample(rng);
        (v, (0..n).map(|_| normal(rng, F::zero(), v.sqrt())).collect())
    };
    let (sigma_b2_slope, b_slope) = if effects == RandomEffects::InterceptSlope {
        let v = priors.sigma_b2.sample(rng);
        (v, (0..n).map(|_| normal(rng, F::zero(), v.sqrt())).collect())
    } else {
        (F::zero(), vec![F::zero(); n])
    };
    let assign = if spec.has_mixture() && !spec.freeze_latents {
        Some(crp_draw(rng, design.n_obs(), priors))
    } else if spec.has_mixture() {
        Some(ClassAssignment::single_class(design.n_obs()))
    } else {
        None
    };
    let state = ChainState {
        beta,
        sigma2,
        b,
        sigma_b2,
        b_slope,
        sigma_b2_slope,
        assign,
    };
    let data = draw_responses(rng, &state, design)?;
    Ok((state, data))
}

/// Sequential urn draw of labels, fair signs and `N(0, τ₁²)` locations.
fn crp_draw<F: Real, R: RngCore + ?Sized>(rng: &mut R, n_obs: usize, priors: &PriorConfig<F>) -> ClassAssignment<F> {
    let alpha = to_f64(priors.sdp.concentration);
    let mut labels = Vec::with_capacity(n_obs);
    let mut signs = Vec::with_capacity(n_obs);
    let mut locations: Vec<F> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for k in 0..n_obs {
        let u = f64::draw_open01(rng) * (alpha + k as f64);
        let mut acc = 0.0;
        let mut label = counts.len();
        for (c, &nc) in counts.iter().enumerate() {
            acc += nc as f64;
            if u < acc {
                label = c;
                break;
            }
        }
        if label == counts.len() {
            locations.push(normal(rng, F::zero(), priors.sdp.base_sd));
            counts.push(0);
        }
        counts[label] += 1;
        labels.push(label);
        signs.push(if f64::draw_open01(rng) < 0.5 { 1 } else { -1 });
    }
    ClassAssignment::from_parts(labels, signs, locations).expect("urn draw is consistent")
}

/// `Y_ij ~ N(βᵀX_ij + b_i + b_slope_i·t_ij + z_ij, σ²)`.
pub fn draw_responses<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    state: &ChainState<F>,
    design: &PanelDataset<F>,
) -> Result<PanelDataset<F>> {
    let p = design.p();
    let sd = state.sigma2.sqrt();
    let mut y = Vec::with_capacity(design.n_obs());
    for (i, g) in design.groups().iter().enumerate() {
        let o = design.offset(i);
        for j in 0..g.len() {
            let mean = super::dot(g.row(j, p), &state.beta) + state.effect(design, i, j) + state.latent(o + j);
            y.push(normal(rng, mean, sd));
        }
    }
    design.with_responses(&y)
}

fn monitored<F: Real>(state: &ChainState<F>, spec: &SamplerSpec) -> Vec<f64> {
    let mut v = Vec::new();
    for b in &state.beta {
        v.push(to_f64(*b));
        v.push(to_f64(*b * *b));
    }
    v.push(to_f64(state.sigma2));
    if spec.model.random_effects != RandomEffects::None {
        v.push(to_f64(state.sigma_b2));
    }
    v
}

fn monitored_names(p: usize, spec: &SamplerSpec) -> Vec<String> {
    let mut v = Vec::new();
    for k in 1..=p {
        v.push(format!("beta_{k}"));
        v.push(format!("beta_{k}^2"));
    }
    v.push("sigma2".into());
    if spec.model.random_effects != RandomEffects::None {
        v.push("sigma_b2".into());
    }
    v
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Variance of the mean of a dependent series by non-overlapping batch means.
fn batch_means_var(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let (_, v) = mean_var(&means);
    v / batches as f64
}

/// Runs both simulators and returns one z-score per monitored moment.
pub fn geweke_test<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    design: &PanelDataset<F>,
    priors: &PriorConfig<F>,
    spec: &SamplerSpec,
    cfg: &GewekeConfig,
) -> Result<Vec<GewekeStat>> {
    priors.validate()?;
    if cfg.samples < 2 * cfg.batches || cfg.batches < 2 || cfg.cycles_per_sample == 0 {
        return Err(Error::Config(format!(
            "geweke test needs samples ≥ 2·batches and batches ≥ 2, got {cfg:?}"
        )));
    }
    spec.check_data(design)?;
    let names = monitored_names(design.p(), spec);
    let k = names.len();

    let mut marginal = vec![Vec::with_capacity(cfg.samples); k];
    for _ in 0..cfg.samples {
        let (state, _) = prior_draw(rng, design, priors, spec)?;
        for (col, v) in marginal.iter_mut().zip(monitored(&state, spec)) {
            col.push(v);
        }
    }

    let mut successive = vec![Vec::with_capacity(cfg.samples); k];
    let (mut state, mut data) = prior_draw(rng, design, priors, spec)?;
    for _ in 0..cfg.samples {
        for _ in 0..cfg.cycles_per_sample {
            gibbs_cycle(rng, &mut state, &data, priors, spec)?;
            data = draw_responses(rng, &state, design)?;
        }
        for (col, v) in successive.iter_mut().zip(monitored(&state, spec)) {
            col.push(v);
        }
    }

    let n = from_usize::<f64>(cfg.samples);
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let (m1, v1) = mean_var(&marginal[c]);
            let (m2, _) = mean_var(&successive[c]);
            let se2 = batch_means_var(&successive[c], cfg.batches);
            GewekeStat {
                name,
                marginal_mean: m1,
                successive_mean: m2,
                z: (m1 - m2) / (v1 / n + se2).sqrt(),
            }
        })
        .collect())
}
