//! Experiment drivers behind the command-line tool: the simulation grid,
//! growth-data fits, the posterior-limit study and the urn demo.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::baselines::{mle_normal_normal_default, ols_fit};
use crate::bvm::{centering_delta, centering_delta_random_intercept, gaussianity_report, BvMReport, TrueErrorModel};
use crate::error::{Error, Result};
use crate::models::{
    simulate_dataset, CovariateLaw, ErrorModel, GenerativeConfig, GrowthModel, ModelKind, PanelDataset,
    RandomEffects,
};
use crate::rngdist::{ErrorSpec, RngStream};
use crate::sampler::{
    fmt_num, run_chain_with, ChainConfig, ParamSummary, PosteriorSummary, PriorConfig, SamplerSpec, Variant,
};
use crate::sdp::{
    predictive_weights, stick_breaking_sample, NewClusterMode, SdpPrior, SymmetricMixingMeasure,
    DEFAULT_TRUNCATION_EPS,
};

/// Stream purposes, mixed into the seed so data and each method draw from
/// unrelated streams for the same replication index.
const PURPOSE_DATA: u64 = 1;
const PURPOSE_METHOD: u64 = 16;
const PURPOSE_CENTERING: u64 = 2;
const PURPOSE_DEMO: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    F1,
    F2,
    B1,
    B2,
    B3,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::F1, Method::F2, Method::B1, Method::B2, Method::B3];

    fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F1" => Ok(Method::F1),
            "F2" => Ok(Method::F2),
            "B1" => Ok(Method::B1),
            "B2" => Ok(Method::B2),
            "B3" => Ok(Method::B3),
            other => Err(Error::Config(format!("unknown method {other:?}; expected F1,F2,B1,B2,B3"))),
        }
    }
}

/// Parses a comma list such as `F1,B3`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::Config("method list is empty".into()));
    }
    Ok(methods)
}

fn error_spec_from_json<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ErrorSpec<f64>, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    let parsed = match &v {
        serde_json::Value::String(s) => ErrorSpec::from_token(s),
        other => ErrorSpec::parse(&other.to_string()),
    };
    parsed.map_err(serde::de::Error::custom)
}

/// One cell of the simulation grid. Every field has a default, so a JSON
/// config only needs the fields it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label written to the `experiment` column; the error token if empty.
    pub experiment: String,
    #[serde(deserialize_with = "error_spec_from_json")]
    pub error: ErrorSpec<f64>,
    pub reps: usize,
    pub groups: usize,
    pub group_size: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub chain: ChainConfig,
    pub priors: PriorConfig<f64>,
    pub beta: Vec<f64>,
    pub random_effect_sd: f64,
    pub new_cluster_mode: NewClusterMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: String::new(),
            error: ErrorSpec::StandardNormal,
            reps: 300,
            groups: 20,
            group_size: 5,
            methods: Method::ALL.to_vec(),
            seed: 1,
            chain: ChainConfig::default(),
            priors: PriorConfig::default(),
            beta: vec![-1.0, 1.0],
            random_effect_sd: 1.0,
            new_cluster_mode: NewClusterMode::Integrated,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        self.error.validate()?;
        self.chain.validate()?;
        self.priors.validate()?;
        self.generative().validate()
    }

    pub fn generative(&self) -> GenerativeConfig<f64> {
        GenerativeConfig {
            beta: self.beta.clone(),
            error: self.error.clone(),
            random_effect_sd: self.random_effect_sd,
            n_groups: self.groups,
            group_size: self.group_size,
            covariates: CovariateLaw::BernoulliHalf,
        }
    }

    /// The experiment label, falling back to the matching `E1`..`E9` token.
    pub fn label(&self) -> String {
        if !self.experiment.is_empty() {
            return self.experiment.clone();
        }
        (1..=9)
            .map(|k| format!("E{k}"))
            .find(|t| ErrorSpec::from_token(t).ok().as_ref() == Some(&self.error))
            .unwrap_or_else(|| "custom".into())
    }
}

/// Squared error of one method on one replication, or why it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub method: Method,
    pub rep: usize,
    pub sqerr: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: String,
    pub method: Method,
    pub mse: f64,
    /// `mse / mse(B3)`; absent when B3 was not run.
    pub rel_eff: Option<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub records: Vec<RepRecord>,
    pub rows: Vec<AggregateRow>,
}

impl ResultTable {
    pub fn row(&self, method: Method) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// `experiment,method,rep,sqerr`; failed replications carry an empty
    /// `sqerr`.
    pub fn write_records<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["experiment", "method", "rep", "sqerr"])?;
        for r in &self.records {
            w.write_record([
                self.experiment.clone(),
                r.method.to_string(),
                r.rep.to_string(),
                r.sqerr.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `experiment,method,mse,rel_eff,n_ok,n_failed`.
    pub fn write_aggregate<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["experiment", "method", "mse", "rel_eff", "n_ok", "n_failed"])?;
        for r in &self.rows {
            w.write_record([
                r.experiment.clone(),
                r.method.to_string(),
                r.mse.to_string(),
                r.rel_eff.map(|v| v.to_string()).unwrap_or_default(),
                r.n_ok.to_string(),
                r.n_failed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn estimate(method: Method, data: &PanelDataset<f64>, cfg: &ExperimentConfig, rep: usize) -> Result<Vec<f64>> {
    match method {
        Method::F1 => Ok(ols_fit(data)?.beta),
        Method::F2 => Ok(mle_normal_normal_default(data)?.beta),
        Method::B1 | Method::B2 | Method::B3 => {
            let variant = match method {
                Method::B1 => Variant::B1,
                Method::B2 => Variant::B2,
                _ => Variant::B3,
            };
            let spec = SamplerSpec {
                new_cluster_mode: cfg.new_cluster_mode,
                ..SamplerSpec::from(variant)
            };
            let mut rng = RngStream::derived(cfg.seed, PURPOSE_METHOD + method.index(), rep as u64);
            Ok(run_chain_with(&mut rng, data, &cfg.priors, &cfg.chain, spec)?.beta_mean())
        }
    }
}

fn run_rep(cfg: &ExperimentConfig, rep: usize) -> Vec<RepRecord> {
    let mut rng = RngStream::derived(cfg.seed, PURPOSE_DATA, rep as u64);
    let data = simulate_dataset(&mut rng, &cfg.generative());
    cfg.methods
        .iter()
        .map(|&method| {
            let outcome = data.as_ref().map_err(|e| e.to_string()).and_then(|d| {
                let b = estimate(method, d, cfg, rep).map_err(|e| e.to_string())?;
                let se: f64 = b.iter().zip(&cfg.beta).map(|(x, t)| (x - t) * (x - t)).sum();
                if se.is_finite() {
                    Ok(se)
                } else {
                    Err("non-finite estimate".to_string())
                }
            });
            RepRecord {
                method,
                rep,
                sqerr: outcome.as_ref().ok().copied(),
                failure: outcome.err(),
            }
        })
        .collect()
}

/// Runs every requested method on `reps` simulated datasets in parallel.
/// Results do not depend on the number of worker threads.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let records: Vec<RepRecord> = (0..cfg.reps)
        .into_par_iter()
        .flat_map_iter(|rep| run_rep(cfg, rep))
        .collect();
    let experiment = cfg.label();
    let mut rows: Vec<AggregateRow> = cfg
        .methods
        .iter()
        .map(|&method| {
            let mine: Vec<&RepRecord> = records.iter().filter(|r| r.method == method).collect();
            let ok: Vec<f64> = mine.iter().filter_map(|r| r.sqerr).collect();
            AggregateRow {
                experiment: experiment.clone(),
                method,
                mse: if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().sum::<f64>() / ok.len() as f64
                },
                rel_eff: None,
                n_ok: ok.len(),
                n_failed: mine.len() - ok.len(),
            }
        })
        .collect();
    if let Some(b3) = rows.iter().find(|r| r.method == Method::B3).map(|r| r.mse) {
        for r in &mut rows {
            r.rel_eff = Some(if r.method == Method::B3 { 1.0 } else { r.mse / b3 });
        }
    }
    Ok(ResultTable {
        experiment,
        records,
        rows,
    })
}

/// Posterior of a growth-curve submodel.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub model: GrowthModel,
    pub summary: PosteriorSummary<f64>,
    /// Regression coefficients, `sigma`, and the random-effect sds present
    /// in the model.
    pub rows: Vec<ParamSummary<f64>>,
}

impl FitOutput {
    pub fn row(&self, name: &str) -> Option<&ParamSummary<f64>> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// `parameter,mean,sd,median,q025,q975`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_param_rows(&self.rows, out)
    }
}

pub fn write_param_rows<W: Write>(rows: &[ParamSummary<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "mean", "sd", "median", "q025", "q975"])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            fmt_num(r.mean),
            fmt_num(r.sd),
            fmt_num(r.median),
            fmt_num(r.q025),
            fmt_num(r.q975),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Chain, priors and sampler mode of a growth fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub chain: ChainConfig,
    pub priors: PriorConfig<f64>,
    pub new_cluster_mode: NewClusterMode,
}

/// Reads a JSON config; absent fields keep their defaults.
pub fn load_config<T: serde::de::DeserializeOwned>(path: impl AsRef<std::path::Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Fits growth submodel `model` to `data`.
pub fn cmd_fit(
    model: GrowthModel,
    data: &PanelDataset<f64>,
    chain: &ChainConfig,
    priors: &PriorConfig<f64>,
    new_cluster_mode: NewClusterMode,
) -> Result<FitOutput> {
    let spec = SamplerSpec {
        new_cluster_mode,
        ..SamplerSpec::from(model.spec())
    };
    let mut rng = RngStream::new(chain.seed, 0);
    let summary = run_chain_with(&mut rng, data, priors, chain, spec)?;
    let keep = |n: &str| n.starts_with("beta_") || matches!(n, "sigma" | "sigma_b1" | "sigma_b2");
    let rows = summary.params.iter().filter(|p| keep(&p.name)).cloned().collect();
    Ok(FitOutput { model, summary, rows })
}

/// Settings of the posterior-limit study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BvmConfig {
    pub kind: ModelKind,
    #[serde(deserialize_with = "error_spec_from_json")]
    pub error: ErrorSpec<f64>,
    /// Observations (location, regression) or groups (random intercept).
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub chain: ChainConfig,
    pub priors: PriorConfig<f64>,
    /// Truth; defaults to `(0)` for the location model and `(−1, 1)` otherwise.
    pub beta: Option<Vec<f64>>,
    pub group_size: usize,
    pub random_effect_sd: f64,
    pub new_cluster_mode: NewClusterMode,
    pub hermite_nodes: usize,
    /// Simulated groups for the random-intercept `V_η` estimate.
    pub mc_draws: usize,
}

impl Default for BvmConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Location,
            error: ErrorSpec::from_token("E8").expect("E8 is a known token"),
            n: 500,
            reps: 20,
            seed: 1,
            chain: ChainConfig {
                iterations: 3000,
                burn_in: 500,
                thin: 1,
                seed: 0,
            },
            priors: PriorConfig::default(),
            beta: None,
            group_size: 5,
            random_effect_sd: 1.0,
            new_cluster_mode: NewClusterMode::Integrated,
            hermite_nodes: 64,
            mc_draws: 20_000,
        }
    }
}

impl BvmConfig {
    pub fn truth(&self) -> Vec<f64> {
        match (&self.beta, self.kind) {
            (Some(b), _) => b.clone(),
            (None, ModelKind::Location) => vec![0.0],
            (None, _) => vec![-1.0, 1.0],
        }
    }

    fn generative(&self) -> GenerativeConfig<f64> {
        let (n_groups, group_size, sd, covariates) = match self.kind {
            ModelKind::Location => (self.n, 1, 0.0, CovariateLaw::Intercept),
            ModelKind::FixedEffects => (self.n, 1, 0.0, CovariateLaw::BernoulliHalf),
            ModelKind::RandomIntercept => {
                (self.n, self.group_size, self.random_effect_sd, CovariateLaw::BernoulliHalf)
            }
        };
        GenerativeConfig {
            beta: self.truth(),
            error: self.error.clone(),
            random_effect_sd: sd,
            n_groups,
            group_size,
            covariates,
        }
    }
}

/// One replication of the posterior-limit study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvmRow {
    pub n: usize,
    pub rep: usize,
    pub report: BvMReport,
}

pub fn write_bvm_rows<W: Write>(rows: &[BvmRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BvMReport::CSV_HEADER)?;
    for r in rows {
        w.write_record(r.report.csv_row(r.n, r.rep))?;
    }
    w.flush()?;
    Ok(())
}

fn bvm_rep(cfg: &BvmConfig, truth_model: &TrueErrorModel<f64>, rep: usize) -> Result<BvmRow> {
    let beta0 = cfg.truth();
    let mut rng = RngStream::derived(cfg.seed, PURPOSE_DATA, rep as u64);
    let data = simulate_dataset(&mut rng, &cfg.generative())?;
    let spec = SamplerSpec {
        new_cluster_mode: cfg.new_cluster_mode,
        ..SamplerSpec::from(cfg.kind.with_errors(ErrorModel::SdpMixture))
    };
    let mut chain_rng = RngStream::derived(cfg.seed, PURPOSE_METHOD + Method::B3.index(), rep as u64);
    let summary = run_chain_with(&mut chain_rng, &data, &cfg.priors, &cfg.chain, spec)?;
    let p = data.p();
    let draws: Vec<Vec<f64>> = summary.draws.iter().map(|r| r[..p].to_vec()).collect();
    let centering = if cfg.kind.random_effects() == RandomEffects::None {
        centering_delta(truth_model, &data, &beta0)?
    } else {
        let mut crng = RngStream::derived(cfg.seed, PURPOSE_CENTERING, rep as u64);
        centering_delta_random_intercept(
            &mut crng,
            truth_model,
            cfg.random_effect_sd,
            &data,
            &beta0,
            cfg.hermite_nodes,
            cfg.mc_draws,
        )?
    };
    Ok(BvmRow {
        n: cfg.n,
        rep,
        report: gaussianity_report(&draws, &beta0, &centering)?,
    })
}

/// Simulates, samples and compares with the Gaussian limit for every
/// replication. Only normal-mixture truths are accepted.
pub fn cmd_bvm(cfg: &BvmConfig) -> Result<Vec<BvmRow>> {
    if !cfg.error.is_mixture() {
        return Err(Error::Config(format!(
            "posterior-limit study needs a symmetric normal-mixture truth (E8, E9 or a custom mixture); \
             {:?} lies outside the model class",
            cfg.error
        )));
    }
    cfg.chain.validate()?;
    cfg.priors.validate()?;
    let truth_model = TrueErrorModel::from_spec(&cfg.error)?;
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| bvm_rep(cfg, &truth_model, rep))
        .collect()
}

/// Inputs of the urn demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdpDemoConfig {
    pub concentration: f64,
    pub base_sd: f64,
    /// Number of sequential urn draws when `past` is not given.
    pub draws: usize,
    /// Explicit past draws; overrides `draws`.
    pub past: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for SdpDemoConfig {
    fn default() -> Self {
        Self {
            concentration: 1.0,
            base_sd: 3.0,
            draws: 0,
            past: None,
            seed: 1,
        }
    }
}

/// Predictive rows `(kind, location, weight)` plus a stick-breaking draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpDemo {
    pub past: Vec<f64>,
    pub predictive: Vec<(String, f64, f64)>,
    pub stick: SymmetricMixingMeasure<f64>,
}

impl SdpDemo {
    /// `kind,location,weight`; the base row has an empty location.
    pub fn write_predictive<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "location", "weight"])?;
        for (kind, loc, weight) in &self.predictive {
            let loc = if kind == "base" { String::new() } else { loc.to_string() };
            w.write_record([kind.clone(), loc, weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `atom,location,weight`, then a `remainder` row.
    pub fn write_stick<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["atom", "location", "weight"])?;
        for (k, a) in self.stick.atoms.iter().enumerate() {
            w.write_record([k.to_string(), a.location.to_string(), a.weight.to_string()])?;
        }
        w.write_record(["remainder".to_string(), String::new(), self.stick.remainder_mass.to_string()])?;
        w.flush()?;
        Ok(())
    }
}

pub fn cmd_sdp_demo(cfg: &SdpDemoConfig) -> Result<SdpDemo> {
    let prior = SdpPrior::new(cfg.concentration, cfg.base_sd)?;
    let mut rng = RngStream::derived(cfg.seed, PURPOSE_DEMO, 0);
    let past = match &cfg.past {
        Some(p) => p.clone(),
        None => {
            let mut past = Vec::with_capacity(cfg.draws);
            for _ in 0..cfg.draws {
                let next = predictive_weights(&prior, &past).sample(&mut rng);
                past.push(next);
            }
            past
        }
    };
    let pred = predictive_weights(&prior, &past).canonical();
    let mut predictive = vec![("base".to_string(), 0.0, pred.base_mass)];
    predictive.extend(pred.atoms.iter().map(|(loc, m)| ("atom".to_string(), *loc, *m)));
    let k = prior.default_truncation(DEFAULT_TRUNCATION_EPS);
    let stick = stick_breaking_sample(&mut rng, &prior, k);
    Ok(SdpDemo {
        past,
        predictive,
        stick,
    })
}
