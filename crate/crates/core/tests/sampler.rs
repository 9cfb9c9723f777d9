use symmix::models::{simulate_dataset, CovariateLaw, GenerativeConfig, Group, PanelDataset};
use symmix::sampler::geweke::{geweke_test, GewekeConfig};
use symmix::sampler::{
    gibbs_cycle, residuals, run_chain, sigma2_conditional, ChainConfig, ChainState, PosteriorSummary, PriorConfig,
    SamplerSpec, Variant,
};
use symmix::{ErrorSpec, InverseGammaParams, RngStream, SdpPrior};

fn dataset(error: &str, seed: u64, n: usize, m: usize) -> PanelDataset<f64> {
    let cfg = GenerativeConfig {
        beta: vec![-1.0, 1.0],
        error: ErrorSpec::from_token(error).unwrap(),
        random_effect_sd: 1.0,
        n_groups: n,
        group_size: m,
        covariates: CovariateLaw::BernoulliHalf,
    };
    simulate_dataset(&mut RngStream::new(seed, 0), &cfg).unwrap()
}

fn chain(iterations: usize, burn_in: usize, seed: u64) -> ChainConfig {
    ChainConfig {
        iterations,
        burn_in,
        thin: 1,
        seed,
    }
}

/// Mean and batch-means standard error of a monitored column.
fn mean_se(s: &PosteriorSummary<f64>, name: &str) -> (f64, f64) {
    let xs = s.column(name).unwrap();
    let n = xs.len();
    let m = xs.iter().sum::<f64>() / n as f64;
    let b = 40;
    let size = n / b;
    let means: Vec<f64> = (0..b).map(|k| xs[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let v = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
    (m, (v / b as f64).sqrt())
}

#[test]
fn normal_model_recovers_near_noiseless_truth() {
    let base = dataset("E6", 1, 20, 5);
    let mut rng = RngStream::new(1, 1);
    let y: Vec<f64> = base
        .groups()
        .iter()
        .flat_map(|g| (0..g.len()).map(|j| -g.row(j, 2)[0] + g.row(j, 2)[1]).collect::<Vec<_>>())
        .map(|mu| mu + 0.01 * symmix::rngdist::normal(&mut rng, 0.0, 1.0))
        .collect();
    let data = base.with_responses(&y).unwrap();
    let s = run_chain(&data, &PriorConfig::default(), &chain(3000, 500, 2), Variant::B1).unwrap();
    let b = s.beta_mean();
    assert!((b[0] + 1.0).abs() < 0.05 && (b[1] - 1.0).abs() < 0.05, "{b:?}");
}

#[test]
fn chains_are_reproducible() {
    let data = dataset("E8", 2, 10, 4);
    let a = run_chain(&data, &PriorConfig::default(), &chain(300, 50, 9), Variant::B3).unwrap();
    let b = run_chain(&data, &PriorConfig::default(), &chain(300, 50, 9), Variant::B3).unwrap();
    assert_eq!(a.draws, b.draws);
    let c = run_chain(&data, &PriorConfig::default(), &chain(300, 50, 10), Variant::B3).unwrap();
    assert_ne!(a.draws, c.draws);
}

#[test]
fn frozen_mixture_reduces_to_normal_errors() {
    let data = dataset("E6", 3, 20, 5);
    let priors = PriorConfig::default();
    let b2 = run_chain(&data, &priors, &chain(20_000, 1000, 1), Variant::B2).unwrap();
    let frozen = SamplerSpec {
        freeze_latents: true,
        ..Variant::B3.into()
    };
    let b3 = run_chain(&data, &priors, &chain(20_000, 1000, 2), frozen).unwrap();
    for name in ["beta_1", "beta_2", "sigma2", "var_b1"] {
        let (m1, s1) = mean_se(&b2, name);
        let (m2, s2) = mean_se(&b3, name);
        let z = (m1 - m2) / (s1 * s1 + s2 * s2).sqrt();
        assert!(z.abs() < 3.0, "{name}: {m1} vs {m2} (z = {z})");
    }
}

#[test]
fn negating_responses_negates_coefficients() {
    let data = dataset("E8", 4, 20, 5);
    let neg = data.with_responses(&data.responses().iter().map(|y| -y).collect::<Vec<_>>()).unwrap();
    let priors = PriorConfig::default();
    let a = run_chain(&data, &priors, &chain(12_000, 1000, 1), Variant::B3).unwrap();
    let b = run_chain(&neg, &priors, &chain(12_000, 1000, 2), Variant::B3).unwrap();
    for name in ["beta_1", "beta_2"] {
        let (m1, s1) = mean_se(&a, name);
        let (m2, s2) = mean_se(&b, name);
        let z = (m1 + m2) / (s1 * s1 + s2 * s2).sqrt();
        assert!(z.abs() < 3.0, "{name}: {m1} vs {m2} (z = {z})");
    }
}

#[test]
fn group_order_does_not_matter() {
    let data = dataset("E2", 5, 20, 5);
    let mut groups: Vec<Group<f64>> = data.groups().to_vec();
    groups.reverse();
    groups.swap(0, 7);
    let perm = PanelDataset::new(groups, 2).unwrap();
    let priors = PriorConfig::default();
    let a = run_chain(&data, &priors, &chain(12_000, 1000, 3), Variant::B3).unwrap();
    let b = run_chain(&perm, &priors, &chain(12_000, 1000, 3), Variant::B3).unwrap();
    for name in ["beta_1", "beta_2", "var_b1"] {
        let (m1, s1) = mean_se(&a, name);
        let (m2, s2) = mean_se(&b, name);
        let z = (m1 - m2) / (s1 * s1 + s2 * s2).sqrt();
        assert!(z.abs() < 3.0, "{name}: {m1} vs {m2} (z = {z})");
    }
}

#[test]
fn state_stays_valid_over_many_cycles() {
    let data = dataset("E9", 6, 15, 4);
    let priors = PriorConfig::default();
    for spec in [
        SamplerSpec::from(Variant::B3),
        SamplerSpec {
            new_cluster_mode: symmix::NewClusterMode::AuxiliaryDraw,
            ..Variant::B3.into()
        },
    ] {
        let mut state = ChainState::initial(&data, &spec, &priors).unwrap();
        let mut rng = RngStream::new(7, 0);
        for _ in 0..1000 {
            gibbs_cycle(&mut rng, &mut state, &data, &priors, &spec).unwrap();
            let a = state.assign.as_ref().unwrap();
            a.assert_invariants();
            assert!(state.sigma2 > 0.0 && state.sigma2.is_finite());
            assert!(state.sigma_b2 > 0.0 && state.sigma_b2.is_finite());
            assert!(state.beta.iter().all(|b| b.is_finite()));
            assert!(a.signs().iter().all(|s| *s == 1 || *s == -1));
        }
    }
}

#[test]
fn residuals_absorb_coefficient_shifts() {
    let data = dataset("E6", 8, 6, 3);
    let spec = SamplerSpec::from(Variant::B2);
    let state = ChainState::initial(&data, &spec, &PriorConfig::default()).unwrap();
    let e0 = residuals(&state, &data);
    let delta = 0.37;
    let mut shifted = state.clone();
    shifted.beta[0] += delta;
    let y: Vec<f64> = data
        .groups()
        .iter()
        .flat_map(|g| (0..g.len()).map(move |j| g.y[j] + delta * g.row(j, 2)[0]))
        .collect();
    let data2 = data.with_responses(&y).unwrap();
    let e1 = residuals(&shifted, &data2);
    for (a, b) in e0.iter().zip(&e1) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn sigma2_conditional_matches_worked_example() {
    // IG(1, 1) prior, two residuals with Σe² = 2: IG(2, 2).
    let data = PanelDataset::new(
        vec![Group {
            y: vec![1.0, -1.0],
            x: vec![1.0, 1.0],
            slope: None,
        }],
        1,
    )
    .unwrap();
    let spec = SamplerSpec::from(Variant::B1);
    let mut state = ChainState::initial(&data, &spec, &PriorConfig::default()).unwrap();
    state.beta = vec![0.0];
    let ig = sigma2_conditional(&state, &data, &PriorConfig::default());
    assert_eq!((ig.shape, ig.rate), (2.0, 2.0));
}

#[test]
fn inverse_gamma_draws_have_right_mean() {
    let ig = InverseGammaParams::new(3.0, 2.0).unwrap();
    let mut rng = RngStream::new(12, 0);
    let m = (0..100_000).map(|_| ig.sample(&mut rng)).sum::<f64>() / 100_000.0;
    assert!((m - 1.0).abs() < 0.015);
}

fn geweke_design() -> PanelDataset<f64> {
    let groups = (0..4)
        .map(|i| Group {
            y: vec![0.0; 3],
            x: vec![0.5 + 0.1 * i as f64, 1.0, -0.7],
            slope: None,
        })
        .collect();
    PanelDataset::new(groups, 1).unwrap()
}

fn geweke_priors() -> PriorConfig<f64> {
    PriorConfig {
        beta_var: 1.0,
        sigma2: InverseGammaParams::new(6.0, 5.0).unwrap(),
        sigma_b2: InverseGammaParams::new(6.0, 5.0).unwrap(),
        sdp: SdpPrior::new(1.0, 1.0).unwrap(),
    }
}

#[test]
fn geweke_normal_variants() {
    for (k, v) in [Variant::B1, Variant::B2].into_iter().enumerate() {
        let mut rng = RngStream::new(20, k as u64);
        let stats = geweke_test(&mut rng, &geweke_design(), &geweke_priors(), &v.into(), &GewekeConfig::default()).unwrap();
        for s in stats {
            assert!(s.z.abs() < 4.0, "{v:?} {}: z = {}", s.name, s.z);
        }
    }
}

#[test]
fn geweke_auxiliary_new_class() {
    let spec = SamplerSpec {
        new_cluster_mode: symmix::NewClusterMode::AuxiliaryDraw,
        ..Variant::B3.into()
    };
    let mut rng = RngStream::new(21, 0);
    let stats = geweke_test(&mut rng, &geweke_design(), &geweke_priors(), &spec, &GewekeConfig::default()).unwrap();
    for s in stats {
        assert!(s.z.abs() < 4.0, "{}: z = {}", s.name, s.z);
    }
}

#[test]
fn slope_model_needs_slope_covariate() {
    let data = dataset("E6", 9, 5, 3);
    let spec = SamplerSpec::from(symmix::models::GrowthModel::M5.spec());
    let err = run_chain(&data, &PriorConfig::default(), &chain(10, 1, 0), spec).unwrap_err();
    assert_eq!(err.category(), "config");
}
