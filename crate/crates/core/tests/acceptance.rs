//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line to
//! stderr (bypassing output capture) before asserting.

use std::io::Write;

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use symmix::baselines::{mle_normal_normal, mle_normal_normal_traced, ols_fit};
use symmix::bvm::{fisher_info, score, TrueErrorModel};
use symmix::harness::{cmd_bvm, cmd_fit, cmd_simulate, BvmConfig, ExperimentConfig, Method};
use symmix::models::{load_growth_csv, simulate_dataset, CovariateLaw, GenerativeConfig, GrowthModel, Group, PanelDataset};
use symmix::sampler::geweke::{geweke_test, GewekeConfig};
use symmix::sampler::{ChainConfig, PriorConfig, SamplerSpec, Variant};
use symmix::sdp::{predictive_weights, sdp_posterior, stick_breaking_from, DEFAULT_TRUNCATION_EPS};
use symmix::{ErrorSpec, InverseGammaParams, NewClusterMode, RngStream, SdpPrior};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("[acceptance {id}] {verdict} {name}: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn criterion_1_geweke_joint_distribution() {
    let groups = (0..4)
        .map(|i| Group {
            y: vec![0.0; 3],
            x: vec![0.5 + 0.1 * i as f64, 1.0, -0.7],
            slope: None,
        })
        .collect();
    let design = PanelDataset::new(groups, 1).unwrap();
    let priors = PriorConfig {
        beta_var: 1.0,
        sigma2: InverseGammaParams::new(6.0, 5.0).unwrap(),
        sigma_b2: InverseGammaParams::new(6.0, 5.0).unwrap(),
        sdp: SdpPrior::new(1.0, 1.0).unwrap(),
    };
    let spec = SamplerSpec::from(Variant::B3);
    let mut rng = RngStream::new(2024, 0);
    let stats = geweke_test(&mut rng, &design, &priors, &spec, &GewekeConfig::default()).unwrap();
    let worst = stats.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
    let detail = stats.iter().map(|s| format!("{}={:+.2}", s.name, s.z)).collect::<Vec<_>>().join(" ");
    report(1, "geweke B3 |z| < 4", worst < 4.0, &detail);
}

/// Category of a draw: the index of a matching past atom `±θ_i`, or one of
/// 20 equal-probability bins of the base law.
fn category(x: f64, atoms: &[f64], base: &Normal) -> usize {
    match atoms.iter().position(|a| *a == x) {
        Some(k) => 20 + k,
        None => ((base.cdf(x) * 20.0) as usize).min(19),
    }
}

#[test]
fn criterion_2_stick_breaking_matches_urn() {
    let tau = 3.0;
    let draws = 100_000;
    let base = Normal::new(0.0, tau).unwrap();
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    let mut rng = RngStream::new(7, 0);
    for alpha in [0.5, 1.0, 4.0] {
        for n in [0usize, 1, 5] {
            let prior = SdpPrior::new(alpha, tau).unwrap();
            let past: Vec<f64> = (0..n).map(|k| 0.8 * (k as f64 + 1.0) * if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let mut atoms: Vec<f64> = past.iter().flat_map(|t| [*t, -*t]).collect();
            atoms.dedup();
            let cats = 20 + atoms.len();

            // Exact predictive probabilities per category.
            let pred = predictive_weights(&prior, &past);
            let mut exact = vec![pred.base_mass / 20.0; 20];
            exact.resize(cats, 0.0);
            for (loc, m) in &pred.atoms {
                exact[category(*loc, &atoms, &base)] += m;
            }

            let post = sdp_posterior(&prior, &past);
            let k = SdpPrior::new(post.concentration, tau).unwrap().default_truncation(DEFAULT_TRUNCATION_EPS);
            let mut counts = vec![0usize; cats];
            for _ in 0..draws {
                let g = stick_breaking_from(&mut rng, &post, k);
                let x = g.sample_location(&mut rng, &post.base);
                counts[category(x, &atoms, &base)] += 1;
            }
            let tv = exact
                .iter()
                .zip(&counts)
                .map(|(p, c)| (p - *c as f64 / draws as f64).abs())
                .sum::<f64>()
                / 2.0;
            worst = worst.max(tv);
            detail.push(format!("α={alpha},n={n}:{tv:.4}"));
        }
    }
    report(2, "stick-breaking vs urn TV < 0.02", worst < 0.02, &detail.join(" "));
}

fn efficiency_run(token: &str) -> (f64, f64, f64) {
    let cfg = ExperimentConfig {
        error: ErrorSpec::from_token(token).unwrap(),
        reps: 100,
        groups: 20,
        group_size: 5,
        methods: vec![Method::F1, Method::B1, Method::B3],
        ..ExperimentConfig::default()
    };
    let t = cmd_simulate(&cfg).unwrap();
    let mse = |m| t.row(m).unwrap().mse;
    (mse(Method::F1), mse(Method::B1), mse(Method::B3))
}

#[test]
fn criterion_3_efficiency_orderings() {
    let (f1, _, b3) = efficiency_run("E2");
    let a = f1 / b3;
    let (_, b1_8, b3_8) = efficiency_run("E8");
    let (f1_6, _, b3_6) = efficiency_run("E6");
    let c = f1_6 / b3_6;
    let pass = a >= 1.5 && b3_8 < b1_8 && (1.1..=2.0).contains(&c);
    let detail = format!(
        "E2 rel_eff(F1)={a:.3} (≥1.5); E8 mse B3={b3_8:.4} vs B1={b1_8:.4}; E6 rel_eff(F1)={c:.3} (in [1.1, 2.0])"
    );
    report(3, "efficiency orderings", pass, &detail);
}

#[test]
fn criterion_4_posterior_gaussian_limit() {
    let cfg = BvmConfig::default();
    assert!(cfg.chain.retained() >= 2000);
    let rows = cmd_bvm(&cfg).unwrap();
    assert_eq!(rows.len(), 20);
    let gap = median(rows.iter().map(|r| r.report.mean_gap).collect());
    let lo = median(rows.iter().map(|r| r.report.min_eig()).collect());
    let hi = median(rows.iter().map(|r| r.report.max_eig()).collect());
    let ks = median(rows.iter().map(|r| r.report.max_ks()).collect());
    let pass = gap < 0.5 && lo >= 0.7 && hi <= 1.3 && ks < 0.08;
    let detail = format!("median gap={gap:.3} (<0.5), eig=[{lo:.3}, {hi:.3}] (⊂[0.7,1.3]), ks={ks:.4} (<0.08)");
    report(4, "gaussian posterior limit", pass, &detail);
}

fn simpson<G: Fn(f64) -> f64>(f: G, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn criterion_5_numerical_oracles() {
    let model: TrueErrorModel<f64> = TrueErrorModel::from_spec(&ErrorSpec::from_token("E8").unwrap()).unwrap();
    let info = fisher_info(&model).unwrap();
    let mut rng = RngStream::new(5, 0);
    let n = 10_000_000usize;
    let (mut s, mut ss) = (0.0_f64, 0.0_f64);
    for _ in 0..n {
        let v = score(&model, model.sample(&mut rng));
        s += v * v;
        ss += v * v * v * v;
    }
    let mc = s / n as f64;
    let se = ((ss / n as f64 - mc * mc) / n as f64).sqrt();
    let info_ok = (info - mc).abs() < 3.0 * se;

    let h = 1e-5;
    let fd_err = (0..100)
        .map(|i| {
            let x = -8.0 + 16.0 * i as f64 / 99.0;
            let fd = -(model.ln_density(x + h) - model.ln_density(x - h)) / (2.0 * h);
            (score(&model, x) - fd).abs()
        })
        .fold(0.0, f64::max);

    let mut worst_mass: f64 = 0.0;
    for k in 1..=9 {
        let spec = ErrorSpec::<f64>::from_token(&format!("E{k}")).unwrap();
        let mass = match &spec {
            ErrorSpec::Uniform { lo, hi } => simpson(|x| spec.density(x), *lo, *hi, 1000),
            ErrorSpec::StudentT { df } => {
                let l = 100.0;
                simpson(|x| spec.density(x), -l, l, 200_000) + 2.0 * (1.0 - StudentsT::new(0.0, 1.0, *df).unwrap().cdf(l))
            }
            _ => simpson(|x| spec.density(x), -20.0, 20.0, 20_000),
        };
        worst_mass = worst_mass.max((mass - 1.0).abs());
    }
    let pass = info_ok && fd_err < 1e-6 && worst_mass < 1e-3;
    let detail = format!(
        "I(E8)={info:.5} vs MC {mc:.5}±{se:.5}; max |score − fd|={fd_err:.2e}; max |∫p − 1|={worst_mass:.2e}"
    );
    report(5, "numerical oracles", pass, &detail);
}

#[test]
fn criterion_6_baselines() {
    let mut rng = RngStream::new(6, 0);
    let gen = |error: &str, sd_b: f64, covariates: CovariateLaw<f64>, beta: Vec<f64>, n: usize, m: usize| GenerativeConfig {
        beta,
        error: ErrorSpec::from_token(error).unwrap(),
        random_effect_sd: sd_b,
        n_groups: n,
        group_size: m,
        covariates,
    };

    let design = simulate_dataset(&mut rng, &gen("E6", 0.0, CovariateLaw::BernoulliHalf, vec![0.0; 3], 40, 3)).unwrap();
    let truth = [2.0, -0.5, 1.25];
    let y: Vec<f64> = design
        .groups()
        .iter()
        .flat_map(|g| (0..g.len()).map(|j| g.row(j, 3).iter().zip(&truth).map(|(x, b)| x * b).sum::<f64>()))
        .collect();
    let fit = ols_fit(&design.with_responses(&y).unwrap()).unwrap();
    let ols_err = fit.beta.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut monotone = true;
    for k in 0..50 {
        let error = ["E2", "E6", "E8", "E3", "E7"][k % 5];
        let data = simulate_dataset(&mut rng, &gen(error, 1.0, CovariateLaw::BernoulliHalf, vec![-1.0, 1.0], 20, 5)).unwrap();
        let (_, trace) = mle_normal_normal_traced(&data, 1e-8, 500).unwrap();
        monotone &= trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
    }

    // Balanced one-way layout: σ̂² = SSW/(n(m−1)), σ̂_b² = (SSB/n − σ̂²)/m.
    let mut closed_err: f64 = 0.0;
    let mut interior = 0;
    while interior < 10 {
        let (n, m) = (12usize, 4usize);
        let data = simulate_dataset(&mut rng, &gen("E6", 1.0, CovariateLaw::Intercept, vec![3.0], n, m)).unwrap();
        let means: Vec<f64> = data.groups().iter().map(|g| g.y.iter().sum::<f64>() / m as f64).collect();
        let grand = means.iter().sum::<f64>() / n as f64;
        let ssw: f64 = data
            .groups()
            .iter()
            .zip(&means)
            .map(|(g, mu)| g.y.iter().map(|y| (y - mu).powi(2)).sum::<f64>())
            .sum();
        let ssb: f64 = means.iter().map(|mu| m as f64 * (mu - grand).powi(2)).sum();
        let s2 = ssw / (n * (m - 1)) as f64;
        let sb2 = (ssb / n as f64 - s2) / m as f64;
        if sb2 <= 0.0 {
            continue;
        }
        interior += 1;
        let fit = mle_normal_normal(&data, 1e-12, 50_000).unwrap();
        closed_err = closed_err
            .max((fit.beta[0] - grand).abs())
            .max((fit.sigma2 - s2).abs())
            .max((fit.sigma_b2 - sb2).abs());
    }
    let pass = ols_err < 1e-10 && monotone && closed_err < 1e-6;
    let detail = format!("OLS error={ols_err:.2e}; EM monotone on 50 datasets={monotone}; closed-form error={closed_err:.2e}");
    report(6, "baseline sanity", pass, &detail);
}

#[test]
fn criterion_7_growth_data() {
    let data = load_growth_csv::<f64>(concat!(env!("CARGO_MANIFEST_DIR"), "/data/orthodont.csv")).unwrap();
    let rows = data.n_obs();
    let out = cmd_fit(
        GrowthModel::M5,
        &data,
        &ChainConfig::default(),
        &PriorConfig::default(),
        NewClusterMode::Integrated,
    )
    .unwrap();
    let b2 = out.row("beta_2").unwrap().mean;
    let sb2 = out.row("sigma_b2").unwrap().mean;
    let pass = rows == 108 && (0.5..=1.0).contains(&b2) && (0.1..=0.6).contains(&sb2);
    let detail = format!("rows={rows}; M5 beta_2={b2:.3} (in [0.5, 1.0]); sigma_b2={sb2:.3} (in [0.1, 0.6])");
    report(7, "growth data pipeline", pass, &detail);
}
