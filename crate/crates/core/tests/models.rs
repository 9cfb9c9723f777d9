use statrs::distribution::{ContinuousCDF, Normal};
use symmix::baselines::ols_fit;
use symmix::models::{
    loglik_given_latents, read_growth_csv, simulate_dataset, CovariateLaw, GenerativeConfig, Group, PanelDataset,
};
use symmix::{ErrorSpec, RngStream};

fn config(error: &str, beta: Vec<f64>, sd_b: f64, n: usize, m: usize) -> GenerativeConfig<f64> {
    GenerativeConfig {
        beta,
        error: ErrorSpec::from_token(error).unwrap(),
        random_effect_sd: sd_b,
        n_groups: n,
        group_size: m,
        covariates: CovariateLaw::BernoulliHalf,
    }
}

#[test]
fn pure_noise_responses_are_standard_normal() {
    let cfg = config("E6", vec![0.0, 0.0], 0.0, 2000, 5);
    let mut rng = RngStream::new(1, 0);
    let data = simulate_dataset(&mut rng, &cfg).unwrap();
    let mut y = data.responses();
    y.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let law = Normal::new(0.0, 1.0).unwrap();
    let n = y.len() as f64;
    let d = y
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = law.cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 0.02, "ks {d}");
}

#[test]
fn zero_covariates_give_centred_responses() {
    let (n, m, p) = (400, 5, 2);
    let cfg = GenerativeConfig {
        covariates: CovariateLaw::Fixed(vec![vec![0.0; m * p]; n]),
        ..config("E8", vec![-1.0, 1.0], 1.0, n, m)
    };
    let mut rng = RngStream::new(2, 0);
    let y = simulate_dataset(&mut rng, &cfg).unwrap().responses();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    // Var of a group mean: σ_b² + Var(ε)/m.
    let var_err = cfg.error.variance();
    let se = ((1.0 + var_err / m as f64) / n as f64).sqrt();
    assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
}

#[test]
fn least_squares_recovers_truth_in_most_replications() {
    let cfg = config("E2", vec![-1.0, 1.0], 1.0, 20, 5);
    let mut rng = RngStream::new(3, 0);
    let mut covered = 0;
    for _ in 0..200 {
        let data = simulate_dataset(&mut rng, &cfg).unwrap();
        let fit = ols_fit(&data).unwrap();
        if fit.beta.iter().zip(&cfg.beta).all(|(b, t)| (b - t).abs() <= 1.5) {
            covered += 1;
        }
    }
    assert!(covered >= 190, "{covered}/200");
}

#[test]
fn same_seed_same_dataset() {
    let cfg = config("E9", vec![-1.0, 1.0], 1.0, 10, 3);
    let a = simulate_dataset(&mut RngStream::new(4, 2), &cfg).unwrap();
    let b = simulate_dataset(&mut RngStream::new(4, 2), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn loglik_does_not_depend_on_grouping_when_effects_vanish() {
    let cfg = config("E3", vec![0.5, -2.0], 1.0, 8, 4);
    let data = simulate_dataset(&mut RngStream::new(5, 0), &cfg).unwrap();
    let p = data.p();
    let singletons: Vec<Group<f64>> = data
        .groups()
        .iter()
        .flat_map(|g| {
            (0..g.len()).map(move |j| Group {
                y: vec![g.y[j]],
                x: g.row(j, p).to_vec(),
                slope: None,
            })
        })
        .collect();
    let flat = PanelDataset::new(singletons, p).unwrap();
    let z: Vec<f64> = (0..data.n_obs()).map(|k| 0.1 * k as f64 - 1.0).collect();
    let beta = [0.3, -1.7];
    let grouped = loglik_given_latents(&data, &beta, 1.3, &z, &vec![0.0; data.n_groups()]).unwrap();
    let single = loglik_given_latents(&flat, &beta, 1.3, &z, &vec![0.0; flat.n_groups()]).unwrap();
    assert_eq!(grouped, single);
}

#[test]
fn loglik_three_residuals() {
    let data = PanelDataset::new(
        vec![Group {
            y: vec![1.0, -1.0, 2.0],
            x: vec![0.0; 3],
            slope: None,
        }],
        1,
    )
    .unwrap();
    let ll = loglik_given_latents(&data, &[0.0], 2.0, &[0.0; 3], &[0.0]).unwrap();
    let expect = -3.0 * (2.0 * (2.0 * std::f64::consts::PI).sqrt()).ln() - 6.0 / 8.0;
    assert!((ll - expect).abs() < 1e-12);
}

#[test]
fn loglik_rejects_bad_inputs() {
    let data = PanelDataset::new(
        vec![Group {
            y: vec![1.0],
            x: vec![1.0],
            slope: None,
        }],
        1,
    )
    .unwrap();
    assert!(loglik_given_latents(&data, &[0.0, 1.0], 1.0, &[0.0], &[0.0]).is_err());
    assert!(loglik_given_latents(&data, &[0.0], 0.0, &[0.0], &[0.0]).is_err());
    assert!(loglik_given_latents(&data, &[0.0], 1.0, &[], &[0.0]).is_err());
}

#[test]
fn growth_csv_reports_line_numbers() {
    let text = "subject,sex,age,distance\nM01,0,8,26.0\nM01,0,10,oops\n";
    let err = read_growth_csv::<f64, _>(text.as_bytes()).unwrap_err();
    assert_eq!(err.category(), "parse");
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn growth_csv_shape() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/orthodont.csv");
    let data = symmix::models::load_growth_csv::<f64>(path).unwrap();
    assert_eq!(data.n_obs(), 108);
    assert_eq!(data.n_groups(), 27);
    assert_eq!(data.p(), 4);
    assert!(data.has_slope());
}
