//! Score, information and centering quantities of the Gaussian posterior
//! limit, and the discrepancy between sampled posteriors and that limit.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::models::PanelDataset;
use crate::quadrature::{gauss_hermite, integrate, AdaptiveOptions};
use crate::rngdist::{normal, ErrorSpec};
use crate::scalar::{from_usize, lit, log_sum_exp, to_f64, Real};

/// Known symmetric normal mixture `p(x) = Σ_k π_k (φ_σ(x − z_k) + φ_σ(x + z_k))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueErrorModel<F> {
    /// Nonnegative centers `z_k`.
    pub atoms: Vec<F>,
    /// Mirrored weights `π_k`, `2Σπ_k = 1`.
    pub weights: Vec<F>,
    pub sd: F,
}

impl<F: Real> TrueErrorModel<F> {
    pub fn new(atoms: Vec<F>, weights: Vec<F>, sd: F) -> Result<Self> {
        let m = Self { atoms, weights, sd };
        m.validate()?;
        Ok(m)
    }

    /// `N(0, sd²)` as a one-atom mixture.
    pub fn gaussian(sd: F) -> Self {
        Self {
            atoms: vec![F::zero()],
            weights: vec![lit(0.5)],
            sd,
        }
    }

    /// The mixture laws of the simulation study; other laws are rejected
    /// since they lie outside the model class.
    pub fn from_spec(spec: &ErrorSpec<F>) -> Result<Self> {
        match spec {
            ErrorSpec::SymMixture { weights, centers } => {
                Self::new(centers.iter().map(|z| z.abs()).collect(), weights.clone(), F::one())
            }
            ErrorSpec::StandardNormal => Ok(Self::gaussian(F::one())),
            other => Err(Error::ParameterDomain(format!(
                "{other:?} is not a normal mixture; the posterior limit theory does not cover it"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() || self.atoms.len() != self.weights.len() {
            return Err(Error::ParameterDomain("mixture needs matching atoms and weights".into()));
        }
        if !(self.sd > F::zero()) {
            return Err(Error::ParameterDomain(format!("component sd must be positive, got {}", self.sd)));
        }
        if self.weights.iter().any(|w| !(*w >= F::zero())) || self.atoms.iter().any(|z| *z < F::zero()) {
            return Err(Error::ParameterDomain("weights and atoms must be nonnegative".into()));
        }
        let mass = lit::<F>(2.0) * self.weights.iter().copied().sum::<F>();
        if (mass - F::one()).abs() > lit(1e-9) {
            return Err(Error::ParameterDomain(format!("mirrored mass must be 1, got {mass}")));
        }
        Ok(())
    }

    /// Half-width of the integration range, `max z_k + 12σ`.
    pub fn support_radius(&self) -> F {
        self.atoms.iter().copied().fold(F::zero(), F::max) + lit::<F>(12.0) * self.sd
    }

    pub fn density(&self, x: F) -> F {
        let ax = x.abs();
        let s = self.sd;
        let c = F::one() / (s * F::TAU().sqrt());
        let half = lit::<F>(0.5);
        self.weights
            .iter()
            .zip(&self.atoms)
            .map(|(&w, &z)| {
                let a = (ax - z) / s;
                let b = (ax + z) / s;
                w * c * ((-half * a * a).exp() + (-half * b * b).exp())
            })
            .sum()
    }

    pub fn ln_density(&self, x: F) -> F {
        let terms = self.component_log_terms(x.abs());
        log_sum_exp(&terms)
    }

    /// `ln π_k + ln φ_σ(x ∓ z_k)`, interleaved minus/plus.
    fn component_log_terms(&self, x: F) -> Vec<F> {
        let s = self.sd;
        let half = lit::<F>(0.5);
        let ln_c = -(s * F::TAU().sqrt()).ln();
        let mut out = Vec::with_capacity(2 * self.atoms.len());
        for (&w, &z) in self.weights.iter().zip(&self.atoms) {
            let lw = w.ln() + ln_c;
            let a = (x - z) / s;
            let b = (x + z) / s;
            out.push(lw - half * a * a);
            out.push(lw - half * b * b);
        }
        out
    }

    /// `-p'(x)/p(x)`, formed from normalized component responsibilities so it
    /// stays finite far in the tails. Odd in `x` by construction.
    pub fn score(&self, x: F) -> F {
        let ax = x.abs();
        let terms = self.component_log_terms(ax);
        let lse = log_sum_exp(&terms);
        let s2 = self.sd * self.sd;
        let mut acc = F::zero();
        for (k, &z) in self.atoms.iter().enumerate() {
            let wm = (terms[2 * k] - lse).exp();
            let wp = (terms[2 * k + 1] - lse).exp();
            acc = acc + wm * (ax - z) + wp * (ax + z);
        }
        let s = acc / s2;
        if x < F::zero() {
            -s
        } else {
            s
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> F {
        let total = self.weights.iter().copied().sum::<F>();
        let u = F::draw_open01(rng) * total;
        let mut acc = F::zero();
        let mut k = self.atoms.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc = acc + *w;
            if u < acc {
                k = i;
                break;
            }
        }
        let sign = if F::draw_open01(rng) < lit(0.5) { F::one() } else { -F::one() };
        normal(rng, sign * self.atoms[k], self.sd)
    }
}

/// `ℓ̇ = −p'/p` of `model` at `x`.
pub fn score<F: Real>(model: &TrueErrorModel<F>, x: F) -> F {
    model.score(x)
}

fn expect_under<F: Real, G: Fn(F) -> F>(truth: &TrueErrorModel<F>, radius: F, g: G) -> Result<F> {
    let opts = AdaptiveOptions::default();
    // The integrand is even for every use here; integrate one half.
    let half = integrate(|x| g(x) * truth.density(x), F::zero(), radius, opts)?;
    Ok(lit::<F>(2.0) * half.value)
}

/// `I = ∫ ℓ̇² p`.
pub fn fisher_info<F: Real>(model: &TrueErrorModel<F>) -> Result<F> {
    model.validate()?;
    expect_under(model, model.support_radius(), |x| {
        let s = model.score(x);
        s * s
    })
}

/// `V_η = ∫ ℓ̇_η ℓ̇_{η₀} p_{η₀}`.
pub fn cross_info<F: Real>(model: &TrueErrorModel<F>, truth: &TrueErrorModel<F>) -> Result<F> {
    model.validate()?;
    truth.validate()?;
    let r = model.support_radius().max(truth.support_radius());
    expect_under(truth, r, |x| model.score(x) * truth.score(x))
}

/// `∫ ℓ̇_η² p_{η₀}`.
pub fn score_second_moment<F: Real>(model: &TrueErrorModel<F>, truth: &TrueErrorModel<F>) -> Result<F> {
    let r = model.support_radius().max(truth.support_radius());
    expect_under(truth, r, |x| {
        let s = model.score(x);
        s * s
    })
}

/// Centering `Δₙ` and the matrices of the Gaussian limit `N(Δₙ, V⁻¹)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub delta: Vec<f64>,
    /// `V_{n,η₀}`, `p×p` row-major.
    pub v: Vec<f64>,
    /// `𝕏_n = n⁻¹ΣXXᵀ`, `p×p` row-major.
    pub design: Vec<f64>,
    /// Sample size `n` used for `√n` scaling.
    pub n: usize,
}

fn finish_centering(p: usize, n: usize, v: Vec<f64>, design: Vec<f64>, score_sum: Vec<f64>) -> Result<Centering> {
    let chol = Cholesky::new(&v, p).map_err(|_| Error::SingularDesign {
        rank: crate::linalg::psd_rank(&design, p, 1e-12),
        dim: p,
    })?;
    let scale = 1.0 / (n as f64).sqrt();
    let delta = chol.solve(&score_sum).into_iter().map(|d| d * scale).collect();
    Ok(Centering { delta, v, design, n })
}

/// Location and fixed-effects regression: `V = I·𝕏_n`,
/// `Δₙ = n^{-1/2} V⁻¹ Σ ℓ̇(Y − β₀ᵀX)·X` over all `n` observations.
pub fn centering_delta<F: Real>(model: &TrueErrorModel<F>, data: &PanelDataset<F>, beta0: &[F]) -> Result<Centering> {
    let p = data.p();
    if beta0.len() != p {
        return Err(Error::DimensionMismatch(format!("β₀ has {} entries, design has {p}", beta0.len())));
    }
    let info = to_f64(fisher_info(model)?);
    let n = data.n_obs();
    let design: Vec<f64> = data.gram().iter().map(|g| to_f64(*g) / n as f64).collect();
    let mut sum = vec![0.0; p];
    for g in data.groups() {
        for j in 0..g.len() {
            let x = g.row(j, p);
            let r = g.y[j] - x.iter().zip(beta0).map(|(a, b)| *a * *b).sum::<F>();
            let s = to_f64(model.score(r));
            for (acc, xi) in sum.iter_mut().zip(x) {
                *acc += s * to_f64(*xi);
            }
        }
    }
    let v: Vec<f64> = design.iter().map(|d| d * info).collect();
    finish_centering(p, n, v, design, sum)
}

/// Gradient of the group log-density with respect to the residuals:
/// `u_j = E[ℓ̇(r_j − b) | r]` under `b ~ N(0, σ_b²)`, by Gauss–Hermite.
pub fn group_score(model: &TrueErrorModel<f64>, random_effect_sd: f64, r: &[f64], rule: &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
    let (nodes, weights) = rule;
    let bs: Vec<f64> = nodes.iter().map(|t| std::f64::consts::SQRT_2 * random_effect_sd * t).collect();
    let lw: Vec<f64> = bs
        .iter()
        .zip(weights)
        .map(|(b, w)| w.ln() + r.iter().map(|rj| model.ln_density(rj - b)).sum::<f64>())
        .collect();
    let lse = log_sum_exp(&lw);
    let post: Vec<f64> = lw.iter().map(|l| (l - lse).exp()).collect();
    r.iter()
        .map(|rj| bs.iter().zip(&post).map(|(b, w)| w * model.score(rj - b)).sum())
        .collect()
}

/// Random-intercept model: `u_i` from [`group_score`],
/// `V_n = n⁻¹Σ X_iᵀ V_η X_i` with `V_η = E[u uᵀ]` estimated from
/// `mc_draws` simulated groups per distinct group size, and
/// `Δₙ = n^{-1/2} V_n⁻¹ Σ X_iᵀ u_i` over `n` groups.
#[allow(clippy::too_many_arguments)]
pub fn centering_delta_random_intercept<R: RngCore + ?Sized>(
    rng: &mut R,
    model: &TrueErrorModel<f64>,
    random_effect_sd: f64,
    data: &PanelDataset<f64>,
    beta0: &[f64],
    hermite_nodes: usize,
    mc_draws: usize,
) -> Result<Centering> {
    let p = data.p();
    if beta0.len() != p {
        return Err(Error::DimensionMismatch(format!("β₀ has {} entries, design has {p}", beta0.len())));
    }
    if !(random_effect_sd > 0.0) {
        return Err(Error::ParameterDomain("random-effect sd must be positive".into()));
    }
    let rule = gauss_hermite(hermite_nodes);
    let mut v_eta: HashMap<usize, Vec<f64>> = HashMap::new();
    let n = data.n_groups();
    let mut v = vec![0.0; p * p];
    let mut sum = vec![0.0; p];
    for g in data.groups() {
        let m = g.len();
        let ve = v_eta.entry(m).or_insert_with(|| {
            let mut acc = vec![0.0; m * m];
            for _ in 0..mc_draws {
                let b = normal(rng, 0.0, random_effect_sd);
                let r: Vec<f64> = (0..m).map(|_| b + model.sample(rng)).collect();
                let u = group_score(model, random_effect_sd, &r, &rule);
                for a in 0..m {
                    for c in 0..m {
                        acc[a * m + c] += u[a] * u[c];
                    }
                }
            }
            acc.iter().map(|x| x / mc_draws as f64).collect()
        });
        for a in 0..p {
            for c in 0..p {
                let mut s = 0.0;
                for j in 0..m {
                    for k in 0..m {
                        s += g.x[j * p + a] * ve[j * m + k] * g.x[k * p + c];
                    }
                }
                v[a * p + c] += s / n as f64;
            }
        }
        let r: Vec<f64> = (0..m)
            .map(|j| g.y[j] - g.row(j, p).iter().zip(beta0).map(|(x, b)| x * b).sum::<f64>())
            .collect();
        let u = group_score(model, random_effect_sd, &r, &rule);
        for (a, acc) in sum.iter_mut().enumerate() {
            *acc += (0..m).map(|j| g.x[j * p + a] * u[j]).sum::<f64>();
        }
    }
    let design: Vec<f64> = data.gram().iter().map(|x| x / n as f64).collect();
    finish_centering(p, n, v, design, sum)
}

/// Distances between the sampled law of `h = √n(β − β₀)` and `N(Δₙ, V⁻¹)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvMReport {
    pub delta: Vec<f64>,
    pub v: Vec<f64>,
    pub design: Vec<f64>,
    /// `|mean(h) − Δₙ|` in the metric of `V`.
    pub mean_gap: f64,
    /// Eigenvalues of `V^{1/2} Cov(h) V^{1/2}`, ascending.
    pub covariance_ratio_eigs: Vec<f64>,
    /// KS distance to `N(0,1)` of `√λ_k u_kᵀ(h − Δₙ)` for each eigenpair of `V`.
    pub ks_distances: Vec<f64>,
    /// KS distance to `N(0,1)` of the same projections after centering and
    /// scaling by their own sample mean and sd (shape only).
    pub ks_shape: Vec<f64>,
}

impl BvMReport {
    pub fn min_eig(&self) -> f64 {
        self.covariance_ratio_eigs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eig(&self) -> f64 {
        self.covariance_ratio_eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_ks(&self) -> f64 {
        self.ks_distances.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ks_shape(&self) -> f64 {
        self.ks_shape.iter().copied().fold(0.0, f64::max)
    }

    pub const CSV_HEADER: [&'static str; 6] = ["n", "rep", "mean_gap", "min_eig", "max_eig", "max_ks"];

    pub fn csv_row(&self, n: usize, rep: usize) -> [String; 6] {
        [
            n.to_string(),
            rep.to_string(),
            self.mean_gap.to_string(),
            self.min_eig().to_string(),
            self.max_eig().to_string(),
            self.max_ks().to_string(),
        ]
    }
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov distance to `N(0,1)`.
pub fn ks_std_normal(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub const MIN_DRAWS: usize = 500;

/// Compares posterior draws of β (one row per draw) with `N(Δₙ, V⁻¹)` on the
/// `h = √n(β − β₀)` scale.
pub fn gaussianity_report<F: Real>(draws: &[Vec<F>], beta0: &[F], centering: &Centering) -> Result<BvMReport> {
    let p = beta0.len();
    if draws.len() < MIN_DRAWS {
        return Err(Error::Config(format!(
            "gaussianity report needs at least {MIN_DRAWS} draws, got {}",
            draws.len()
        )));
    }
    if centering.delta.len() != p || draws.iter().any(|d| d.len() != p) {
        return Err(Error::DimensionMismatch("draw, β₀ and Δₙ dimensions differ".into()));
    }
    let rn = (centering.n as f64).sqrt();
    let h: Vec<DVector<f64>> = draws
        .iter()
        .map(|d| DVector::from_iterator(p, d.iter().zip(beta0).map(|(b, b0)| rn * (to_f64(*b) - to_f64(*b0)))))
        .collect();
    let nd = from_usize::<f64>(h.len());
    let mean = h.iter().fold(DVector::zeros(p), |a, x| a + x) / nd;
    let cov = h.iter().fold(DMatrix::zeros(p, p), |a, x| {
        let c = x - &mean;
        a + &c * c.transpose()
    }) / (nd - 1.0);

    let cov_eig = SymmetricEigen::new(cov.clone());
    let cmax = cov_eig.eigenvalues.max();
    let cmin = cov_eig.eigenvalues.min();
    if !(cmin > 1e-12 * cmax.max(f64::MIN_POSITIVE)) {
        return Err(Error::NotPositiveDefinite(format!(
            "posterior draw covariance is rank deficient (eigenvalues {cmin:e}..{cmax:e})"
        )));
    }

    let v = DMatrix::from_row_slice(p, p, &centering.v);
    let delta = DVector::from_column_slice(&centering.delta);
    let veig = SymmetricEigen::new(v.clone());
    if veig.eigenvalues.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite("V is not positive definite".into()));
    }
    let sqrt_v = &veig.eigenvectors
        * DMatrix::from_diagonal(&veig.eigenvalues.map(f64::sqrt))
        * veig.eigenvectors.transpose();

    let gap = &mean - &delta;
    let mean_gap = (gap.transpose() * &v * &gap)[(0, 0)].max(0.0).sqrt();

    let ratio = &sqrt_v * &cov * &sqrt_v;
    let mut eigs: Vec<f64> = SymmetricEigen::new(ratio).eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.total_cmp(b));

    let mut ks = Vec::with_capacity(p);
    let mut ks_shape = Vec::with_capacity(p);
    for k in 0..p {
        let u = veig.eigenvectors.column(k);
        let scale = veig.eigenvalues[k].sqrt();
        let proj: Vec<f64> = h.iter().map(|x| scale * u.dot(&(x - &delta))).collect();
        ks.push(ks_std_normal(&proj));
        let (m, s) = {
            let m = proj.iter().sum::<f64>() / nd;
            let s = (proj.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (nd - 1.0)).sqrt();
            (m, s)
        };
        let z: Vec<f64> = proj.iter().map(|x| (x - m) / s).collect();
        ks_shape.push(ks_std_normal(&z));
    }

    Ok(BvMReport {
        delta: centering.delta.clone(),
        v: centering.v.clone(),
        design: centering.design.clone(),
        mean_gap,
        covariance_ratio_eigs: eigs,
        ks_distances: ks,
        ks_shape,
    })
}
