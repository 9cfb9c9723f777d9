//! Frequentist comparators: least squares (F1) and Gaussian random-intercept
//! maximum likelihood by EM (F2).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_rank, Cholesky};
use crate::models::PanelDataset;
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<F> {
    pub beta: Vec<F>,
    pub sigma2: F,
    /// Random-intercept variance; zero for least squares.
    pub sigma_b2: F,
    pub iterations_used: usize,
    pub converged: bool,
    /// Gaussian random-intercept log-likelihood at the estimate.
    pub loglik: F,
    pub diagnostic: Option<String>,
}

pub const EM_TOL: f64 = 1e-8;
pub const EM_MAX_ITER: usize = 500;

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn factor_gram<F: Real>(data: &PanelDataset<F>) -> Result<Cholesky<F>> {
    let p = data.p();
    let gram = data.gram();
    let rank = psd_rank(&gram, p, lit(1e-12));
    if rank < p {
        return Err(Error::SingularDesign { rank, dim: p });
    }
    Cholesky::new(&gram, p).map_err(|_| Error::SingularDesign { rank, dim: p })
}

/// `(ΣXXᵀ)⁻¹ ΣX·target`, `target` flattened over observations.
fn least_squares<F: Real>(data: &PanelDataset<F>, chol: &Cholesky<F>, target: &[F]) -> Vec<F> {
    let p = data.p();
    let mut rhs = vec![F::zero(); p];
    for (i, g) in data.groups().iter().enumerate() {
        let o = data.offset(i);
        for j in 0..g.len() {
            for (r, x) in rhs.iter_mut().zip(g.row(j, p)) {
                *r = *r + *x * target[o + j];
            }
        }
    }
    chol.solve(&rhs)
}

fn residuals<F: Real>(data: &PanelDataset<F>, beta: &[F]) -> Vec<F> {
    let p = data.p();
    data.groups()
        .iter()
        .flat_map(|g| (0..g.len()).map(move |j| g.y[j] - dot(g.row(j, p), beta)))
        .collect()
}

/// Gaussian log-likelihood of the random-intercept model,
/// `Y_i ~ N(X_iβ, σ²I + σ_b²11ᵀ)`.
pub fn gaussian_loglik<F: Real>(data: &PanelDataset<F>, beta: &[F], sigma2: F, sigma_b2: F) -> F {
    let r = residuals(data, beta);
    let ln2pi = lit::<F>((2.0 * std::f64::consts::PI).ln());
    let half = lit::<F>(0.5);
    let mut ll = F::zero();
    for (i, g) in data.groups().iter().enumerate() {
        let o = data.offset(i);
        let m = from_usize::<F>(g.len());
        let rr = &r[o..o + g.len()];
        let ss: F = rr.iter().map(|v| *v * *v).sum();
        let s: F = rr.iter().copied().sum();
        let d = sigma2 + m * sigma_b2;
        let ln_det = (m - F::one()) * sigma2.ln() + d.ln();
        let quad = (ss - sigma_b2 / d * s * s) / sigma2;
        ll = ll - half * (m * ln2pi + ln_det + quad);
    }
    ll
}

/// F1: `β̂ = (ΣXXᵀ)⁻¹ΣXY`, `σ̂² = RSS/(N − p)`.
pub fn ols_fit<F: Real>(data: &PanelDataset<F>) -> Result<FitResult<F>> {
    let chol = factor_gram(data)?;
    let beta = least_squares(data, &chol, &data.responses());
    let rss: F = residuals(data, &beta).iter().map(|r| *r * *r).sum();
    let dof = data.n_obs().saturating_sub(data.p()).max(1);
    let sigma2 = rss / from_usize::<F>(dof);
    Ok(FitResult {
        loglik: gaussian_loglik(data, &beta, rss / from_usize::<F>(data.n_obs()), F::zero()),
        beta,
        sigma2,
        sigma_b2: F::zero(),
        iterations_used: 0,
        converged: true,
        diagnostic: None,
    })
}

/// F2 with default tolerance and iteration cap.
pub fn mle_normal_normal_default<F: Real>(data: &PanelDataset<F>) -> Result<FitResult<F>> {
    mle_normal_normal(data, lit(EM_TOL), EM_MAX_ITER)
}

/// F2: EM for `(β, σ², σ_b²)` of the Gaussian random-intercept model.
///
/// The E-step computes `E[b_i | Y]` and `Var[b_i | Y]`; the M-step refits β
/// by least squares on `Y − E[b]` and updates both variances in closed form.
/// The boundary point `σ_b² = 0` is compared at the end and returned when it
/// has higher likelihood.
pub fn mle_normal_normal<F: Real>(data: &PanelDataset<F>, tol: F, max_iter: usize) -> Result<FitResult<F>> {
    em(data, tol, max_iter, None)
}

/// As [`mle_normal_normal`], also recording the log-likelihood after every
/// iteration (entry 0 is the starting point).
pub fn mle_normal_normal_traced<F: Real>(
    data: &PanelDataset<F>,
    tol: F,
    max_iter: usize,
) -> Result<(FitResult<F>, Vec<F>)> {
    let mut trace = Vec::new();
    let fit = em(data, tol, max_iter, Some(&mut trace))?;
    Ok((fit, trace))
}

fn em<F: Real>(data: &PanelDataset<F>, tol: F, max_iter: usize, mut trace: Option<&mut Vec<F>>) -> Result<FitResult<F>> {
    let ols = ols_fit(data)?;
    let n_obs = from_usize::<F>(data.n_obs());
    let n_groups = from_usize::<F>(data.n_groups());
    let boundary_sigma2 = ols.sigma2 * from_usize::<F>(data.n_obs().saturating_sub(data.p()).max(1)) / n_obs;
    let boundary = FitResult {
        beta: ols.beta.clone(),
        sigma2: boundary_sigma2,
        sigma_b2: F::zero(),
        iterations_used: 0,
        converged: true,
        loglik: gaussian_loglik(data, &ols.beta, boundary_sigma2, F::zero()),
        diagnostic: None,
    };
    if data.n_groups() < 2 {
        return Ok(FitResult {
            converged: false,
            diagnostic: Some("a single group cannot separate σ² from σ_b²".into()),
            ..boundary
        });
    }
    if !(boundary_sigma2 > F::zero()) {
        return Ok(FitResult {
            converged: false,
            diagnostic: Some("zero residual variance at the least-squares fit".into()),
            ..boundary
        });
    }

    let chol = factor_gram(data)?;
    let y = data.responses();
    let mut beta = ols.beta.clone();
    // Start inside the parameter space so the boundary is not a trap.
    let mut sigma2 = boundary_sigma2 * lit(0.5);
    let mut sigma_b2 = boundary_sigma2 * lit(0.5);
    let mut ll = gaussian_loglik(data, &beta, sigma2, sigma_b2);
    if let Some(t) = trace.as_deref_mut() {
        t.push(ll);
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut mu = vec![F::zero(); data.n_groups()];
    let mut v = vec![F::zero(); data.n_groups()];
    while iterations < max_iter {
        iterations += 1;
        let r = residuals(data, &beta);
        for (i, g) in data.groups().iter().enumerate() {
            let o = data.offset(i);
            let m = from_usize::<F>(g.len());
            let s: F = r[o..o + g.len()].iter().copied().sum();
            let d = sigma2 + m * sigma_b2;
            mu[i] = sigma_b2 / d * s;
            v[i] = sigma2 * sigma_b2 / d;
        }
        let mut target = y.clone();
        for (i, g) in data.groups().iter().enumerate() {
            let o = data.offset(i);
            for t in &mut target[o..o + g.len()] {
                *t = *t - mu[i];
            }
        }
        let new_beta = least_squares(data, &chol, &target);
        let r = residuals(data, &new_beta);
        let mut ss = F::zero();
        for (i, g) in data.groups().iter().enumerate() {
            let o = data.offset(i);
            for rr in &r[o..o + g.len()] {
                ss = ss + (*rr - mu[i]) * (*rr - mu[i]) + v[i];
            }
        }
        let new_sigma2 = ss / n_obs;
        let new_sigma_b2 = mu.iter().zip(&v).map(|(m, vv)| *m * *m + *vv).sum::<F>() / n_groups;

        let change = new_beta
            .iter()
            .zip(&beta)
            .map(|(a, b)| (*a - *b).abs())
            .fold((new_sigma2 - sigma2).abs().max((new_sigma_b2 - sigma_b2).abs()), F::max);
        beta = new_beta;
        sigma2 = new_sigma2;
        sigma_b2 = new_sigma_b2;
        let new_ll = gaussian_loglik(data, &beta, sigma2, sigma_b2);
        debug_assert!(
            new_ll >= ll - lit::<F>(1e-10) * ll.abs().max(F::one()),
            "EM decreased the likelihood: {ll} -> {new_ll}"
        );
        ll = new_ll;
        if let Some(t) = trace.as_deref_mut() {
            t.push(ll);
        }
        if change < tol {
            converged = true;
            break;
        }
    }

    if boundary.loglik > ll {
        return Ok(FitResult {
            iterations_used: iterations,
            converged,
            diagnostic: Some("maximum on the boundary σ_b² = 0".into()),
            ..boundary
        });
    }
    Ok(FitResult {
        beta,
        sigma2,
        sigma_b2,
        iterations_used: iterations,
        converged,
        loglik: ll,
        diagnostic: (!converged).then(|| format!("EM stopped after {iterations} iterations")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Group;

    fn intercept_groups(ys: &[&[f64]]) -> PanelDataset<f64> {
        let groups = ys
            .iter()
            .map(|y| Group {
                y: y.to_vec(),
                x: vec![1.0; y.len()],
                slope: None,
            })
            .collect();
        PanelDataset::new(groups, 1).unwrap()
    }

    #[test]
    fn ols_is_sample_mean_for_intercept_design() {
        let fit = ols_fit(&intercept_groups(&[&[1.0, 2.0, 3.0]])).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-14);
        assert!((fit.sigma2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_design_names_rank() {
        let data = PanelDataset::new(
            vec![Group {
                y: vec![1.0, 2.0],
                x: vec![1.0, 1.0, 2.0, 2.0],
                slope: None,
            }],
            2,
        )
        .unwrap();
        match ols_fit(&data) {
            Err(Error::SingularDesign { rank, dim }) => assert_eq!((rank, dim), (1, 2)),
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn single_group_is_flagged() {
        let fit = mle_normal_normal_default(&intercept_groups(&[&[0.3]])).unwrap();
        assert!(!fit.converged);
        assert!(fit.diagnostic.is_some());
    }

    #[test]
    fn loglik_matches_dense_formula() {
        // One group of two, compound-symmetric covariance [[s+b, b], [b, s+b]].
        let data = intercept_groups(&[&[1.0, -0.5]]);
        let (s, b) = (0.7_f64, 0.4_f64);
        let (a, c) = (s + b, b);
        let det = a * a - c * c;
        let (r1, r2) = (1.0 - 0.2, -0.5 - 0.2);
        let quad = (a * r1 * r1 - 2.0 * c * r1 * r2 + a * r2 * r2) / det;
        let expect = -0.5 * (2.0 * (2.0 * std::f64::consts::PI).ln() + det.ln() + quad);
        let got = gaussian_loglik(&data, &[0.2], s, b);
        assert!((got - expect).abs() < 1e-13);
    }
}
