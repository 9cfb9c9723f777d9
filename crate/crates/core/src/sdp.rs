//! Symmetrized Dirichlet process `DP_S(α, P₀)`: the law of `(P + P⁻)/2` for
//! `P ~ DP(α, P₀)` and `P⁻(A) = P(−A)`.
//!
//! Covers the stick-breaking construction, the conjugate posterior, the
//! Pólya-urn predictive, and two Gibbs samplers for the normal-location kernel
//! with base measure `N(0, τ₁²)`: one that resamples the latent locations
//! directly and one that works on class labels, signs and class locations.

use std::ops::Neg;

use num_traits::Num;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rngdist::{categorical_log, ln_normal_pdf, normal, normal_pdf};
use crate::scalar::{from_usize, lit, log_add_exp, Real};

/// Concentration `α` and base standard deviation `τ₁` of `DP_S(α, N(0, τ₁²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpPrior<F> {
    pub concentration: F,
    pub base_sd: F,
}

impl<F: Real> SdpPrior<F> {
    pub fn new(concentration: F, base_sd: F) -> Result<Self> {
        let p = Self {
            concentration,
            base_sd,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.concentration > F::zero() && self.concentration.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "DP concentration must be positive, got {}",
                self.concentration
            )));
        }
        if !(self.base_sd > F::zero() && self.base_sd.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "base sd must be positive, got {}",
                self.base_sd
            )));
        }
        Ok(())
    }

    /// Truncation `⌈10 + 4α·ln(1/ε)⌉`, which keeps the expected leftover
    /// stick `(α/(1+α))^K` below `ε`.
    pub fn default_truncation(&self, eps: F) -> usize {
        let k = lit::<F>(10.0) + lit::<F>(4.0) * self.concentration * (F::one() / eps).ln();
        k.ceil().to_usize().unwrap_or(usize::MAX).max(1)
    }
}

/// Remainder target used by [`SdpPrior::default_truncation`] callers.
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-8;

/// A mirrored atom: mass `weight/2` at each of `±location` (a single atom of
/// mass `weight` when `location == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirroredAtom<F> {
    pub location: F,
    pub weight: F,
}

/// Finite symmetric mixing measure with a truncation tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMixingMeasure<F> {
    pub atoms: Vec<MirroredAtom<F>>,
    pub remainder_mass: F,
}

impl<F: Real> SymmetricMixingMeasure<F> {
    pub fn total_mass(&self) -> F {
        self.atoms.iter().map(|a| a.weight).sum::<F>() + self.remainder_mass
    }

    /// Normal-mixture density `Σ_c (w_c/2)(φ_σ(x − z_c) + φ_σ(x + z_c))`,
    /// ignoring the truncation tail. Evaluated at `|x|`.
    pub fn density(&self, x: F, sd: F) -> F {
        let ax = x.abs();
        let half = lit::<F>(0.5);
        self.atoms
            .iter()
            .map(|a| half * a.weight * (normal_pdf(ax - a.location, sd) + normal_pdf(ax + a.location, sd)))
            .sum()
    }

    /// One signed location drawn from the measure. The truncation tail, if
    /// hit, is filled from `tail`.
    pub fn sample_location<R: RngCore + ?Sized>(&self, rng: &mut R, tail: &PosteriorBase<F>) -> F {
        let mut u = F::draw_open01(rng) * self.total_mass();
        let mut chosen = None;
        for a in &self.atoms {
            if u < a.weight {
                chosen = Some(a.location);
                break;
            }
            u = u - a.weight;
        }
        let loc = match chosen {
            Some(z) => z,
            None => tail.sample(rng).abs(),
        };
        if F::draw_open01(rng) < lit(0.5) {
            loc
        } else {
            -loc
        }
    }
}

/// Base measure of a (posterior) `DP_S`: `prior_mass·N(0, τ₁²) + atom_mass·Σ δ_{θ_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBase<W> {
    pub prior_mass: W,
    pub base_sd: W,
    pub atom_mass: W,
    pub atoms: Vec<W>,
}

impl<F: Real> PosteriorBase<F> {
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> F {
        if self.atoms.is_empty() || F::draw_open01(rng) < self.prior_mass {
            normal(rng, F::zero(), self.base_sd)
        } else {
            let k = (F::draw_open01(rng) * from_usize::<F>(self.atoms.len()))
                .to_usize()
                .unwrap_or(0)
                .min(self.atoms.len() - 1);
            self.atoms[k]
        }
    }
}

/// `DP_S(concentration, base)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpPosterior<W> {
    pub concentration: W,
    pub base: PosteriorBase<W>,
}

/// Exact-arithmetic-friendly bound for the urn and conjugacy algebra, so the
/// weights can be checked in rationals as well as floats.
pub trait UrnScalar: Clone + PartialOrd + Num + Neg<Output = Self> {}
impl<T: Clone + PartialOrd + Num + Neg<Output = T>> UrnScalar for T {}

/// Conjugate update: `DP_S(α + n, (α·P₀ + Σ δ_{θ_i}) / (α + n))`.
pub fn sdp_posterior<W: UrnScalar>(prior: &SdpPrior<W>, theta: &[W]) -> SdpPosterior<W> {
    let n = count::<W>(theta.len());
    let total = prior.concentration.clone() + n;
    SdpPosterior {
        concentration: total.clone(),
        base: PosteriorBase {
            prior_mass: prior.concentration.clone() / total.clone(),
            base_sd: prior.base_sd.clone(),
            atom_mass: W::one() / total,
            atoms: theta.to_vec(),
        },
    }
}

fn count<W: UrnScalar>(n: usize) -> W {
    (0..n).fold(W::zero(), |acc, _| acc + W::one())
}

/// Predictive law of the next draw: `base_mass` on the symmetrized base and
/// point masses on every `±θ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictive<W> {
    pub base_mass: W,
    pub base_sd: W,
    /// `(location, mass)`; mirrored pairs appear as two entries.
    pub atoms: Vec<(W, W)>,
}

impl<W: UrnScalar> Predictive<W> {
    pub fn total_mass(&self) -> W {
        self.atoms
            .iter()
            .fold(self.base_mass.clone(), |acc, (_, m)| acc + m.clone())
    }

    /// Atoms sorted by location with coincident locations merged, so that
    /// equal measures compare equal.
    pub fn canonical(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut merged: Vec<(W, W)> = Vec::with_capacity(atoms.len());
        for (loc, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == loc => last.1 = last.1.clone() + m,
                _ => merged.push((loc, m)),
            }
        }
        Self {
            base_mass: self.base_mass.clone(),
            base_sd: self.base_sd.clone(),
            atoms: merged,
        }
    }
}

impl<F: Real> Predictive<F> {
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> F {
        let lw: Vec<F> = std::iter::once(self.base_mass)
            .chain(self.atoms.iter().map(|a| a.1))
            .map(|m| m.ln())
            .collect();
        match categorical_log(rng, &lw) {
            0 => normal(rng, F::zero(), self.base_sd),
            k => self.atoms[k - 1].0,
        }
    }
}

/// Pólya-urn predictive of `θ_{n+1}` given `θ_1..θ_n`:
/// `α/(2(α+n))·(P₀ + P₀⁻) + 1/(2(α+n))·Σ (δ_{θ_i} + δ_{−θ_i})`.
/// `P₀ = N(0, τ₁²)` is symmetric, so the two base terms merge.
pub fn predictive_weights<W: UrnScalar>(prior: &SdpPrior<W>, past: &[W]) -> Predictive<W> {
    let two = W::one() + W::one();
    let total = prior.concentration.clone() + count::<W>(past.len());
    let each = W::one() / (two * total.clone());
    let mut atoms = Vec::with_capacity(2 * past.len());
    for t in past {
        atoms.push((t.clone(), each.clone()));
        atoms.push((-t.clone(), each.clone()));
    }
    Predictive {
        base_mass: prior.concentration.clone() / total,
        base_sd: prior.base_sd.clone(),
        atoms,
    }
}

impl<W: UrnScalar> SdpPosterior<W> {
    /// Marginal law of one draw from this `DP_S`: the symmetrized base.
    pub fn predictive(&self) -> Predictive<W> {
        let two = W::one() + W::one();
        let half_atom = self.base.atom_mass.clone() / two;
        let mut atoms = Vec::with_capacity(2 * self.base.atoms.len());
        for t in &self.base.atoms {
            atoms.push((t.clone(), half_atom.clone()));
            atoms.push((-t.clone(), half_atom.clone()));
        }
        Predictive {
            base_mass: self.base.prior_mass.clone(),
            base_sd: self.base.base_sd.clone(),
            atoms,
        }
    }
}

/// `v ~ Beta(1, α)` by inversion, `v = 1 − U^{1/α}`; exact in the `α → 0` limit.
fn beta_one_alpha<F: Real, R: RngCore + ?Sized>(rng: &mut R, alpha: F) -> F {
    let u = F::draw_open01(rng);
    -(u.ln() / alpha).exp_m1()
}

/// Truncated stick-breaking draw `½ Σ_i p_i (δ_{θ_i} + δ_{−θ_i})` from `DP_S`.
pub fn stick_breaking_sample<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    prior: &SdpPrior<F>,
    truncation: usize,
) -> SymmetricMixingMeasure<F> {
    let post = sdp_posterior(prior, &[]);
    stick_breaking_from(rng, &post, truncation)
}

/// Truncated stick-breaking draw from a posterior `DP_S`.
pub fn stick_breaking_from<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    dp: &SdpPosterior<F>,
    truncation: usize,
) -> SymmetricMixingMeasure<F> {
    let k = truncation.max(1);
    let mut atoms = Vec::with_capacity(k);
    let mut left = F::one();
    for _ in 0..k {
        let v = beta_one_alpha(rng, dp.concentration);
        atoms.push(MirroredAtom {
            location: dp.base.sample(rng).abs(),
            weight: left * v,
        });
        left = left * (F::one() - v);
    }
    SymmetricMixingMeasure {
        atoms,
        remainder_mass: left,
    }
}

/// Likelihood family for the direct sampler. The base is always `N(0, τ₁²)`.
pub trait LocationKernel<F: Real> {
    /// `log f_θ(x)`.
    fn ln_likelihood(&self, x: F, theta: F) -> F;
    /// `log ∫ f_θ(x) dN(0, τ₁²)(θ)`.
    fn ln_marginal(&self, x: F) -> F;
    /// Draw from the posterior of θ under prior `N(0, τ₁²)` and one observation `x`.
    fn draw_posterior<R: RngCore + ?Sized>(&self, rng: &mut R, x: F) -> F;
}

/// `f_θ = N(θ, σ²)` with base `N(0, τ₁²)`.
#[derive(Debug, Clone, Copy)]
pub struct NormalKernel<F> {
    pub sd: F,
    pub base_sd: F,
}

impl<F: Real> LocationKernel<F> for NormalKernel<F> {
    #[inline]
    fn ln_likelihood(&self, x: F, theta: F) -> F {
        ln_normal_pdf(x - theta, self.sd)
    }
    #[inline]
    fn ln_marginal(&self, x: F) -> F {
        ln_normal_pdf(x, (self.sd * self.sd + self.base_sd * self.base_sd).sqrt())
    }
    fn draw_posterior<R: RngCore + ?Sized>(&self, rng: &mut R, x: F) -> F {
        let (mean, var) = class_location_posterior(x, 1, self.sd, self.base_sd);
        normal(rng, mean, var.sqrt())
    }
}

/// Constant likelihood: with it the direct sampler targets the prior. Used to
/// check that the sweep leaves the prior invariant.
#[derive(Debug, Clone, Copy)]
pub struct FlatKernel<F> {
    pub base_sd: F,
}

impl<F: Real> LocationKernel<F> for FlatKernel<F> {
    fn ln_likelihood(&self, _x: F, _theta: F) -> F {
        F::zero()
    }
    fn ln_marginal(&self, _x: F) -> F {
        F::zero()
    }
    fn draw_posterior<R: RngCore + ?Sized>(&self, rng: &mut R, _x: F) -> F {
        normal(rng, F::zero(), self.base_sd)
    }
}

/// One scan of the direct sampler: each `θ_i` is redrawn from
/// `r_i H_i + Σ_{j≠i} (f_{θ_j}(x_i) δ_{θ_j} + f_{−θ_j}(x_i) δ_{−θ_j})` with
/// `r_i = 2α ∫ f_θ(x_i) dP₀`.
pub fn gibbs_direct_sweep<F, R, K>(
    rng: &mut R,
    theta: &mut [F],
    data: &[F],
    kernel: &K,
    concentration: F,
) where
    F: Real,
    R: RngCore + ?Sized,
    K: LocationKernel<F>,
{
    assert_eq!(theta.len(), data.len(), "one latent location per observation");
    let n = theta.len();
    let ln_two_alpha = (lit::<F>(2.0) * concentration).ln();
    let mut lw = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        let x = data[i];
        lw.clear();
        lw.push(ln_two_alpha + kernel.ln_marginal(x));
        for (j, &t) in theta.iter().enumerate() {
            if j == i {
                lw.push(F::neg_infinity());
                lw.push(F::neg_infinity());
            } else {
                lw.push(kernel.ln_likelihood(x, t));
                lw.push(kernel.ln_likelihood(x, -t));
            }
        }
        let k = categorical_log(rng, &lw);
        theta[i] = if k == 0 {
            kernel.draw_posterior(rng, x)
        } else {
            let t = theta[(k - 1) / 2];
            if (k - 1) % 2 == 0 {
                t
            } else {
                -t
            }
        };
    }
}

/// Convenience wrapper for the normal kernel.
pub fn gibbs_direct_sweep_normal<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    theta: &mut [F],
    data: &[F],
    sd: F,
    prior: &SdpPrior<F>,
) {
    let kernel = NormalKernel {
        sd,
        base_sd: prior.base_sd,
    };
    gibbs_direct_sweep(rng, theta, data, &kernel, prior.concentration);
}

/// How the weight of opening a new class is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewClusterMode {
    /// `2α·φ_{√(σ²+τ₁²)}(e)`: the base measure integrated out exactly.
    #[default]
    Integrated,
    /// `2α·φ_σ(e − ϑ_new)` with one auxiliary `ϑ_new ~ N(0, τ₁²)`.
    AuxiliaryDraw,
}

/// Per-observation class labels `c`, signs `s ∈ {±1}` and per-class locations
/// `ϑ`. The implied latent location of observation `i` is `s_i·ϑ_{c_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAssignment<F> {
    labels: Vec<usize>,
    signs: Vec<i8>,
    locations: Vec<F>,
    counts: Vec<usize>,
}

impl<F: Real> ClassAssignment<F> {
    /// All observations in one class at `ϑ = 0` with positive signs.
    pub fn single_class(n: usize) -> Self {
        assert!(n > 0, "assignment needs at least one observation");
        Self {
            labels: vec![0; n],
            signs: vec![1; n],
            locations: vec![F::zero()],
            counts: vec![n],
        }
    }

    pub fn from_parts(labels: Vec<usize>, signs: Vec<i8>, locations: Vec<F>) -> Result<Self> {
        if labels.len() != signs.len() || labels.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels vs {} signs",
                labels.len(),
                signs.len()
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::ParameterDomain("signs must be ±1".into()));
        }
        let mut counts = vec![0usize; locations.len()];
        for &c in &labels {
            if c >= locations.len() {
                return Err(Error::DimensionMismatch(format!(
                    "label {c} without a location ({} classes)",
                    locations.len()
                )));
            }
            counts[c] += 1;
        }
        if counts.iter().any(|&n| n == 0) {
            return Err(Error::ParameterDomain("empty class in assignment".into()));
        }
        Ok(Self {
            labels,
            signs,
            locations,
            counts,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.labels.len()
    }
    pub fn n_classes(&self) -> usize {
        self.locations.len()
    }
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
    pub fn locations(&self) -> &[F] {
        &self.locations
    }
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `z_i = s_i ϑ_{c_i}`.
    #[inline]
    pub fn latent(&self, i: usize) -> F {
        sign_value::<F>(self.signs[i]) * self.locations[self.labels[i]]
    }

    pub fn latents(&self) -> Vec<F> {
        (0..self.n_obs()).map(|i| self.latent(i)).collect()
    }

    /// `(n⁺_{−i,c}, n⁻_{−i,c})`: observations other than `i` in class `c`
    /// with sign `+1` and `−1`.
    pub fn signed_counts_excluding(&self, i: usize, c: usize) -> (usize, usize) {
        let mut plus = 0;
        let mut minus = 0;
        for (j, (&l, &s)) in self.labels.iter().zip(&self.signs).enumerate() {
            if j != i && l == c {
                if s > 0 {
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
        }
        (plus, minus)
    }

    /// Panics if the cached counts disagree with the labels or a class is empty.
    pub fn assert_invariants(&self) {
        let mut counts = vec![0usize; self.locations.len()];
        for &c in &self.labels {
            assert!(c < counts.len(), "label {c} out of range");
            counts[c] += 1;
        }
        assert_eq!(counts, self.counts, "class count cache out of sync");
        assert!(counts.iter().all(|&n| n > 0), "empty class persisted");
        assert_eq!(counts.iter().sum::<usize>(), self.labels.len());
    }

    /// Removes observation `i` from its class; deletes the class if it empties
    /// and returns its location in that case.
    fn detach(&mut self, i: usize) -> Option<F> {
        let c = self.labels[i];
        self.counts[c] -= 1;
        if self.counts[c] > 0 {
            return None;
        }
        let loc = self.locations[c];
        let last = self.locations.len() - 1;
        self.locations.swap_remove(c);
        self.counts.swap_remove(c);
        if c != last {
            for l in self.labels.iter_mut() {
                if *l == last {
                    *l = c;
                }
            }
        }
        self.labels[i] = usize::MAX;
        Some(loc)
    }
}

#[inline]
fn sign_value<F: Real>(s: i8) -> F {
    if s > 0 {
        F::one()
    } else {
        -F::one()
    }
}

/// Log-weights `[s = +1, s = −1]` for the sign of an observation with
/// residual `e` in a class at `ϑ`: `log φ_σ(e − ϑ)`, `log φ_σ(e + ϑ)`.
#[inline]
pub fn sign_log_weights<F: Real>(e: F, location: F, sd: F) -> [F; 2] {
    [ln_normal_pdf(e - location, sd), ln_normal_pdf(e + location, sd)]
}

/// Mean and variance of `ϑ_c` given `Σ_{c_i=c} s_i e_i`, `n_c`, `σ` and `τ₁`:
/// `N(τ₁² Σ s e / (n_c τ₁² + σ²), τ₁² σ² / (n_c τ₁² + σ²))`.
#[inline]
pub fn class_location_posterior<F: Real>(sum_se: F, n_c: usize, sd: F, base_sd: F) -> (F, F) {
    let t2 = base_sd * base_sd;
    let s2 = sd * sd;
    let denom = from_usize::<F>(n_c) * t2 + s2;
    (t2 * sum_se / denom, t2 * s2 / denom)
}

/// Log-weights for relabelling observation `i`: one entry per existing class
/// (with `i` itself excluded from the counts) followed by the new-class entry.
///
/// Existing class `c`: `log n_{−i,c} + log(φ_σ(e − ϑ_c) + φ_σ(e + ϑ_c))`, the
/// urn weight with the sign summed out. New class: `log 2α` plus either the
/// integrated kernel `log φ_{√(σ²+τ₁²)}(e)` or, when `aux` is given,
/// `log φ_σ(e − aux)`. Classes left empty by excluding `i` get `−∞`.
pub fn label_log_weights<F: Real>(
    assign: &ClassAssignment<F>,
    i: usize,
    e: F,
    sd: F,
    prior: &SdpPrior<F>,
    aux: Option<F>,
    out: &mut Vec<F>,
) {
    out.clear();
    let own = assign.labels.get(i).copied().unwrap_or(usize::MAX);
    for (c, (&loc, &n)) in assign.locations.iter().zip(&assign.counts).enumerate() {
        let n_ex = if c == own { n - 1 } else { n };
        if n_ex == 0 {
            out.push(F::neg_infinity());
        } else {
            let [a, b] = sign_log_weights(e, loc, sd);
            out.push(from_usize::<F>(n_ex).ln() + log_add_exp(a, b));
        }
    }
    let ln_two_alpha = (lit::<F>(2.0) * prior.concentration).ln();
    out.push(match aux {
        None => ln_two_alpha + ln_normal_pdf(e, (sd * sd + prior.base_sd * prior.base_sd).sqrt()),
        Some(z) => ln_two_alpha + ln_normal_pdf(e - z, sd),
    });
}

/// One scan over all observations (label, then sign), followed by a refresh
/// of every class location. Empty classes are removed as they arise.
///
/// Panics if `residuals` and the assignment disagree in length or the count
/// cache is corrupt.
pub fn gibbs_class_sweep<F: Real, R: RngCore + ?Sized>(
    rng: &mut R,
    assign: &mut ClassAssignment<F>,
    residuals: &[F],
    sd: F,
    prior: &SdpPrior<F>,
    mode: NewClusterMode,
) {
    assert_eq!(
        residuals.len(),
        assign.n_obs(),
        "one residual per assigned observation"
    );
    let t2 = prior.base_sd * prior.base_sd;
    let s2 = sd * sd;
    let mut lw: Vec<F> = Vec::with_capacity(assign.n_classes() + 2);

    for (i, &e) in residuals.iter().enumerate() {
        let own_z = assign.latent(i);
        let emptied = assign.detach(i);
        let aux = match mode {
            NewClusterMode::Integrated => None,
            NewClusterMode::AuxiliaryDraw => Some(match emptied {
                Some(_) => own_z,
                None => normal(rng, F::zero(), prior.base_sd),
            }),
        };
        // `i` is detached, so no exclusion is needed when forming the weights.
        lw.clear();
        for (&loc, &n) in assign.locations.iter().zip(&assign.counts) {
            let [a, b] = sign_log_weights(e, loc, sd);
            lw.push(from_usize::<F>(n).ln() + log_add_exp(a, b));
        }
        let ln_two_alpha = (lit::<F>(2.0) * prior.concentration).ln();
        lw.push(match aux {
            None => ln_two_alpha + ln_normal_pdf(e, (s2 + t2).sqrt()),
            Some(z) => ln_two_alpha + ln_normal_pdf(e - z, sd),
        });

        let k = categorical_log(rng, &lw);
        if k == assign.locations.len() {
            let (s, loc) = match aux {
                None => {
                    let s: i8 = if F::draw_open01(rng) < lit(0.5) { 1 } else { -1 };
                    let (m, v) = class_location_posterior(sign_value::<F>(s) * e, 1, sd, prior.base_sd);
                    (s, normal(rng, m, v.sqrt()))
                }
                // The new latent value is the auxiliary value itself. Its
                // representation (s, ϑ) vs (−s, −ϑ) is a fair coin; always
                // picking s = +1 biases the sign.
                Some(z) => {
                    let s: i8 = if F::draw_open01(rng) < lit(0.5) { 1 } else { -1 };
                    (s, sign_value::<F>(s) * z)
                }
            };
            assign.locations.push(loc);
            assign.counts.push(1);
            assign.labels[i] = k;
            assign.signs[i] = s;
        } else {
            assign.counts[k] += 1;
            assign.labels[i] = k;
        }

        let loc = assign.locations[assign.labels[i]];
        let sw = sign_log_weights(e, loc, sd);
        assign.signs[i] = if categorical_log(rng, &sw) == 0 { 1 } else { -1 };
    }

    let kc = assign.locations.len();
    let mut sum_se = vec![F::zero(); kc];
    for (i, &e) in residuals.iter().enumerate() {
        sum_se[assign.labels[i]] = sum_se[assign.labels[i]] + sign_value::<F>(assign.signs[i]) * e;
    }
    for c in 0..kc {
        let (m, v) = class_location_posterior(sum_se[c], assign.counts[c], sd, prior.base_sd);
        assign.locations[c] = normal(rng, m, v.sqrt());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngdist::RngStream;

    #[test]
    fn tiny_concentration_puts_mass_on_first_stick() {
        let prior = SdpPrior::new(1e-8_f64, 1.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let hits = (0..1000)
            .filter(|_| stick_breaking_sample(&mut rng, &prior, 10).atoms[0].weight > 0.999)
            .count();
        assert!(hits > 990);
    }

    #[test]
    fn long_truncation_leaves_negligible_remainder() {
        let prior = SdpPrior::new(1.0_f64, 1.0).unwrap();
        let mut rng = RngStream::new(3, 1);
        for _ in 0..50 {
            let m = stick_breaking_sample(&mut rng, &prior, 200);
            assert!(m.remainder_mass < 1e-20);
            assert!((m.total_mass() - 1.0).abs() < 1e-12);
            assert!(m.atoms.iter().all(|a| a.location >= 0.0));
            assert_eq!(m.density(1.3, 0.7), m.density(-1.3, 0.7));
        }
        assert!(prior.default_truncation(1e-8) >= 27);
    }

    #[test]
    fn posterior_of_empty_sample_is_prior() {
        let prior = SdpPrior::new(1.5_f64, 2.0).unwrap();
        let post = sdp_posterior(&prior, &[]);
        assert_eq!(post.concentration, 1.5);
        assert_eq!(post.base.prior_mass, 1.0);
        assert!(post.base.atoms.is_empty());
        let pred = predictive_weights(&prior, &[]);
        assert_eq!(pred.base_mass, 1.0);
        assert!(pred.atoms.is_empty());
    }

    #[test]
    fn sign_weights_tie_at_zero() {
        let [a, b] = sign_log_weights(0.0_f64, 0.0, 1.3);
        assert_eq!(a, b);
    }

    #[test]
    fn class_location_posterior_two_members() {
        let (m, v) = class_location_posterior(2.0_f64, 2, 1.0, 1.0);
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn signed_counts_exclude_self() {
        let a = ClassAssignment::from_parts(vec![0, 0, 1, 0], vec![1, -1, 1, 1], vec![0.5_f64, 2.0])
            .unwrap();
        assert_eq!(a.signed_counts_excluding(0, 0), (1, 1));
        assert_eq!(a.signed_counts_excluding(2, 0), (2, 1));
        assert_eq!(a.signed_counts_excluding(2, 1), (0, 0));
        assert_eq!(a.latent(1), -0.5);
        assert!(ClassAssignment::from_parts(vec![0, 2], vec![1, 1], vec![0.0_f64, 1.0, 2.0]).is_err());
        assert!(ClassAssignment::from_parts(vec![0], vec![0], vec![0.0_f64]).is_err());
    }

    #[test]
    fn class_sweep_keeps_bookkeeping() {
        let prior = SdpPrior::new(1.0_f64, 2.0).unwrap();
        let mut rng = RngStream::new(9, 0);
        let e: Vec<f64> = (0..40).map(|i| ((i * 7919) % 23) as f64 / 3.0 - 3.5).collect();
        for mode in [NewClusterMode::Integrated, NewClusterMode::AuxiliaryDraw] {
            let mut a = ClassAssignment::single_class(e.len());
            for _ in 0..200 {
                gibbs_class_sweep(&mut rng, &mut a, &e, 0.6, &prior, mode);
                a.assert_invariants();
            }
            assert!(a.n_classes() >= 1);
        }
    }

    #[test]
    fn label_weights_exclude_own_singleton() {
        let prior = SdpPrior::new(1.0_f64, 1.0).unwrap();
        let a = ClassAssignment::from_parts(vec![0, 1], vec![1, 1], vec![0.0_f64, 1.0]).unwrap();
        let mut lw = Vec::new();
        label_log_weights(&a, 0, 0.2, 1.0, &prior, None, &mut lw);
        assert_eq!(lw.len(), 3);
        assert_eq!(lw[0], f64::NEG_INFINITY);
        assert!(lw[1].is_finite() && lw[2].is_finite());
    }
}
