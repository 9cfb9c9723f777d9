//! Dense row-major helpers for the small (p ≤ ~10) systems the samplers solve.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower Cholesky factor of a symmetric positive definite `n×n` matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<F> {
    n: usize,
    lower: Vec<F>,
}

impl<F: Real> Cholesky<F> {
    pub fn new(a: &[F], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} matrix, got {} entries",
                a.len()
            )));
        }
        let mut l = vec![F::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > F::zero()) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite(format!(
                            "pivot {i} is {s}"
                        )));
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }

    pub fn inverse(&self) -> Vec<F> {
        let n = self.n;
        let mut inv = vec![F::zero(); n * n];
        let mut e = vec![F::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = F::zero());
            e[j] = F::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }

    pub fn ln_det(&self) -> F {
        let two = F::one() + F::one();
        (0..self.n).map(|i| self.lower[i * self.n + i].ln()).sum::<F>() * two
    }

    /// Draws from `N(mean, A⁻¹)` where `A` is the factored matrix.
    pub fn sample_precision<R: RngCore + ?Sized>(&self, rng: &mut R, mean: &[F]) -> Vec<F> {
        // x = mean + L^{-T} z
        let n = self.n;
        let l = &self.lower;
        let mut v: Vec<F> = (0..n).map(|_| F::draw_std_normal(rng)).collect();
        for i in (0..n).rev() {
            let mut s = v[i];
            for k in (i + 1)..n {
                s = s - l[k * n + i] * v[k];
            }
            v[i] = s / l[i * n + i];
        }
        v.iter().zip(mean).map(|(a, m)| *a + *m).collect()
    }
}

/// Rank of a symmetric positive semidefinite matrix by pivoted elimination.
pub fn psd_rank<F: Real>(a: &[F], n: usize, rel_tol: F) -> usize {
    let mut m = a.to_vec();
    let scale = (0..n).map(|i| m[i * n + i].abs()).fold(F::zero(), F::max);
    if scale == F::zero() {
        return 0;
    }
    let mut rank = 0;
    let mut used = vec![false; n];
    for _ in 0..n {
        let (piv, val) = (0..n)
            .filter(|&i| !used[i])
            .map(|i| (i, m[i * n + i]))
            .fold((usize::MAX, F::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if piv == usize::MAX || val <= rel_tol * scale {
            break;
        }
        used[piv] = true;
        rank += 1;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let f = m[i * n + piv] / val;
            for j in 0..n {
                m[i * n + j] = m[i * n + j] - f * m[piv * n + j];
            }
        }
    }
    rank
}
