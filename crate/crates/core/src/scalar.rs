//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All math is written against [`Real`], which is implemented for `f32` and
//! `f64`. Randomness enters through a handful of primitive draws so that the
//! generic code never has to name `rand_distr` bounds itself.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use rand_distr::{Beta, Distribution, Gamma, Open01, StandardNormal, StudentT};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Standard normal variate.
    fn draw_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Uniform variate on the open interval (0, 1).
    fn draw_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Gamma variate with unit scale. `shape` must be positive.
    fn draw_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self) -> Self;
    /// Beta variate. Both parameters must be positive.
    fn draw_beta<R: Rng + ?Sized>(rng: &mut R, a: Self, b: Self) -> Self;
    /// Student-t variate. `df` must be positive.
    fn draw_student_t<R: Rng + ?Sized>(rng: &mut R, df: Self) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn draw_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
            #[inline]
            fn draw_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }
            fn draw_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self) -> Self {
                Gamma::new(shape, 1.0)
                    .expect("gamma shape validated by caller")
                    .sample(rng)
            }
            fn draw_beta<R: Rng + ?Sized>(rng: &mut R, a: Self, b: Self) -> Self {
                Beta::new(a, b)
                    .expect("beta parameters validated by caller")
                    .sample(rng)
            }
            fn draw_student_t<R: Rng + ?Sized>(rng: &mut R, df: Self) -> Self {
                StudentT::new(df)
                    .expect("degrees of freedom validated by caller")
                    .sample(rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("finite literal representable in scalar type")
}

#[inline]
pub fn from_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub fn to_f64<F: Real>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp<F: Real>(a: F, b: F) -> F {
    if a == F::neg_infinity() {
        return b;
    }
    if b == F::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(sum(exp(xs)))`, max-shifted.
pub fn log_sum_exp<F: Real>(xs: &[F]) -> F {
    let max = xs.iter().copied().fold(F::neg_infinity(), F::max);
    if max == F::neg_infinity() {
        return max;
    }
    if max == F::infinity() {
        return max;
    }
    let acc: F = xs.iter().map(|&x| (x - max).exp()).sum();
    max + acc.ln()
}
