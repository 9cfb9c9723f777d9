//! Semiparametric Bayesian regression with symmetrized Dirichlet process
//! mixture errors.
//!
//! The crate is generic over the scalar type through [`Real`] (`f32`/`f64`);
//! the aliases at the bottom of this file fix the common `f64` instantiation.

pub mod baselines;
pub mod bvm;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod rngdist;
pub mod sampler;
pub mod scalar;
pub mod sdp;

pub use error::{Error, Result};
pub use rngdist::{ErrorSpec, InverseGammaParams, RngStream};
pub use scalar::Real;
pub use sdp::{ClassAssignment, NewClusterMode, SdpPrior, SymmetricMixingMeasure};

pub type ErrorSpec64 = rngdist::ErrorSpec<f64>;
pub type SdpPrior64 = sdp::SdpPrior<f64>;
pub type MixingMeasure = sdp::SymmetricMixingMeasure<f64>;
pub type Assignment = sdp::ClassAssignment<f64>;

pub type Dataset = models::PanelDataset<f64>;
pub type Priors = sampler::PriorConfig<f64>;
pub type State = sampler::ChainState<f64>;
pub type Summary = sampler::PosteriorSummary<f64>;
pub type Fit = baselines::FitResult<f64>;
pub type TrueModel = bvm::TrueErrorModel<f64>;
