//! Sparse Gibbs aggregation for one-step time-series forecasting.
//!
//! A dictionary of predictors `g_1..g_p` acting on the last `q` observations is
//! combined linearly, `f_θ = Σ θ_j g_j`. The estimator is the mean of the Gibbs
//! measure whose density with respect to a sparsity prior is proportional to
//! `exp(-λ r(θ))`, where `r` is the in-sample mean squared one-step error. The
//! mean is computed with a reversible-jump sampler over support sets.
//!
//! Alongside the estimator the crate provides:
//!
//! * [`simulate`]: bounded and Gaussian-innovation AR, MA and nonlinear
//!   autoregressive simulators with deterministic seeding;
//! * [`baselines`]: least-squares and Yule–Walker AR fits with AIC order selection;
//! * [`bounds`]: mixing aggregates, the oracle-inequality temperature and
//!   remainder, Kullback divergence and the Donsker–Varadhan identity.

pub mod baselines;
pub mod basis;
pub mod bounds;
pub mod error;
pub mod prior;
pub mod rng;
pub mod sampler;
pub mod series;
pub mod simulate;

pub use basis::{BasisKind, PredictorBasis};
pub use error::{Error, Result};
pub use series::{empirical_risk, holdout_risk, RiskReport, SparseParam, TimeSeries};
