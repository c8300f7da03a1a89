//! Ratings learned from comparison outcomes.
//!
//! A shared-weight rating estimator maps each item's features to a scalar
//! rating; ratings of the items in one comparison are joined by a softmax and
//! trained with cross-entropy against the observed winner. An optional
//! advantage adjuster with a skip connection absorbs systematic unfairness
//! (position or home advantage, environment covariates) so the estimator stays
//! fair. Classical Bradley-Terry maximum likelihood and Elo live in [`bt`] and
//! serve as baselines.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix them to `f64`.

pub mod bt;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod io;
pub mod nbtr;
pub mod nn;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type BTScores = bt::BTScores<f64>;
pub type HomeAdvantage = bt::HomeAdvantage<f64>;
pub type EloConfig = bt::EloConfig<f64>;
pub type DenseNet = nn::DenseNet<f64>;
pub type AdamState = nn::AdamState<f64>;
pub type ComparisonRecord = nbtr::ComparisonRecord<f64>;
pub type Dataset = nbtr::Dataset<f64>;
pub type NbtrModel = nbtr::NbtrModel<f64>;
