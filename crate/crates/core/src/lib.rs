//! Bayes factors for nested models as Savage-Dickey ratios of Radon-Nikodym
//! derivatives, with a Dirichlet-process random-effects instance and exactly
//! solvable validation models.
//!
//! The estimator factors `B01` into a density-ratio term evaluated on draws
//! from an auxiliary posterior and a correction term evaluated on draws from
//! the full posterior. Each model plugs in through [`NestedProblem`].

pub mod dp;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod selftest;
pub mod special;
pub mod validation;

pub use error::{Result, SdrError, Term};
pub use estimator::{
    derive_seeds, estimate_bayes_factor, estimate_bayes_factor_with, estimate_left_term, estimate_left_term_with,
    estimate_right_term, estimate_right_term_with, estimate_term, mean_and_sd, replicate, replicate_with, Accumulation,
    BayesFactorEstimate, EstimatorOptions, NestedProblem, PosteriorSampler, ReplicateConfig, ReplicateSeeds,
    ReplicateSummary, TermEstimate,
};
