//! Exactly solvable nested models for checking the estimator end to end.

mod discrete;
mod gaussian;

pub use discrete::{DiscreteNestedSpec, DiscreteProblem, ExactTerms, TableSampler};
pub use gaussian::{GaussianNestedSpec, GaussianProblem, GaussianSampler};
