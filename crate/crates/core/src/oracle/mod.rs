//! Reference computations that do not share code paths with the estimators
//! they check: exhaustive enumeration, dense grids, quadrature, and forward
//! simulation.

pub mod geweke;
pub mod grid;
pub mod partitions;
pub mod quadrature;
pub mod stats;

use rand::Rng;

use crate::validation::DiscreteNestedSpec;

/// A random finite nested model with strictly positive tables.
pub fn random_discrete_spec<R: Rng + ?Sized>(rng: &mut R, n_theta: usize, n_psi: usize) -> DiscreteNestedSpec {
    let mut normalised = |len: usize| {
        let raw: Vec<f64> = (0..len).map(|_| 0.05 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect::<Vec<f64>>()
    };
    let flat = normalised(n_theta * n_psi);
    let prior1 = flat.chunks(n_psi).map(<[f64]>::to_vec).collect();
    let prior0 = normalised(n_psi);
    let likelihood = (0..n_theta)
        .map(|_| (0..n_psi).map(|_| 0.1 + 3.0 * rng.random::<f64>()).collect())
        .collect();
    DiscreteNestedSpec {
        theta_support: (0..n_theta).map(|t| format!("t{t}")).collect(),
        psi_support: (0..n_psi).map(|j| format!("p{j}")).collect(),
        theta0: rng.random_range(0..n_theta),
        prior1,
        prior0,
        likelihood,
    }
}
