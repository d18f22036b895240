//! Forward (prior-predictive) simulation of both DP models.

use rand::Rng;
use rand_distr::StandardNormal;

use super::cluster::ClusterState;
use super::conditionals::{gamma_draw, ChainState};
use super::hyper::DpPrior;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Concentration `alpha' ~ Gamma` independent of the kernel precision.
    Auxiliary,
    /// Concentration fixed at `alpha0`, independent of the kernel precision.
    AuxiliaryFixed,
    /// `alpha` plays both roles.
    Full,
}

/// Draw a partition of `n` items from the Chinese restaurant process with the
/// given concentration and attach base-measure values `N(m, sigma2)`.
pub fn sample_partition<R: Rng + ?Sized>(n: usize, concentration: f64, prior: &DpPrior, rng: &mut R) -> ClusterState {
    let mut assignments = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    for i in 0..n {
        let u = rng.random::<f64>() * (i as f64 + concentration);
        let mut acc = 0.0;
        let mut chosen = None;
        for (j, &s) in sizes.iter().enumerate() {
            acc += s as f64;
            if u < acc {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.unwrap_or_else(|| {
            sizes.push(0);
            sizes.len() - 1
        });
        sizes[j] += 1;
        assignments.push(j);
    }
    let values = (0..sizes.len())
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            prior.m + prior.sigma2.sqrt() * z
        })
        .collect();
    ClusterState::from_parts(assignments, values).expect("CRP assignments are dense")
}

/// Draw observations `x_i ~ N(mu_i, k / alpha)` given a state.
pub fn sample_data<R: Rng + ?Sized>(state: &ChainState, prior: &DpPrior, rng: &mut R) -> Vec<f64> {
    let sd = (prior.k / state.alpha).sqrt();
    (0..state.clusters.n())
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            state.clusters.mean_of(i) + sd * z
        })
        .collect()
}

/// One joint draw of parameters and data from the prior of the chosen model.
pub fn sample_joint<R: Rng + ?Sized>(
    n: usize,
    kind: ModelKind,
    prior: &DpPrior,
    rng: &mut R,
) -> Result<(ChainState, Vec<f64>)> {
    let alpha = gamma_draw(prior.shape, prior.rate, rng)?;
    let (concentration, alpha_prime) = match kind {
        ModelKind::Full => (alpha, None),
        ModelKind::AuxiliaryFixed => (prior.alpha0, None),
        ModelKind::Auxiliary => {
            let a = gamma_draw(prior.shape, prior.rate, rng)?;
            (a, Some(a))
        }
    };
    let clusters = sample_partition(n, concentration, prior, rng);
    let state = ChainState { clusters, alpha, alpha_prime };
    let data = sample_data(&state, prior, rng);
    Ok((state, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::hyper::DpHyperParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn crp_cluster_count_mean() {
        // E[d] = sum_{i<n} c / (c + i)
        let prior = DpHyperParams::default().resolve(Default::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n, c) = (10, 1.5);
        let reps = 40_000;
        let draws: Vec<f64> = (0..reps)
            .map(|_| sample_partition(n, c, &prior, &mut rng).num_clusters() as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / reps as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let exact: f64 = (0..n).map(|i| c / (c + i as f64)).sum();
        assert!((mean - exact).abs() < 4.0 * (var / reps as f64).sqrt());
    }

    #[test]
    fn joint_draw_shapes() {
        let prior = DpHyperParams::default().resolve(Default::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (st, x) = sample_joint(7, ModelKind::Auxiliary, &prior, &mut rng).unwrap();
        st.check().unwrap();
        assert_eq!(x.len(), 7);
        assert!(st.alpha_prime.is_some());
        let (st, _) = sample_joint(7, ModelKind::Full, &prior, &mut rng).unwrap();
        assert!(st.alpha_prime.is_none());
    }
}
