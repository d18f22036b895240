//! Geweke's joint-distribution test for the DP Gibbs samplers.
//!
//! The marginal-conditional simulator draws parameters and data straight from
//! the prior. The successive-conditional simulator alternates one Gibbs sweep
//! with a fresh draw of the data given the parameters. If the sweep leaves the
//! posterior invariant, both simulators target the same joint law, so their
//! moments must agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{batch_means_se, iid_se, mean_var};
use crate::dp::forward::{sample_data, sample_joint, ModelKind};
use crate::dp::{gibbs_sweep_auxiliary, gibbs_sweep_full, ChainState, DpPrior, StepTuner};
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentComparison {
    pub name: String,
    pub forward_mean: f64,
    pub forward_se: f64,
    pub chain_mean: f64,
    pub chain_se: f64,
}

impl MomentComparison {
    /// Difference in units of the combined standard error.
    pub fn z(&self) -> f64 {
        (self.chain_mean - self.forward_mean) / self.forward_se.hypot(self.chain_se)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GewekeReport {
    pub comparisons: Vec<MomentComparison>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.comparisons.iter().map(|c| c.z().abs()).fold(0.0, f64::max)
    }
}

type Extract = fn(&ChainState) -> f64;

fn functionals(kind: ModelKind) -> Vec<(&'static str, Extract)> {
    let mut out: Vec<(&'static str, Extract)> = vec![
        ("alpha", |s| s.alpha),
        ("d", |s| s.num_clusters() as f64),
    ];
    if kind == ModelKind::Auxiliary {
        out.push(("alpha_prime", |s| s.alpha_prime.unwrap_or(f64::NAN)));
    }
    out
}

/// Run both simulators for `iterations` steps at sample size `n`.
pub fn geweke_test(kind: ModelKind, n: usize, iterations: usize, prior: &DpPrior, seed: u64) -> Result<GewekeReport> {
    let fs = functionals(kind);
    let mut forward: Vec<Vec<f64>> = vec![Vec::with_capacity(iterations); fs.len()];
    let mut chain: Vec<Vec<f64>> = vec![Vec::with_capacity(iterations); fs.len()];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..iterations {
        let (state, _) = sample_joint(n, kind, prior, &mut rng)?;
        for (series, (_, f)) in forward.iter_mut().zip(&fs) {
            series.push(f(&state));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let (mut state, mut data) = sample_joint(n, kind, prior, &mut rng)?;
    let mut tuner = StepTuner::frozen(0.5);
    for _ in 0..iterations {
        match kind {
            ModelKind::Full => gibbs_sweep_full(&mut state, &data, prior, &mut tuner, &mut rng)?,
            _ => gibbs_sweep_auxiliary(&mut state, &data, prior, &mut rng)?,
        }
        data = sample_data(&state, prior, &mut rng);
        for (series, (_, f)) in chain.iter_mut().zip(&fs) {
            series.push(f(&state));
        }
    }

    let batches = (iterations / 1000).clamp(10, 200);
    let comparisons = fs
        .iter()
        .zip(forward.iter().zip(&chain))
        .map(|((name, _), (fwd, ch))| MomentComparison {
            name: name.to_string(),
            forward_mean: mean_var(fwd).0,
            forward_se: iid_se(fwd),
            chain_mean: mean_var(ch).0,
            chain_se: batch_means_se(ch, batches),
        })
        .collect();
    Ok(GewekeReport { comparisons })
}
