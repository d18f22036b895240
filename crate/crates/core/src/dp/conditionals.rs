//! Full-conditional updates for the auxiliary and full DP models.
//!
//! In both models the kernel variance is `k / alpha`. The models differ in
//! what concentrates the Dirichlet process: the full model reuses `alpha`,
//! the auxiliary model uses its own `alpha_prime` (or the fixed `alpha0`).

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cluster::ClusterState;
use super::hyper::DpPrior;
use crate::error::{Result, SdrError};
use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub clusters: ClusterState,
    /// Kernel precision factor (and, in the full model, the DP concentration).
    pub alpha: f64,
    /// Separate DP concentration of the auxiliary model.
    pub alpha_prime: Option<f64>,
}

impl ChainState {
    /// All observations in one cluster at the sample mean (or `m` for empty
    /// data); `alpha` and `alpha_prime` at the prior mean.
    pub fn initial(data: &[f64], prior: &DpPrior, with_alpha_prime: bool) -> Self {
        let centre = if data.is_empty() {
            prior.m
        } else {
            data.iter().sum::<f64>() / data.len() as f64
        };
        let a = prior.prior_mean_alpha();
        ChainState {
            clusters: ClusterState::single(data.len(), centre),
            alpha: a,
            alpha_prime: with_alpha_prime.then_some(a),
        }
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.num_clusters()
    }

    pub fn check(&self) -> Result<()> {
        self.clusters.check()?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SdrError::Domain(format!("alpha = {}", self.alpha)));
        }
        if let Some(a) = self.alpha_prime {
            if !(a > 0.0 && a.is_finite()) {
                return Err(SdrError::Domain(format!("alpha_prime = {a}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| SdrError::Domain(format!("Gamma({shape}, rate {rate}): {e}")))?;
    Ok(g.sample(rng))
}

fn normal_draw<R: Rng + ?Sized>(mean: f64, variance: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + variance.sqrt() * z
}

/// Conjugate posterior for a cluster mean with prior `N(m, sigma2)` after
/// observing `count` points summing to `sum` at variance `kernel_var`.
fn cluster_value_posterior(prior: &DpPrior, kernel_var: f64, count: f64, sum: f64) -> (f64, f64) {
    let precision = 1.0 / prior.sigma2 + count / kernel_var;
    let mean = (prior.m / prior.sigma2 + sum / kernel_var) / precision;
    (mean, 1.0 / precision)
}

/// Resample `mu_i` from its Polya-urn full conditional.
///
/// Existing cluster `j` gets weight `n_{-i,j} * N(x_i; mu*_j, k/alpha)`; a new
/// cluster gets `concentration * N(x_i; m, sigma2 + k/alpha)` and its value is
/// drawn from the conjugate posterior given `x_i` alone.
pub fn sample_mu_conditional<R: Rng + ?Sized>(
    i: usize,
    state: &mut ChainState,
    concentration: f64,
    data: &[f64],
    prior: &DpPrior,
    rng: &mut R,
) -> Result<()> {
    let mut weights = Vec::with_capacity(state.num_clusters() + 1);
    sample_mu_with_buffer(i, state, concentration, data, prior, rng, &mut weights)
}

fn sample_mu_with_buffer<R: Rng + ?Sized>(
    i: usize,
    state: &mut ChainState,
    concentration: f64,
    data: &[f64],
    prior: &DpPrior,
    rng: &mut R,
    weights: &mut Vec<f64>,
) -> Result<()> {
    let n = state.clusters.n();
    if i >= n {
        return Err(SdrError::InvalidArgument(format!("observation {i} out of range (n = {n})")));
    }
    let x = data[i];
    let kernel_var = prior.k / state.alpha;
    state.clusters.detach(i);

    // log weights up to a shared constant -0.5 ln(2 pi)
    weights.clear();
    let ln_kernel_norm = -0.5 * kernel_var.ln();
    for (&size, &value) in state.clusters.sizes().iter().zip(state.clusters.values()) {
        let z = x - value;
        weights.push((size as f64).ln() + ln_kernel_norm - 0.5 * z * z / kernel_var);
    }
    let new_var = prior.sigma2 + kernel_var;
    let z = x - prior.m;
    weights.push(concentration.ln() - 0.5 * new_var.ln() - 0.5 * z * z / new_var);

    let top = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(SdrError::NonFiniteWeight { index: i });
    }
    let mut total = 0.0;
    for w in weights.iter_mut() {
        *w = (*w - top).exp();
        total += *w;
    }
    if !total.is_finite() {
        return Err(SdrError::NonFiniteWeight { index: i });
    }

    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut choice = weights.len() - 1;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            choice = j;
            break;
        }
    }

    if choice == weights.len() - 1 {
        let (mean, var) = cluster_value_posterior(prior, kernel_var, 1.0, x);
        state.clusters.open(i, normal_draw(mean, var, rng));
    } else {
        state.clusters.attach(i, choice);
    }
    Ok(())
}

/// Redraw every cluster value from its conjugate posterior given the current
/// partition.
pub fn remix_cluster_values<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &[f64],
    prior: &DpPrior,
    rng: &mut R,
) {
    let kernel_var = prior.k / state.alpha;
    let sums = state.clusters.cluster_sums(data);
    for (j, sum) in sums.into_iter().enumerate() {
        let count = state.clusters.sizes()[j] as f64;
        let (mean, var) = cluster_value_posterior(prior, kernel_var, count, sum);
        state.clusters.set_value(j, normal_draw(mean, var, rng));
    }
}

/// Draw the kernel precision factor of the auxiliary model from
/// `Gamma(shape + n/2, rate + s/(2k))`, `s = sum (x_i - mu_i)^2`.
pub fn update_alpha_kernel<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &[f64],
    prior: &DpPrior,
    rng: &mut R,
) -> Result<()> {
    let s = state.clusters.residual_ss(data);
    if !s.is_finite() {
        return Err(SdrError::NonFinite(format!("residual sum of squares {s}")));
    }
    let (shape, rate) = alpha_kernel_posterior(data.len(), s, prior);
    state.alpha = gamma_draw(shape, rate, rng)?;
    Ok(())
}

/// Shape and rate of the kernel-precision conditional given `n` residuals with
/// sum of squares `s`.
pub fn alpha_kernel_posterior(n: usize, s: f64, prior: &DpPrior) -> (f64, f64) {
    (prior.shape + 0.5 * n as f64, prior.rate + s / (2.0 * prior.k))
}

/// Update the auxiliary concentration given the current cluster count `d`.
///
/// Uses the Escobar-West augmentation: `eta ~ Beta(alpha' + 1, n)`, then
/// `alpha'` from the two-component mixture
/// `pi Gamma(a + d, b - ln eta) + (1 - pi) Gamma(a + d - 1, b - ln eta)` with
/// `pi / (1 - pi) = (a + d - 1) / (n (b - ln eta))`. This leaves
/// `p(alpha' | d) ∝ Gamma(alpha'; a, b) alpha'^d Gamma(alpha') / Gamma(alpha' + n)`
/// invariant.
pub fn update_alpha_prime<R: Rng + ?Sized>(state: &mut ChainState, prior: &DpPrior, rng: &mut R) -> Result<()> {
    let current = state
        .alpha_prime
        .ok_or_else(|| SdrError::InvalidArgument("alpha_prime update on a state without alpha_prime".into()))?;
    let d = state.num_clusters();
    let n = state.clusters.n();
    state.alpha_prime = Some(escobar_west_step(current, d, n, prior, rng)?);
    Ok(())
}

pub(crate) fn escobar_west_step<R: Rng + ?Sized>(
    current: f64,
    d: usize,
    n: usize,
    prior: &DpPrior,
    rng: &mut R,
) -> Result<f64> {
    if d < 1 || d > n {
        return Err(SdrError::Domain(format!("cluster count {d} outside 1..={n}")));
    }
    let eta = Beta::new(current + 1.0, n as f64)
        .map_err(|e| SdrError::Domain(format!("Beta({}, {n}): {e}", current + 1.0)))?
        .sample(rng);
    let rate = prior.rate - eta.ln();
    let d = d as f64;
    let odds = (prior.shape + d - 1.0) / (n as f64 * rate);
    let shape = if rng.random::<f64>() < odds / (1.0 + odds) {
        prior.shape + d
    } else {
        prior.shape + d - 1.0
    };
    gamma_draw(shape, rate, rng)
}

/// Unnormalized log conditional of `alpha` in the full model, where it is both
/// the kernel precision factor and the DP concentration.
pub fn full_alpha_ln_target(alpha: f64, n: usize, d: usize, s: f64, prior: &DpPrior) -> f64 {
    if alpha.is_nan() || alpha <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let n = n as f64;
    (prior.shape - 1.0 + 0.5 * n + d as f64) * alpha.ln() - alpha * (prior.rate + s / (2.0 * prior.k))
        + ln_gamma(alpha)
        - ln_gamma(alpha + n)
}

/// Random-walk step size on `ln alpha`, adapted toward a target acceptance
/// rate while `adapting` is set and frozen afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTuner {
    pub step: f64,
    pub adapting: bool,
    pub proposed: u64,
    pub accepted: u64,
    pub rejected_nonfinite: u64,
    window_proposed: u32,
    window_accepted: u32,
}

impl StepTuner {
    pub const TARGET_ACCEPTANCE: f64 = 0.44;
    const WINDOW: u32 = 50;

    pub fn new(step: f64) -> Self {
        StepTuner {
            step,
            adapting: true,
            proposed: 0,
            accepted: 0,
            rejected_nonfinite: 0,
            window_proposed: 0,
            window_accepted: 0,
        }
    }

    pub fn frozen(step: f64) -> Self {
        StepTuner { adapting: false, ..Self::new(step) }
    }

    /// Stop adapting and reset the acceptance counters.
    pub fn freeze(&mut self) {
        self.adapting = false;
        self.proposed = 0;
        self.accepted = 0;
        self.rejected_nonfinite = 0;
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
        if !self.adapting {
            return;
        }
        self.window_proposed += 1;
        self.window_accepted += accepted as u32;
        if self.window_proposed == Self::WINDOW {
            let rate = self.window_accepted as f64 / Self::WINDOW as f64;
            self.step = (self.step * (2.0 * (rate - Self::TARGET_ACCEPTANCE)).exp()).clamp(1e-3, 10.0);
            self.window_proposed = 0;
            self.window_accepted = 0;
        }
    }
}

/// Metropolis-within-Gibbs update of `alpha` in the full model: Gaussian
/// random walk on `ln alpha`. Returns whether the proposal was accepted.
pub fn update_alpha_full<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &[f64],
    prior: &DpPrior,
    tuner: &mut StepTuner,
    rng: &mut R,
) -> Result<bool> {
    let s = state.clusters.residual_ss(data);
    if !s.is_finite() {
        return Err(SdrError::NonFinite(format!("residual sum of squares {s}")));
    }
    let n = data.len();
    let d = state.num_clusters();
    let current = state.alpha;
    let z: f64 = rng.sample(StandardNormal);
    let proposal = current * (tuner.step * z).exp();
    // the ln(alpha) Jacobian turns the target on alpha into one on ln(alpha)
    let ln_ratio = full_alpha_ln_target(proposal, n, d, s, prior) + proposal.ln()
        - full_alpha_ln_target(current, n, d, s, prior)
        - current.ln();
    if !ln_ratio.is_finite() && ln_ratio != f64::NEG_INFINITY {
        tuner.rejected_nonfinite += 1;
        tuner.record(false);
        return Ok(false);
    }
    let accept = rng.random::<f64>().ln() < ln_ratio;
    if accept {
        state.alpha = proposal;
    }
    tuner.record(accept);
    Ok(accept)
}

fn sweep_mu<R: Rng + ?Sized>(
    state: &mut ChainState,
    concentration: impl Fn(&ChainState) -> f64,
    data: &[f64],
    prior: &DpPrior,
    rng: &mut R,
) -> Result<()> {
    let mut weights = Vec::new();
    let c = concentration(state);
    for i in 0..state.clusters.n() {
        sample_mu_with_buffer(i, state, c, data, prior, rng, &mut weights)?;
    }
    remix_cluster_values(state, data, prior, rng);
    Ok(())
}

/// What concentrates the Dirichlet process in the auxiliary model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxConcentration {
    /// A separate `alpha' ~ Gamma(nu1, nu2)`, decoupled from the kernel.
    #[default]
    GammaPrior,
    /// The simpler model's fixed `alpha0`, making the auxiliary prior exactly
    /// `P1(alpha) x P0(mu)`.
    Fixed,
}

/// One systematic scan of the auxiliary model: every `mu_i` (concentration
/// `alpha'`, or `alpha0` when fixed), the cluster values, the kernel
/// precision, then `alpha'`.
pub fn gibbs_sweep_auxiliary<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &[f64],
    prior: &DpPrior,
    rng: &mut R,
) -> Result<()> {
    let alpha0 = prior.alpha0;
    sweep_mu(state, |s| s.alpha_prime.unwrap_or(alpha0), data, prior, rng)?;
    update_alpha_kernel(state, data, prior, rng)?;
    if state.alpha_prime.is_some() {
        update_alpha_prime(state, prior, rng)?;
    }
    Ok(())
}

/// One systematic scan of the full model: every `mu_i` with concentration
/// `alpha`, the cluster values, then `alpha`.
pub fn gibbs_sweep_full<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &[f64],
    prior: &DpPrior,
    tuner: &mut StepTuner,
    rng: &mut R,
) -> Result<()> {
    sweep_mu(state, |s| s.alpha, data, prior, rng)?;
    update_alpha_full(state, data, prior, tuner, rng)?;
    Ok(())
}
