//! Radon-Nikodym evaluators of the two Bayes-factor terms for the DP model.

use super::conditionals::{alpha_kernel_posterior, ChainState};
use super::hyper::DpPrior;
use crate::error::{Result, SdrError};
use crate::special::{gamma_ln_pdf, ln_gamma};

/// Log Radon-Nikodym derivative of the DP(alpha0) prior on the observation
/// means with respect to the DP(alpha) prior, at a configuration with `d`
/// distinct values among `n`.
///
/// Both laws share the base measure and the cluster-size factorials of the
/// exchangeable partition law, so only the concentration factors survive:
///
/// ```text
/// d (ln alpha0 - ln alpha) + lnG(alpha0) - lnG(alpha0 + n) - lnG(alpha) + lnG(alpha + n)
/// ```
pub fn polya_urn_log_ratio(d: usize, n: usize, alpha0: f64, alpha: f64) -> Result<f64> {
    if n == 0 || d == 0 || d > n {
        return Err(SdrError::Domain(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    if !(alpha0 > 0.0 && alpha0.is_finite() && alpha > 0.0 && alpha.is_finite()) {
        return Err(SdrError::Domain(format!("concentrations must be positive, got {alpha0} and {alpha}")));
    }
    // n = 1 forces d = 1 and the Gamma recurrence cancels every factor
    if alpha0 == alpha || n == 1 {
        return Ok(0.0);
    }
    let n = n as f64;
    Ok(d as f64 * (alpha0.ln() - alpha.ln()) + ln_gamma(alpha0) - ln_gamma(alpha0 + n) - ln_gamma(alpha)
        + ln_gamma(alpha + n))
}

/// Log of the left-term evaluator for an auxiliary-model state: the ratio of
/// the conditional density of the kernel precision given the means and data,
/// `Gamma(shape + n/2, rate + s/(2k))`, to its prior, both at `alpha0`.
pub fn left_term_ln_value_dp(state: &ChainState, data: &[f64], prior: &DpPrior) -> Result<f64> {
    if prior.alpha0.is_nan() || prior.alpha0 <= 0.0 {
        return Err(SdrError::Domain(format!("alpha0 must be positive, got {}", prior.alpha0)));
    }
    if state.clusters.n() != data.len() {
        return Err(SdrError::InvalidArgument(format!(
            "state has {} observations, data has {}",
            state.clusters.n(),
            data.len()
        )));
    }
    let s = state.clusters.residual_ss(data);
    Ok(left_term_ln_value_from_ss(data.len(), s, prior))
}

/// The left-term log evaluator as a function of the residual sum of squares.
pub fn left_term_ln_value_from_ss(n: usize, s: f64, prior: &DpPrior) -> f64 {
    let (shape, rate) = alpha_kernel_posterior(n, s, prior);
    gamma_ln_pdf(prior.alpha0, shape, rate) - gamma_ln_pdf(prior.alpha0, prior.shape, prior.rate)
}

pub fn left_term_value_dp(state: &ChainState, data: &[f64], prior: &DpPrior) -> Result<f64> {
    left_term_ln_value_dp(state, data, prior).map(f64::exp)
}

pub fn right_term_ln_value_dp(state: &ChainState, prior: &DpPrior) -> Result<f64> {
    polya_urn_log_ratio(state.num_clusters(), state.clusters.n(), prior.alpha0, state.alpha)
}

/// `dP0(mu) / dP1(mu | alpha)` at the state's means; depends on the means only
/// through the cluster count.
pub fn right_term_value_dp(state: &ChainState, prior: &DpPrior) -> Result<f64> {
    right_term_ln_value_dp(state, prior).map(f64::exp)
}
