//! Dirichlet-process random-effects model: Gibbs samplers for the auxiliary
//! and full models and the two Bayes-factor evaluators specialised to them.

mod chains;
mod cluster;
mod conditionals;
mod evaluators;
pub mod forward;
mod hyper;

pub use chains::{AuxiliaryChain, ChainDiagnostics, ChainSettings, DpProblem, FullChain};
pub use cluster::ClusterState;
pub use conditionals::{
    alpha_kernel_posterior, full_alpha_ln_target, gibbs_sweep_auxiliary, gibbs_sweep_full, remix_cluster_values,
    sample_mu_conditional, update_alpha_full, update_alpha_kernel, update_alpha_prime, AuxConcentration, ChainState,
    StepTuner,
};
pub use evaluators::{
    left_term_ln_value_dp, left_term_ln_value_from_ss, left_term_value_dp, polya_urn_log_ratio,
    right_term_ln_value_dp, right_term_value_dp,
};
pub use hyper::{DpHyperParams, DpPrior, GammaParameterization};
