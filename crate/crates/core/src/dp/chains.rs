use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::conditionals::{gibbs_sweep_auxiliary, gibbs_sweep_full, AuxConcentration, ChainState, StepTuner};
use super::evaluators::{left_term_ln_value_dp, right_term_ln_value_dp};
use super::hyper::DpPrior;
use crate::error::{Result, SdrError};
use crate::estimator::{NestedProblem, PosteriorSampler};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    /// Sweeps discarded before the first retained draw.
    pub burn_in: usize,
    /// Sweeps per retained draw.
    pub thinning: usize,
    pub aux_concentration: AuxConcentration,
    /// Initial random-walk step on `ln alpha` for the full model.
    pub initial_step: f64,
}

impl Default for ChainSettings {
    fn default() -> Self {
        ChainSettings {
            burn_in: 1000,
            thinning: 1,
            aux_concentration: AuxConcentration::GammaPrior,
            initial_step: 0.5,
        }
    }
}

impl ChainSettings {
    fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(SdrError::InvalidArgument("thinning must be at least 1".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(SdrError::InvalidArgument(format!("initial_step = {}", self.initial_step)));
        }
        Ok(())
    }
}

/// Running statistics over retained draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub retained: u64,
    pub mean_clusters: f64,
    pub mean_alpha: f64,
    /// Metropolis acceptance rate after burn-in (full model only).
    pub acceptance_rate: Option<f64>,
    pub final_step: Option<f64>,
}

impl ChainDiagnostics {
    fn observe(&mut self, state: &ChainState) {
        self.retained += 1;
        let k = self.retained as f64;
        self.mean_clusters += (state.num_clusters() as f64 - self.mean_clusters) / k;
        self.mean_alpha += (state.alpha - self.mean_alpha) / k;
    }
}

/// Gibbs sampler for the auxiliary posterior, in which the DP concentration is
/// decoupled from the kernel precision.
#[derive(Debug, Clone)]
pub struct AuxiliaryChain {
    data: Arc<[f64]>,
    prior: DpPrior,
    thinning: usize,
    state: ChainState,
    rng: ChaCha8Rng,
    diagnostics: ChainDiagnostics,
}

impl AuxiliaryChain {
    pub fn new(data: Arc<[f64]>, prior: DpPrior, settings: &ChainSettings, seed: u64) -> Result<Self> {
        settings.validate()?;
        let with_prime = settings.aux_concentration == AuxConcentration::GammaPrior;
        let state = ChainState::initial(&data, &prior, with_prime);
        Self::from_state(data, prior, settings, state, seed)
    }

    pub fn from_state(
        data: Arc<[f64]>,
        prior: DpPrior,
        settings: &ChainSettings,
        state: ChainState,
        seed: u64,
    ) -> Result<Self> {
        settings.validate()?;
        if data.is_empty() {
            return Err(SdrError::InvalidArgument("the DP model needs at least one observation".into()));
        }
        if state.clusters.n() != data.len() {
            return Err(SdrError::InvalidArgument("state and data disagree on n".into()));
        }
        state.check()?;
        let mut chain = AuxiliaryChain {
            data,
            prior,
            thinning: settings.thinning,
            state,
            rng: ChaCha8Rng::seed_from_u64(seed),
            diagnostics: ChainDiagnostics::default(),
        };
        for _ in 0..settings.burn_in {
            chain.sweep()?;
        }
        Ok(chain)
    }

    fn sweep(&mut self) -> Result<()> {
        gibbs_sweep_auxiliary(&mut self.state, &self.data, &self.prior, &mut self.rng)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn diagnostics(&self) -> ChainDiagnostics {
        self.diagnostics
    }
}

impl PosteriorSampler for AuxiliaryChain {
    type Draw = ChainState;

    fn next_draw(&mut self) -> Result<&ChainState> {
        for _ in 0..self.thinning {
            self.sweep()?;
        }
        self.diagnostics.observe(&self.state);
        Ok(&self.state)
    }
}

/// Gibbs sampler for the full posterior, in which `alpha` is both the DP
/// concentration and the kernel precision factor. The `alpha` step size is
/// tuned during burn-in and frozen afterwards.
#[derive(Debug, Clone)]
pub struct FullChain {
    data: Arc<[f64]>,
    prior: DpPrior,
    thinning: usize,
    state: ChainState,
    tuner: StepTuner,
    rng: ChaCha8Rng,
    diagnostics: ChainDiagnostics,
}

impl FullChain {
    pub fn new(data: Arc<[f64]>, prior: DpPrior, settings: &ChainSettings, seed: u64) -> Result<Self> {
        let state = ChainState::initial(&data, &prior, false);
        Self::from_state(data, prior, settings, state, seed)
    }

    pub fn from_state(
        data: Arc<[f64]>,
        prior: DpPrior,
        settings: &ChainSettings,
        state: ChainState,
        seed: u64,
    ) -> Result<Self> {
        settings.validate()?;
        if data.is_empty() {
            return Err(SdrError::InvalidArgument("the DP model needs at least one observation".into()));
        }
        if state.clusters.n() != data.len() || state.alpha_prime.is_some() {
            return Err(SdrError::InvalidArgument("not a full-model state for this data".into()));
        }
        state.check()?;
        let mut chain = FullChain {
            data,
            prior,
            thinning: settings.thinning,
            state,
            tuner: StepTuner::new(settings.initial_step),
            rng: ChaCha8Rng::seed_from_u64(seed),
            diagnostics: ChainDiagnostics::default(),
        };
        for _ in 0..settings.burn_in {
            chain.sweep()?;
        }
        chain.tuner.freeze();
        Ok(chain)
    }

    fn sweep(&mut self) -> Result<()> {
        gibbs_sweep_full(&mut self.state, &self.data, &self.prior, &mut self.tuner, &mut self.rng)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn tuner(&self) -> &StepTuner {
        &self.tuner
    }

    pub fn diagnostics(&self) -> ChainDiagnostics {
        ChainDiagnostics {
            acceptance_rate: self.tuner.acceptance_rate(),
            final_step: Some(self.tuner.step),
            ..self.diagnostics
        }
    }
}

impl PosteriorSampler for FullChain {
    type Draw = ChainState;

    fn next_draw(&mut self) -> Result<&ChainState> {
        for _ in 0..self.thinning {
            self.sweep()?;
        }
        self.diagnostics.observe(&self.state);
        Ok(&self.state)
    }
}

/// The DP model comparison `alpha = alpha0` versus `alpha ~ Gamma(nu1, nu2)`
/// as a [`NestedProblem`].
#[derive(Debug, Clone)]
pub struct DpProblem {
    data: Arc<[f64]>,
    prior: DpPrior,
    settings: ChainSettings,
}

impl DpProblem {
    pub fn new(data: impl Into<Arc<[f64]>>, prior: DpPrior, settings: ChainSettings) -> Result<Self> {
        let data = data.into();
        if data.is_empty() {
            return Err(SdrError::InvalidArgument("the DP model needs at least one observation".into()));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(SdrError::InvalidArgument(format!("observation {i} is not finite")));
        }
        settings.validate()?;
        Ok(DpProblem { data, prior, settings })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn prior(&self) -> &DpPrior {
        &self.prior
    }

    pub fn settings(&self) -> &ChainSettings {
        &self.settings
    }
}

impl NestedProblem for DpProblem {
    type AuxSampler = AuxiliaryChain;
    type FullSampler = FullChain;

    fn auxiliary_sampler(&self, seed: u64) -> Result<AuxiliaryChain> {
        AuxiliaryChain::new(self.data.clone(), self.prior, &self.settings, seed)
    }

    fn full_sampler(&self, seed: u64) -> Result<FullChain> {
        FullChain::new(self.data.clone(), self.prior, &self.settings, seed)
    }

    fn left_value(&self, draw: &ChainState) -> f64 {
        self.left_ln_value(draw).exp()
    }

    fn right_value(&self, draw: &ChainState) -> f64 {
        self.right_ln_value(draw).exp()
    }

    // evaluator failures surface as NaN, which the estimator rejects with the draw index
    fn left_ln_value(&self, draw: &ChainState) -> f64 {
        left_term_ln_value_dp(draw, &self.data, &self.prior).unwrap_or(f64::NAN)
    }

    fn right_ln_value(&self, draw: &ChainState) -> f64 {
        right_term_ln_value_dp(draw, &self.prior).unwrap_or(f64::NAN)
    }
}
