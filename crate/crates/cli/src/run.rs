//! Orchestration of the replicated DP experiment.

use std::time::Instant;

use sdr_core::dp::DpProblem;
use sdr_core::{estimate_term, replicate_with, Accumulation, NestedProblem, ReplicateConfig, Term};

use crate::config::RunConfig;
use crate::error::Result;
use crate::ingest::ingest_series;
use crate::report::{ReplicateRecord, RunReport, RunSummary};

/// Read the configured data file and run the experiment on it.
pub fn run_dp_experiment(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let data = ingest_series(&config.data_path, config.column)?;
    run_dp_experiment_on(config, data)
}

/// Run the experiment on data already in memory. Each replicate owns an
/// auxiliary chain (left term) and a full chain (right term) seeded
/// independently from the root seed.
pub fn run_dp_experiment_on(config: &RunConfig, data: Vec<f64>) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let n_observations = data.len();
    let prior = config.hyper.resolve(config.gamma_parameterization)?;
    let problem = DpProblem::new(data, prior, config.chain_settings())?;
    let replicate_config = ReplicateConfig {
        threads: config.parallel,
        ..ReplicateConfig::new(config.n_draws, config.replicates, config.root_seed)
    };
    let records = replicate_with(&replicate_config, |index, seeds| {
        let mut aux = problem.auxiliary_sampler(seeds.left)?;
        let left = estimate_term(&mut aux, config.n_draws, Term::Left, Accumulation::Linear, |s| problem.left_value(s))?;
        let mut full = problem.full_sampler(seeds.right)?;
        let right =
            estimate_term(&mut full, config.n_draws, Term::Right, Accumulation::Linear, |s| problem.right_value(s))?;
        Ok(ReplicateRecord {
            index,
            seed_left: seeds.left,
            seed_right: seeds.right,
            b01: left.mean * right.mean,
            left,
            right,
            auxiliary: aux.diagnostics(),
            full: full.diagnostics(),
        })
    })?;
    Ok(RunReport {
        config: config.clone(),
        n_observations,
        summary: RunSummary::from_records(&records),
        replicates: records,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}
