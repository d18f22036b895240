//! The structured result of a DP experiment run.

use std::fmt::Write as _;

use sdr_core::dp::ChainDiagnostics;
use sdr_core::{mean_and_sd, TermEstimate};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub seed_left: u64,
    pub seed_right: u64,
    pub b01: f64,
    pub left: TermEstimate,
    pub right: TermEstimate,
    /// Auxiliary chain, which feeds the left term.
    pub auxiliary: ChainDiagnostics,
    /// Full chain, which feeds the right term.
    pub full: ChainDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mean_b01: f64,
    /// Sample sd across replicates; zero with a single replicate.
    pub sd_b01: f64,
    pub sd_available: bool,
    /// Mean of `log10 b01`; readable when `b01` spans many orders of magnitude.
    pub mean_log10_b01: f64,
}

impl RunSummary {
    pub fn from_records(records: &[ReplicateRecord]) -> Self {
        let values: Vec<f64> = records.iter().map(|r| r.b01).collect();
        let (mean_b01, sd) = mean_and_sd(&values);
        let logs: Vec<f64> = values.iter().map(|v| v.log10()).collect();
        RunSummary {
            mean_b01,
            sd_b01: sd.unwrap_or(0.0),
            sd_available: sd.is_some(),
            mean_log10_b01: mean_and_sd(&logs).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub n_observations: usize,
    pub replicates: Vec<ReplicateRecord>,
    pub summary: RunSummary,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with the wall-clock time zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        RunReport { wall_clock_seconds: 0.0, ..self.clone() }
    }

    /// One row per replicate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,seed_left,seed_right,b01,left,left_se,right,right_se,acceptance_rate,final_step,mean_d_auxiliary,mean_d_full\n",
        );
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        for r in &self.replicates {
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
                r.index,
                r.seed_left,
                r.seed_right,
                r.b01,
                r.left.mean,
                r.left.std_error,
                r.right.mean,
                r.right.std_error,
                opt(r.full.acceptance_rate),
                opt(r.full.final_step),
                r.auxiliary.mean_clusters,
                r.full.mean_clusters,
            );
        }
        out
    }
}
