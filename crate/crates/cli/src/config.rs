//! Run configuration: built-in defaults, overridden by a `key = value` file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use sdr_core::dp::{AuxConcentration, ChainSettings, DpHyperParams, GammaParameterization};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// The Old Faithful eruption durations shipped with this crate.
pub fn bundled_faithful_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("faithful_eruptions.txt")
}

pub const DEFAULT_ROOT_SEED: u64 = 20_050_301;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_draws: usize,
    pub replicates: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub root_seed: u64,
    pub hyper: DpHyperParams,
    pub gamma_parameterization: GammaParameterization,
    pub aux_concentration: AuxConcentration,
    pub data_path: PathBuf,
    /// Zero-based field of comma-separated input; `None` reads one value per line.
    pub column: Option<usize>,
    /// Worker threads across replicates; `None` uses every available core.
    pub parallel: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_draws: 5000,
            replicates: 30,
            burn_in: 1000,
            thinning: 1,
            root_seed: DEFAULT_ROOT_SEED,
            hyper: DpHyperParams::default(),
            gamma_parameterization: GammaParameterization::ShapeRate,
            aux_concentration: AuxConcentration::GammaPrior,
            data_path: bundled_faithful_path(),
            column: None,
            parallel: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("n_draws", self.n_draws), ("replicates", self.replicates), ("thinning", self.thinning)];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(CliError::Config(format!("{name} must be at least 1")));
        }
        if self.parallel == Some(0) {
            return Err(CliError::Config("parallel must be at least 1".into()));
        }
        self.hyper.validate()?;
        Ok(())
    }

    pub fn chain_settings(&self) -> ChainSettings {
        ChainSettings {
            burn_in: self.burn_in,
            thinning: self.thinning,
            aux_concentration: self.aux_concentration,
            ..ChainSettings::default()
        }
    }

    /// Defaults, then `file`, then `flags`.
    pub fn resolve(file: Option<&Path>, flags: &ConfigOverrides) -> Result<Self> {
        let mut config = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
            ConfigOverrides::parse_file(&text, path)?.apply(&mut config);
        }
        flags.apply(&mut config);
        config.validate()?;
        Ok(config)
    }
}

fn parse_gamma(s: &str) -> std::result::Result<GammaParameterization, String> {
    match s {
        "rate" | "shape-rate" => Ok(GammaParameterization::ShapeRate),
        "scale" | "shape-scale" => Ok(GammaParameterization::ShapeScale),
        _ => Err(format!("expected rate or scale, got `{s}`")),
    }
}

fn parse_aux(s: &str) -> std::result::Result<AuxConcentration, String> {
    match s {
        "gamma" | "gamma-prior" => Ok(AuxConcentration::GammaPrior),
        "fixed" => Ok(AuxConcentration::Fixed),
        _ => Err(format!("expected gamma or fixed, got `{s}`")),
    }
}

/// Every [`RunConfig`] field as an optional override. Doubles as the flag set
/// of the `dp-run` subcommand.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct ConfigOverrides {
    /// Retained draws per term and replicate
    #[arg(long = "draws")]
    pub n_draws: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long = "seed")]
    pub root_seed: Option<u64>,
    /// Base-measure mean
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    /// Base-measure variance
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub nu1: Option<f64>,
    #[arg(long)]
    pub nu2: Option<f64>,
    /// Kernel variance numerator
    #[arg(long)]
    pub k: Option<f64>,
    /// Concentration of the simpler model
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Reading of Gamma(nu1, nu2): rate or scale
    #[arg(long = "gamma-param", value_parser = parse_gamma)]
    pub gamma_parameterization: Option<GammaParameterization>,
    /// Auxiliary-model concentration: gamma or fixed
    #[arg(long = "aux-concentration", value_parser = parse_aux)]
    pub aux_concentration: Option<AuxConcentration>,
    /// Input series
    #[arg(long = "data")]
    pub data_path: Option<PathBuf>,
    /// Zero-based column of comma-separated input
    #[arg(long)]
    pub column: Option<usize>,
    /// Worker threads across replicates
    #[arg(long)]
    pub parallel: Option<usize>,
}

impl ConfigOverrides {
    pub fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$src.clone() { c.$($dst).+ = v; })*
            };
        }
        set!(
            n_draws => n_draws,
            replicates => replicates,
            burn_in => burn_in,
            thinning => thinning,
            root_seed => root_seed,
            m => hyper.m,
            sigma2 => hyper.sigma2,
            nu1 => hyper.nu1,
            nu2 => hyper.nu2,
            k => hyper.k,
            alpha0 => hyper.alpha0,
            gamma_parameterization => gamma_parameterization,
            aux_concentration => aux_concentration,
            data_path => data_path,
        );
        if self.column.is_some() {
            c.column = self.column;
        }
        if self.parallel.is_some() {
            c.parallel = self.parallel;
        }
    }

    /// Parse flat `key = value` lines. Keys are the [`RunConfig`] field names,
    /// with the hyperparameters addressed by their own names (`m`, `sigma2`,
    /// ...). Relative data paths resolve against the file's directory.
    pub fn parse_file(text: &str, path: &Path) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CliError::Parse { path: path.to_owned(), line: idx + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
                v.parse().map_err(|_| format!("`{v}` is not a valid number"))
            }
            let r: std::result::Result<(), String> = (|| {
                match key {
                    "n_draws" => o.n_draws = Some(num(value)?),
                    "replicates" => o.replicates = Some(num(value)?),
                    "burn_in" => o.burn_in = Some(num(value)?),
                    "thinning" => o.thinning = Some(num(value)?),
                    "root_seed" => o.root_seed = Some(num(value)?),
                    "m" => o.m = Some(num(value)?),
                    "sigma2" => o.sigma2 = Some(num(value)?),
                    "nu1" => o.nu1 = Some(num(value)?),
                    "nu2" => o.nu2 = Some(num(value)?),
                    "k" => o.k = Some(num(value)?),
                    "alpha0" => o.alpha0 = Some(num(value)?),
                    "gamma_parameterization" => o.gamma_parameterization = Some(parse_gamma(value)?),
                    "aux_concentration" => o.aux_concentration = Some(parse_aux(value)?),
                    "data_path" => {
                        let p = PathBuf::from(value);
                        o.data_path = Some(match path.parent() {
                            Some(dir) if p.is_relative() => dir.join(p),
                            _ => p,
                        });
                    }
                    "column" => o.column = Some(num(value)?),
                    "parallel" => o.parallel = Some(num(value)?),
                    _ => return Err(format!("unknown key `{key}`")),
                }
                Ok(())
            })();
            r.map_err(err)?;
        }
        Ok(o)
    }
}
