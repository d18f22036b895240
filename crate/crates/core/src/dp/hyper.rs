use serde::{Deserialize, Serialize};

use crate::error::{Result, SdrError};

/// How the second Gamma hyperparameter is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaParameterization {
    /// `Gamma(shape, rate)`: mean `shape / rate`.
    #[default]
    ShapeRate,
    /// `Gamma(shape, scale)`: mean `shape * scale`.
    ShapeScale,
}

/// Hyperparameters of the Dirichlet-process random-effects model.
///
/// ```text
/// x_i | mu_i, alpha ~ N(mu_i, k / alpha)
/// mu_i | P          ~ P
/// P | alpha         ~ DP(alpha, N(m, sigma2))
/// alpha             ~ Gamma(nu1, nu2)
/// ```
///
/// The simpler model fixes `alpha = alpha0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpHyperParams {
    pub m: f64,
    pub sigma2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub k: f64,
    pub alpha0: f64,
}

impl Default for DpHyperParams {
    fn default() -> Self {
        DpHyperParams {
            m: 3.0,
            sigma2: 4.0,
            nu1: 5.0,
            nu2: 5.0,
            k: 1.0,
            alpha0: 0.5,
        }
    }
}

impl DpHyperParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma2", self.sigma2),
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("k", self.k),
            ("alpha0", self.alpha0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SdrError::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.m.is_finite() {
            return Err(SdrError::InvalidArgument(format!("m must be finite, got {}", self.m)));
        }
        Ok(())
    }

    /// Validate and fix the Gamma parameterization.
    pub fn resolve(&self, parameterization: GammaParameterization) -> Result<DpPrior> {
        self.validate()?;
        let rate = match parameterization {
            GammaParameterization::ShapeRate => self.nu2,
            GammaParameterization::ShapeScale => 1.0 / self.nu2,
        };
        Ok(DpPrior {
            m: self.m,
            sigma2: self.sigma2,
            shape: self.nu1,
            rate,
            k: self.k,
            alpha0: self.alpha0,
        })
    }
}

/// Validated hyperparameters with the Gamma prior expressed as shape and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpPrior {
    pub m: f64,
    pub sigma2: f64,
    pub shape: f64,
    pub rate: f64,
    pub k: f64,
    pub alpha0: f64,
}

impl DpPrior {
    pub fn prior_mean_alpha(&self) -> f64 {
        self.shape / self.rate
    }
}
