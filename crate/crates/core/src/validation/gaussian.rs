//! Linear-Gaussian nested model: `x_i = theta + psi + noise`, with a possibly
//! correlated Gaussian prior on `(theta, psi)`. Every quantity is closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdrError};
use crate::estimator::{NestedProblem, PosteriorSampler};
use crate::special::normal_ln_pdf;

/// Complex model: `(theta, psi) ~ N((mean_theta, mean_psi), C)` with
/// `C = [[tau_theta2, rho tau_theta tau_psi], [., tau_psi2]]`. Simpler model:
/// `theta = theta0`, `psi ~ N(mean_psi, tau_psi2)` (the `psi` marginal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNestedSpec {
    pub sigma2: f64,
    pub tau_theta2: f64,
    pub tau_psi2: f64,
    pub rho: f64,
    pub theta0: f64,
    #[serde(default)]
    pub mean_theta: f64,
    #[serde(default)]
    pub mean_psi: f64,
    pub data: Vec<f64>,
}

impl GaussianNestedSpec {
    /// A small reference instance used by the self-tests.
    pub fn reference(rho: f64) -> Self {
        GaussianNestedSpec {
            sigma2: 1.0,
            tau_theta2: 1.0,
            tau_psi2: 0.5,
            rho,
            theta0: 0.0,
            mean_theta: 0.3,
            mean_psi: -0.2,
            data: vec![0.9, 0.1, 1.4, 0.6, -0.3, 1.1, 0.4, 0.8],
        }
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma2", self.sigma2), ("tau_theta2", self.tau_theta2), ("tau_psi2", self.tau_psi2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SdrError::Singular(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rho.is_nan() || self.rho.abs() >= 1.0 {
            return Err(SdrError::Singular(format!("|rho| must be below 1, got {}", self.rho)));
        }
        let finite = [self.theta0, self.mean_theta, self.mean_psi].iter().chain(&self.data).all(|v| v.is_finite());
        if !finite {
            return Err(SdrError::InvalidArgument("non-finite location or data".into()));
        }
        Ok(())
    }

    fn cov_theta_psi(&self) -> f64 {
        self.rho * (self.tau_theta2 * self.tau_psi2).sqrt()
    }

    fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Closed-form `B01`. Only the sample mean carries information that
    /// differs between the two models, so the ratio reduces to two Normal
    /// densities of the sample mean.
    pub fn exact_bayes_factor(&self) -> Result<f64> {
        self.validate()?;
        let n = self.n();
        if n == 0 {
            return Ok(1.0);
        }
        let xbar = self.sum() / n as f64;
        let noise = self.sigma2 / n as f64;
        let var_sum = self.tau_theta2 + self.tau_psi2 + 2.0 * self.cov_theta_psi();
        let ln_m0 = normal_ln_pdf(xbar, self.theta0 + self.mean_psi, noise + self.tau_psi2);
        let ln_m1 = normal_ln_pdf(xbar, self.mean_theta + self.mean_psi, noise + var_sum);
        Ok((ln_m0 - ln_m1).exp())
    }

    /// Posterior over prior density of `theta` at `theta0` in the complex model.
    /// Equals `B01` when `rho = 0`.
    pub fn density_ratio_at_theta0(&self) -> Result<f64> {
        self.validate()?;
        let post = self.posterior(self.cov_theta_psi())?;
        Ok((normal_ln_pdf(self.theta0, post.mean[0], post.cov[0][0])
            - normal_ln_pdf(self.theta0, self.mean_theta, self.tau_theta2))
        .exp())
    }

    /// Posterior of `(theta, psi)` under a prior with the given covariance
    /// between the two (zero for the auxiliary model).
    fn posterior(&self, cov12: f64) -> Result<Gaussian2> {
        let prior_cov = [[self.tau_theta2, cov12], [cov12, self.tau_psi2]];
        let prior_mean = [self.mean_theta, self.mean_psi];
        let n = self.n();
        if n == 0 {
            return Gaussian2::new(prior_mean, prior_cov);
        }
        let xbar = self.sum() / n as f64;
        // conditioning on xbar = theta + psi + e, e ~ N(0, sigma2 / n)
        let g = [prior_cov[0][0] + prior_cov[0][1], prior_cov[1][0] + prior_cov[1][1]];
        let v = g[0] + g[1] + self.sigma2 / n as f64;
        let resid = xbar - prior_mean[0] - prior_mean[1];
        let mean = [prior_mean[0] + g[0] * resid / v, prior_mean[1] + g[1] * resid / v];
        let cov = [
            [prior_cov[0][0] - g[0] * g[0] / v, prior_cov[0][1] - g[0] * g[1] / v],
            [prior_cov[1][0] - g[1] * g[0] / v, prior_cov[1][1] - g[1] * g[1] / v],
        ];
        Gaussian2::new(mean, cov)
    }
}

#[derive(Debug, Clone, Copy)]
struct Gaussian2 {
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
    chol: [[f64; 2]; 2],
}

impl Gaussian2 {
    fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        let l11 = cov[0][0].sqrt();
        let l21 = cov[1][0] / l11;
        let rem = cov[1][1] - l21 * l21;
        if !(cov[0][0] > 0.0 && rem > 0.0) {
            return Err(SdrError::Singular(format!("posterior covariance {cov:?}")));
        }
        Ok(Gaussian2 { mean, cov, chol: [[l11, 0.0], [l21, rem.sqrt()]] })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        [
            self.mean[0] + self.chol[0][0] * z0,
            self.mean[1] + self.chol[1][0] * z0 + self.chol[1][1] * z1,
        ]
    }
}

/// Exact iid sampler from a bivariate Normal posterior over `(theta, psi)`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    dist: Gaussian2,
    rng: ChaCha8Rng,
    current: [f64; 2],
}

impl PosteriorSampler for GaussianSampler {
    /// `[theta, psi]`.
    type Draw = [f64; 2];

    fn next_draw(&mut self) -> Result<&[f64; 2]> {
        self.current = self.dist.sample(&mut self.rng);
        Ok(&self.current)
    }
}

/// [`NestedProblem`] adapter for a [`GaussianNestedSpec`]. The auxiliary prior
/// is the product of the two marginals of the correlated prior.
#[derive(Debug, Clone)]
pub struct GaussianProblem {
    spec: GaussianNestedSpec,
    aux: Gaussian2,
    full: Gaussian2,
    /// Conditional of theta given psi and data under the auxiliary prior.
    cond_precision: f64,
    data_sum: f64,
}

impl GaussianProblem {
    pub fn new(spec: GaussianNestedSpec) -> Result<Self> {
        spec.validate()?;
        let aux = spec.posterior(0.0)?;
        let full = spec.posterior(spec.cov_theta_psi())?;
        let cond_precision = 1.0 / spec.tau_theta2 + spec.n() as f64 / spec.sigma2;
        let data_sum = spec.sum();
        Ok(GaussianProblem { spec, aux, full, cond_precision, data_sum })
    }

    pub fn spec(&self) -> &GaussianNestedSpec {
        &self.spec
    }

    fn left_ln(&self, psi: f64) -> f64 {
        let s = &self.spec;
        let n = s.n() as f64;
        let mean = (s.mean_theta / s.tau_theta2 + (self.data_sum - n * psi) / s.sigma2) / self.cond_precision;
        normal_ln_pdf(s.theta0, mean, 1.0 / self.cond_precision) - normal_ln_pdf(s.theta0, s.mean_theta, s.tau_theta2)
    }

    fn right_ln(&self, theta: f64, psi: f64) -> f64 {
        let s = &self.spec;
        let slope = s.rho * (s.tau_psi2 / s.tau_theta2).sqrt();
        let cond_mean = s.mean_psi + slope * (theta - s.mean_theta);
        let cond_var = s.tau_psi2 * (1.0 - s.rho * s.rho);
        normal_ln_pdf(psi, s.mean_psi, s.tau_psi2) - normal_ln_pdf(psi, cond_mean, cond_var)
    }
}

impl NestedProblem for GaussianProblem {
    type AuxSampler = GaussianSampler;
    type FullSampler = GaussianSampler;

    fn auxiliary_sampler(&self, seed: u64) -> Result<GaussianSampler> {
        Ok(GaussianSampler { dist: self.aux, rng: ChaCha8Rng::seed_from_u64(seed), current: [0.0; 2] })
    }

    fn full_sampler(&self, seed: u64) -> Result<GaussianSampler> {
        Ok(GaussianSampler { dist: self.full, rng: ChaCha8Rng::seed_from_u64(seed), current: [0.0; 2] })
    }

    fn left_value(&self, draw: &[f64; 2]) -> f64 {
        self.left_ln(draw[1]).exp()
    }

    fn right_value(&self, draw: &[f64; 2]) -> f64 {
        self.right_ln(draw[0], draw[1]).exp()
    }

    fn left_ln_value(&self, draw: &[f64; 2]) -> f64 {
        self.left_ln(draw[1])
    }

    fn right_ln_value(&self, draw: &[f64; 2]) -> f64 {
        self.right_ln(draw[0], draw[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_data_gives_one() {
        let spec = GaussianNestedSpec { data: vec![], ..GaussianNestedSpec::reference(0.4) };
        assert_eq!(spec.exact_bayes_factor().unwrap(), 1.0);
    }

    #[test]
    fn vanishing_theta_prior_centred_at_theta0() {
        let spec = GaussianNestedSpec {
            tau_theta2: 1e-10,
            mean_theta: 0.0,
            theta0: 0.0,
            ..GaussianNestedSpec::reference(0.0)
        };
        assert!((spec.exact_bayes_factor().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn separable_prior_is_savage_dickey() {
        let spec = GaussianNestedSpec::reference(0.0);
        let b = spec.exact_bayes_factor().unwrap();
        let r = spec.density_ratio_at_theta0().unwrap();
        assert!((b - r).abs() <= 1e-10 * b);
    }

    #[test]
    fn correlated_prior_breaks_savage_dickey() {
        let spec = GaussianNestedSpec::reference(0.5);
        let b = spec.exact_bayes_factor().unwrap();
        let r = spec.density_ratio_at_theta0().unwrap();
        assert!((b - r).abs() > 1e-3);
    }

    #[test]
    fn separable_right_evaluator_is_one() {
        let p = GaussianProblem::new(GaussianNestedSpec::reference(0.0)).unwrap();
        let mut s = p.full_sampler(1).unwrap();
        for _ in 0..100 {
            let d = *s.next_draw().unwrap();
            assert_eq!(p.right_value(&d), 1.0);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(GaussianNestedSpec { rho: 1.0, ..GaussianNestedSpec::reference(0.0) }.validate().is_err());
        assert!(GaussianNestedSpec { sigma2: 0.0, ..GaussianNestedSpec::reference(0.0) }.validate().is_err());
        assert!(GaussianProblem::new(GaussianNestedSpec { tau_psi2: -1.0, ..GaussianNestedSpec::reference(0.0) }).is_err());
    }
}
