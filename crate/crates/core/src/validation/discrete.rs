//! Finite nested model in which every quantity is a finite sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdrError};
use crate::estimator::{NestedProblem, PosteriorSampler};

/// A finite nested model. The observed datum is fixed and folded into the
/// likelihood table, indexed `[theta][psi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNestedSpec {
    pub theta_support: Vec<String>,
    pub psi_support: Vec<String>,
    /// Index of `theta0` in `theta_support`.
    pub theta0: usize,
    /// Joint prior of the complex model, `[theta][psi]`.
    pub prior1: Vec<Vec<f64>>,
    /// Nuisance prior of the simpler model.
    pub prior0: Vec<f64>,
    pub likelihood: Vec<Vec<f64>>,
}

/// Exact values of the two factors of `B01`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactTerms {
    pub left: f64,
    pub right: f64,
}

const SUM_TOLERANCE: f64 = 1e-12;

impl DiscreteNestedSpec {
    /// The 2 x 2 example: uniform joint prior, `prior0 = (1/2, 1/2)` and
    /// likelihood rows `[2, 1]` (at `theta0`) and `[1, 1]`. Exact `B01 = 1.2`.
    pub fn two_by_two() -> Self {
        DiscreteNestedSpec {
            theta_support: vec!["theta0".into(), "theta1".into()],
            psi_support: vec!["a".into(), "b".into()],
            theta0: 0,
            prior1: vec![vec![0.25, 0.25], vec![0.25, 0.25]],
            prior0: vec![0.5, 0.5],
            likelihood: vec![vec![2.0, 1.0], vec![1.0, 1.0]],
        }
    }

    pub fn n_theta(&self) -> usize {
        self.theta_support.len()
    }

    pub fn n_psi(&self) -> usize {
        self.psi_support.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (nt, np) = (self.n_theta(), self.n_psi());
        if nt == 0 || np == 0 {
            return Err(SdrError::InvalidArgument("supports must be non-empty".into()));
        }
        if self.theta0 >= nt {
            return Err(SdrError::InvalidArgument(format!("theta0 index {} outside support", self.theta0)));
        }
        let table_ok = |t: &Vec<Vec<f64>>| t.len() == nt && t.iter().all(|row| row.len() == np);
        if !table_ok(&self.prior1) || !table_ok(&self.likelihood) || self.prior0.len() != np {
            return Err(SdrError::InvalidArgument("table dimensions do not match the supports".into()));
        }
        let p1: Vec<f64> = self.prior1.iter().flatten().copied().collect();
        check_distribution("prior1", &p1)?;
        check_distribution("prior0", &self.prior0)?;
        if let Some(v) = self.likelihood.iter().flatten().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(SdrError::InvalidArgument(format!("likelihood entries must be positive, found {v}")));
        }
        Ok(())
    }

    fn theta_marginal(&self, theta: usize) -> f64 {
        self.prior1[theta].iter().sum()
    }

    /// Auxiliary prior mass `P1(theta) * P0(psi)`.
    fn aux_prior(&self, theta: usize, psi: usize) -> f64 {
        self.theta_marginal(theta) * self.prior0[psi]
    }

    /// `m0(x) / m1(x)` by direct summation.
    pub fn exact_bayes_factor(&self) -> Result<f64> {
        self.validate()?;
        let t0 = self.theta0;
        let m0: f64 = (0..self.n_psi()).map(|j| self.likelihood[t0][j] * self.prior0[j]).sum();
        let m1 = self.marginal(|t, j| self.prior1[t][j]);
        if m1 <= 0.0 {
            return Err(SdrError::Domain("complex-model marginal likelihood is zero".into()));
        }
        Ok(m0 / m1)
    }

    fn marginal(&self, prior: impl Fn(usize, usize) -> f64) -> f64 {
        let mut total = 0.0;
        for t in 0..self.n_theta() {
            for j in 0..self.n_psi() {
                total += self.likelihood[t][j] * prior(t, j);
            }
        }
        total
    }

    /// The left factor (auxiliary posterior over prior mass at `theta0`) and
    /// the right factor `m~(x) / m1(x)`.
    pub fn exact_terms(&self) -> Result<ExactTerms> {
        self.validate()?;
        let t0 = self.theta0;
        let prior_t0 = self.theta_marginal(t0);
        if prior_t0 <= 0.0 {
            return Err(SdrError::Domain("theta0 has zero prior probability".into()));
        }
        let m_aux = self.marginal(|t, j| self.aux_prior(t, j));
        let m1 = self.marginal(|t, j| self.prior1[t][j]);
        if m_aux <= 0.0 || m1 <= 0.0 {
            return Err(SdrError::Domain("zero marginal likelihood".into()));
        }
        let post_t0: f64 = (0..self.n_psi())
            .map(|j| self.likelihood[t0][j] * self.aux_prior(t0, j))
            .sum::<f64>()
            / m_aux;
        Ok(ExactTerms {
            left: post_t0 / prior_t0,
            right: m_aux / m1,
        })
    }
}

fn check_distribution(name: &str, p: &[f64]) -> Result<()> {
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(SdrError::InvalidArgument(format!("{name} has invalid entry {v}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(SdrError::InvalidArgument(format!("{name} sums to {total}")));
    }
    Ok(())
}

/// Exact iid sampler over a finite table by inverse CDF.
#[derive(Debug, Clone)]
pub struct TableSampler {
    cdf: Vec<f64>,
    cols: usize,
    rng: ChaCha8Rng,
    current: (usize, usize),
}

impl TableSampler {
    fn new(weights: &[f64], cols: usize, seed: u64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(SdrError::Domain("posterior table has no mass".into()));
        }
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(TableSampler { cdf, cols, rng: ChaCha8Rng::seed_from_u64(seed), current: (0, 0) })
    }
}

impl PosteriorSampler for TableSampler {
    /// `(theta index, psi index)`.
    type Draw = (usize, usize);

    fn next_draw(&mut self) -> Result<&(usize, usize)> {
        let u: f64 = self.rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        // first cell whose cumulative mass exceeds u; zero-mass cells are never hit
        let k = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.current = (k / self.cols, k % self.cols);
        Ok(&self.current)
    }
}

/// [`NestedProblem`] adapter for a [`DiscreteNestedSpec`] with exact
/// posterior sampling and exact evaluator tables.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    spec: DiscreteNestedSpec,
    aux_posterior: Vec<f64>,
    full_posterior: Vec<f64>,
    /// `P~(theta0 | psi, x) / P1(theta0)` per psi.
    left_table: Vec<f64>,
    /// `P0(psi) / P1(psi | theta)`, `[theta][psi]`.
    right_table: Vec<Vec<f64>>,
}

impl DiscreteProblem {
    pub fn new(spec: DiscreteNestedSpec) -> Result<Self> {
        spec.validate()?;
        let (nt, np) = (spec.n_theta(), spec.n_psi());
        let t0 = spec.theta0;
        if spec.theta_marginal(t0) <= 0.0 {
            return Err(SdrError::Domain("theta0 has zero prior probability".into()));
        }
        let mut aux_posterior = Vec::with_capacity(nt * np);
        let mut full_posterior = Vec::with_capacity(nt * np);
        for t in 0..nt {
            for j in 0..np {
                aux_posterior.push(spec.likelihood[t][j] * spec.aux_prior(t, j));
                full_posterior.push(spec.likelihood[t][j] * spec.prior1[t][j]);
            }
        }
        let left_table = (0..np)
            .map(|j| {
                // theta given psi under the auxiliary prior only involves P1(theta)
                let norm: f64 = (0..nt).map(|t| spec.likelihood[t][j] * spec.theta_marginal(t)).sum();
                spec.likelihood[t0][j] / norm
            })
            .collect();
        let right_table = (0..nt)
            .map(|t| {
                let mt = spec.theta_marginal(t);
                (0..np)
                    .map(|j| {
                        let cond = if mt > 0.0 { spec.prior1[t][j] / mt } else { 0.0 };
                        if cond > 0.0 {
                            spec.prior0[j] / cond
                        } else {
                            // zero posterior mass: never drawn
                            f64::NAN
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(DiscreteProblem { spec, aux_posterior, full_posterior, left_table, right_table })
    }

    pub fn spec(&self) -> &DiscreteNestedSpec {
        &self.spec
    }
}

impl NestedProblem for DiscreteProblem {
    type AuxSampler = TableSampler;
    type FullSampler = TableSampler;

    fn auxiliary_sampler(&self, seed: u64) -> Result<TableSampler> {
        TableSampler::new(&self.aux_posterior, self.spec.n_psi(), seed)
    }

    fn full_sampler(&self, seed: u64) -> Result<TableSampler> {
        TableSampler::new(&self.full_posterior, self.spec.n_psi(), seed)
    }

    fn left_value(&self, draw: &(usize, usize)) -> f64 {
        self.left_table[draw.1]
    }

    fn right_value(&self, draw: &(usize, usize)) -> f64 {
        self.right_table[draw.0][draw.1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_hand_value() {
        let spec = DiscreteNestedSpec::two_by_two();
        // (1/2 * 2 + 1/2 * 1) / (1/4 * (2 + 1 + 1 + 1))
        assert!((spec.exact_bayes_factor().unwrap() - 1.2).abs() < 1e-15);
        let t = spec.exact_terms().unwrap();
        assert!((t.left * t.right - 1.2).abs() < 1e-12);
        // uniform joint prior is separable
        assert!((t.right - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_likelihood_in_theta_gives_one() {
        // non-separable prior1 whose psi marginal is (0.3, 0.7)
        let spec = DiscreteNestedSpec {
            theta_support: vec!["t0".into(), "t1".into(), "t2".into()],
            psi_support: vec!["a".into(), "b".into()],
            theta0: 1,
            prior1: vec![vec![0.1, 0.2], vec![0.15, 0.15], vec![0.05, 0.35]],
            prior0: vec![0.3, 0.7],
            likelihood: vec![vec![3.0, 0.5]; 3],
        };
        assert!((spec.exact_bayes_factor().unwrap() - 1.0).abs() < 1e-12);
        let t = spec.exact_terms().unwrap();
        assert!((t.left * t.right - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_at_theta0() {
        let spec = DiscreteNestedSpec {
            theta_support: vec!["t0".into()],
            psi_support: vec!["a".into(), "b".into(), "c".into()],
            theta0: 0,
            prior1: vec![vec![0.2, 0.5, 0.3]],
            prior0: vec![0.2, 0.5, 0.3],
            likelihood: vec![vec![1.0, 4.0, 2.0]],
        };
        assert!((spec.exact_bayes_factor().unwrap() - 1.0).abs() < 1e-15);
        let t = spec.exact_terms().unwrap();
        assert!((t.left - 1.0).abs() < 1e-15);

        let two_rows = DiscreteNestedSpec {
            theta_support: vec!["t0".into(), "t1".into()],
            prior1: vec![vec![0.2, 0.5, 0.3], vec![0.0, 0.0, 0.0]],
            likelihood: vec![vec![1.0, 4.0, 2.0], vec![9.0, 9.0, 9.0]],
            ..spec
        };
        assert!((two_rows.exact_terms().unwrap().left - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_theta0_is_rejected() {
        let spec = DiscreteNestedSpec {
            prior1: vec![vec![0.0, 0.0], vec![0.5, 0.5]],
            ..DiscreteNestedSpec::two_by_two()
        };
        assert!(spec.exact_terms().is_err());
        assert!(DiscreteProblem::new(spec).is_err());
    }

    #[test]
    fn validation_catches_bad_tables() {
        let mut s = DiscreteNestedSpec::two_by_two();
        s.prior0 = vec![0.5, 0.6];
        assert!(s.validate().is_err());
        let mut s = DiscreteNestedSpec::two_by_two();
        s.likelihood[1][1] = 0.0;
        assert!(s.validate().is_err());
        let mut s = DiscreteNestedSpec::two_by_two();
        s.theta0 = 2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn sampler_never_hits_zero_mass_cells() {
        let spec = DiscreteNestedSpec {
            prior1: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            ..DiscreteNestedSpec::two_by_two()
        };
        let p = DiscreteProblem::new(spec).unwrap();
        let mut s = p.full_sampler(3).unwrap();
        for _ in 0..10_000 {
            let (t, j) = *s.next_draw().unwrap();
            assert_eq!(t, j);
            assert!(p.right_value(&(t, j)).is_finite());
        }
    }
}
