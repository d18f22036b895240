//! Oracle-backed correctness checks, grouped into suites.
//!
//! Each `measure_*` function returns the raw discrepancy between an
//! implementation path and its independent oracle; [`run_suite`] applies the
//! pass thresholds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{
    polya_urn_log_ratio, sample_mu_conditional, update_alpha_full, update_alpha_kernel, update_alpha_prime,
    ChainState, ClusterState, DpHyperParams, DpPrior, StepTuner,
};
use crate::error::Result;
use crate::estimator::{derive_seeds, estimate_bayes_factor, NestedProblem};
use crate::oracle::grid::GridDensity;
use crate::oracle::partitions::{for_each_partition, num_blocks, sequential_urn_probability};
use crate::oracle::quadrature::integrate_2d;
use crate::oracle::quadrature::integrate;
use crate::oracle::stats::{mean_var, slope};
use crate::oracle::random_discrete_spec;
use crate::special::ln_gamma;
use crate::validation::{DiscreteNestedSpec, DiscreteProblem, GaussianNestedSpec, GaussianProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Discrete,
    Gaussian,
    Polya,
    Conditionals,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Discrete, Suite::Gaussian, Suite::Polya, Suite::Conditionals];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Discrete => "discrete",
            Suite::Gaussian => "gaussian",
            Suite::Polya => "polya",
            Suite::Conditionals => "conditionals",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected discrete, gaussian, polya or conditionals)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, passed: value <= limit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Discrete => discrete_checks(seed)?,
        Suite::Gaussian => gaussian_checks(seed)?,
        Suite::Polya => polya_checks(),
        Suite::Conditionals => conditional_checks(seed)?,
    };
    Ok(SuiteReport { suite, checks })
}

fn relative_error(value: f64, exact: f64) -> f64 {
    ((value - exact) / exact).abs()
}

// ---------------------------------------------------------------- discrete

/// Largest `|left * right - B01|` over `count` random finite specs.
pub fn measure_discrete_factorization(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for c in 0..count {
        let spec = random_discrete_spec(&mut rng, 2 + c % 4, 1 + c % 5);
        let terms = spec.exact_terms()?;
        let b = spec.exact_bayes_factor()?;
        worst = worst.max((terms.left * terms.right - b).abs());
    }
    Ok(worst)
}

/// Grand mean of repeated independent estimates, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatedEstimate {
    pub exact: f64,
    pub grand_mean: f64,
    pub std_error: f64,
}

impl RepeatedEstimate {
    pub fn z(&self) -> f64 {
        (self.grand_mean - self.exact) / self.std_error
    }
}

pub fn measure_repeated<P: NestedProblem>(
    problem: &P,
    exact: f64,
    runs: usize,
    n_draws: usize,
    seed: u64,
) -> Result<RepeatedEstimate> {
    let values = derive_seeds(seed, runs)
        .into_iter()
        .map(|s| estimate_bayes_factor(problem, n_draws, s.left, s.right).map(|e| e.b01))
        .collect::<Result<Vec<f64>>>()?;
    let (grand_mean, var) = mean_var(&values);
    Ok(RepeatedEstimate { exact, grand_mean, std_error: (var / runs as f64).sqrt() })
}

/// Slope of log root-mean-square error against log N.
pub fn measure_convergence_slope<P: NestedProblem>(
    problem: &P,
    exact: f64,
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<f64> {
    let mut log_n = Vec::new();
    let mut log_err = Vec::new();
    for (k, &n) in sizes.iter().enumerate() {
        let mut ss = 0.0;
        for s in derive_seeds(seed.wrapping_add(k as u64), reps) {
            let e = estimate_bayes_factor(problem, n, s.left, s.right)?;
            ss += (e.b01 - exact).powi(2);
        }
        log_n.push((n as f64).ln());
        log_err.push((ss / reps as f64).sqrt().ln());
    }
    Ok(slope(&log_n, &log_err))
}

fn discrete_checks(seed: u64) -> Result<Vec<Check>> {
    let spec = DiscreteNestedSpec::two_by_two();
    let exact = spec.exact_bayes_factor()?;
    let mut checks = vec![
        Check::at_most("2x2 exact B01 equals 1.2", (exact - 1.2).abs(), 1e-12),
        Check::at_most("factorisation over 100 random specs", measure_discrete_factorization(100, seed)?, 1e-12),
    ];
    let problem = DiscreteProblem::new(spec)?;
    let rep = measure_repeated(&problem, exact, 200, 10_000, seed)?;
    checks.push(Check::at_most("200 runs at N=1e4: |z| of grand mean", rep.z().abs(), 3.0));
    Ok(checks)
}

// ---------------------------------------------------------------- gaussian

/// Relative error of the closed-form `B01` against 2-D quadrature of the
/// defining integrals.
pub fn measure_gaussian_quadrature(spec: &GaussianNestedSpec) -> Result<f64> {
    spec.validate()?;
    let closed = spec.exact_bayes_factor()?;
    let n = spec.data.len() as f64;
    let xbar = spec.data.iter().sum::<f64>() / n;
    // likelihood relative to its maximum over theta + psi
    let ln_lik = |mu: f64| -> f64 { -spec.data.iter().map(|x| (x - mu).powi(2) - (x - xbar).powi(2)).sum::<f64>() / (2.0 * spec.sigma2) };
    let normal = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();

    let (tt, tp) = (spec.tau_theta2.sqrt(), spec.tau_psi2.sqrt());
    let c = spec.rho * tt * tp;
    let det = spec.tau_theta2 * spec.tau_psi2 - c * c;
    let prior1 = |t: f64, p: f64| {
        let (a, b) = (t - spec.mean_theta, p - spec.mean_psi);
        let q = (spec.tau_psi2 * a * a - 2.0 * c * a * b + spec.tau_theta2 * b * b) / det;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
    };
    let half = 12.0;
    let m1 = integrate_2d(
        |t, p| ln_lik(t + p).exp() * prior1(t, p),
        (spec.mean_theta - half * tt, spec.mean_theta + half * tt),
        (spec.mean_psi - half * tp, spec.mean_psi + half * tp),
        1e-10,
    );
    let m0 = integrate(
        |p| ln_lik(spec.theta0 + p).exp() * normal(p, spec.mean_psi, spec.tau_psi2),
        spec.mean_psi - half * tp,
        spec.mean_psi + half * tp,
        1e-10,
    );
    Ok(relative_error(closed, m0 / m1))
}

pub fn measure_gaussian_estimate(spec: &GaussianNestedSpec, n_draws: usize, seed: u64) -> Result<f64> {
    let exact = spec.exact_bayes_factor()?;
    let problem = GaussianProblem::new(spec.clone())?;
    let seeds = derive_seeds(seed, 1)[0];
    let est = estimate_bayes_factor(&problem, n_draws, seeds.left, seeds.right)?;
    Ok(relative_error(est.b01, exact))
}

fn gaussian_checks(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for rho in [0.0, 0.5] {
        let spec = GaussianNestedSpec::reference(rho);
        checks.push(Check::at_most(
            format!("rho={rho}: closed form vs quadrature (rel)"),
            measure_gaussian_quadrature(&spec)?,
            1e-8,
        ));
        checks.push(Check::at_most(
            format!("rho={rho}: estimate at N=1e5 (rel)"),
            measure_gaussian_estimate(&spec, 100_000, seed)?,
            0.02,
        ));
    }
    let spec = GaussianNestedSpec::reference(0.0);
    checks.push(Check::at_most(
        "rho=0: density ratio at theta0 equals B01 (rel)",
        relative_error(spec.density_ratio_at_theta0()?, spec.exact_bayes_factor()?),
        1e-10,
    ));
    Ok(checks)
}

// ---------------------------------------------------------------- polya

/// Concentration pairs `(alpha0, alpha)` exercised by the enumeration check.
pub const POLYA_PAIRS: [(f64, f64); 5] = [(0.5, 1.0), (0.5, 6.0), (2.0, 0.3), (1.0, 1.0), (12.0, 0.05)];

/// Largest relative error of the closed-form partition ratio against the
/// ratio of sequential urn probabilities, over every partition of every
/// `n <= max_n`.
pub fn measure_polya_enumeration(max_n: usize, pairs: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for n in 1..=max_n {
        for &(a0, a) in pairs {
            for_each_partition(n, |labels| {
                let oracle = sequential_urn_probability(labels, a0) / sequential_urn_probability(labels, a);
                match polya_urn_log_ratio(num_blocks(labels), n, a0, a) {
                    Ok(v) => worst = worst.max(relative_error(v.exp(), oracle)),
                    Err(e) => failure = Some(e),
                }
            });
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

fn polya_checks() -> Vec<Check> {
    let value = measure_polya_enumeration(8, &POLYA_PAIRS).unwrap_or(f64::INFINITY);
    vec![Check::at_most("n <= 8, all partitions: max relative error", value, 1e-10)]
}

// ---------------------------------------------------------------- conditionals

/// Bins used when coarsening samples for total-variation comparisons.
pub const TV_BINS: usize = 10;
const GRID_HI: f64 = 50.0;
const GRID_CELLS: usize = 100_000;

fn default_prior() -> DpPrior {
    DpHyperParams::default().resolve(Default::default()).expect("default hyperparameters are valid")
}

fn fixture(data: &[f64], values: Vec<f64>, assignments: Vec<usize>, alpha: f64, prime: Option<f64>) -> ChainState {
    let clusters = ClusterState::from_parts(assignments, values).expect("fixture partition");
    assert_eq!(clusters.n(), data.len());
    ChainState { clusters, alpha, alpha_prime: prime }
}

/// Gamma grid built directly from its log kernel.
fn gamma_grid(shape: f64, rate: f64) -> GridDensity {
    GridDensity::new(0.0, GRID_HI, GRID_CELLS, |a| (shape - 1.0) * a.ln() - rate * a)
}

/// Grid for `p(a | d) ∝ a^(shape - 1 + d) e^(-rate a) G(a) / G(a + n)`.
fn concentration_grid(shape: f64, rate: f64, d: usize, n: usize) -> GridDensity {
    GridDensity::new(0.0, GRID_HI, GRID_CELLS, |a| {
        (shape - 1.0 + d as f64) * a.ln() - rate * a + ln_gamma(a) - ln_gamma(a + n as f64)
    })
}

/// TV distance between `draws` kernel-precision updates at fixed means and
/// the Gamma grid.
pub fn measure_alpha_kernel_tv(draws: usize, seed: u64) -> Result<f64> {
    let prior = default_prior();
    let data = [1.2, 2.0, 4.4, 4.1, 1.9, 3.3, 4.8, 2.2, 1.7, 4.0];
    let mut state = fixture(&data, vec![1.8, 4.3], vec![0, 0, 1, 1, 0, 1, 1, 0, 0, 1], 1.0, Some(1.0));
    let s: f64 = data.iter().zip(state.clusters.means()).map(|(x, m)| (x - m).powi(2)).sum();
    let grid = gamma_grid(prior.shape + data.len() as f64 / 2.0, prior.rate + s / (2.0 * prior.k));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        update_alpha_kernel(&mut state, &data, &prior, &mut rng)?;
        samples.push(state.alpha);
    }
    Ok(grid.tv_distance(&samples, TV_BINS))
}

fn alpha_prime_fixture(d: usize, n: usize) -> (Vec<f64>, ChainState) {
    let data = vec![0.0; n];
    let assignments = (0..n).map(|i| i.min(d - 1)).collect();
    let values = (0..d).map(|j| j as f64).collect();
    let state = fixture(&data, values, assignments, 1.0, Some(1.0));
    (data, state)
}

/// TV distance between a run of `draws` successive concentration updates at
/// fixed `d` and the grid conditional.
pub fn measure_alpha_prime_tv(draws: usize, d: usize, n: usize, seed: u64) -> Result<f64> {
    let prior = default_prior();
    let (_, mut state) = alpha_prime_fixture(d, n);
    let grid = concentration_grid(prior.shape, prior.rate, d, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        update_alpha_prime(&mut state, &prior, &mut rng)?;
    }
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        update_alpha_prime(&mut state, &prior, &mut rng)?;
        samples.push(state.alpha_prime.expect("auxiliary state"));
    }
    Ok(grid.tv_distance(&samples, TV_BINS))
}

/// Start `draws` independent states at grid draws, apply one update each,
/// and compare the result with the grid.
pub fn measure_alpha_prime_invariance_tv(draws: usize, d: usize, n: usize, seed: u64) -> Result<f64> {
    let prior = default_prior();
    let (_, template) = alpha_prime_fixture(d, n);
    let grid = concentration_grid(prior.shape, prior.rate, d, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut state = template.clone();
        state.alpha_prime = Some(grid.sample(&mut rng));
        update_alpha_prime(&mut state, &prior, &mut rng)?;
        samples.push(state.alpha_prime.expect("auxiliary state"));
    }
    Ok(grid.tv_distance(&samples, TV_BINS))
}

/// Mean and variance of `draws` concentration updates with `n = d = 1`,
/// against the prior Gamma moments: returns the larger `|z|`.
pub fn measure_alpha_prime_single_observation(draws: usize, seed: u64) -> Result<f64> {
    let prior = default_prior();
    let (_, mut state) = alpha_prime_fixture(1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        update_alpha_prime(&mut state, &prior, &mut rng)?;
        samples.push(state.alpha_prime.expect("auxiliary state"));
    }
    let (mean, var) = mean_var(&samples);
    let exact_mean = prior.shape / prior.rate;
    let exact_var = prior.shape / prior.rate.powi(2);
    let z_mean = (mean - exact_mean) / (exact_var / draws as f64).sqrt();
    // Var of the sample variance for a Gamma: (mu4 - sigma^4) / N
    let mu4 = 3.0 * prior.shape * (prior.shape + 2.0) / prior.rate.powi(4);
    let z_var = (var - exact_var) / ((mu4 - exact_var * exact_var) / draws as f64).sqrt();
    Ok(z_mean.abs().max(z_var.abs()))
}

/// Fixed full-model configuration with `n = 5`.
fn full_fixture(k: f64) -> (Vec<f64>, ChainState, DpPrior) {
    let prior = DpPrior { k, ..default_prior() };
    let data = vec![1.9, 2.3, 4.4, 4.6, 3.1];
    let state = fixture(&data, vec![2.0, 4.5], vec![0, 0, 1, 1, 0], 1.0, None);
    (data, state, prior)
}

fn run_full_alpha(
    draws: usize,
    thin: usize,
    data: &[f64],
    mut state: ChainState,
    prior: &DpPrior,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tuner = StepTuner::new(0.5);
    for _ in 0..5_000 {
        update_alpha_full(&mut state, data, prior, &mut tuner, &mut rng)?;
    }
    tuner.freeze();
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        for _ in 0..thin.max(1) {
            update_alpha_full(&mut state, data, prior, &mut tuner, &mut rng)?;
        }
        samples.push(state.alpha);
    }
    Ok(samples)
}

/// TV distance between `draws` retained Metropolis states of the full-model
/// `alpha`, one every `thin` updates at fixed means (`n = 5`), and its grid
/// conditional.
pub fn measure_alpha_full_tv(draws: usize, thin: usize, seed: u64) -> Result<f64> {
    let (data, state, prior) = full_fixture(1.0);
    let n = data.len();
    let d = state.num_clusters();
    let s: f64 = data.iter().zip(state.clusters.means()).map(|(x, m)| (x - m).powi(2)).sum();
    let grid = GridDensity::new(0.0, GRID_HI, GRID_CELLS, |a| {
        (prior.shape - 1.0 + n as f64 / 2.0 + d as f64) * a.ln() - a * (prior.rate + s / (2.0 * prior.k))
            + ln_gamma(a)
            - ln_gamma(a + n as f64)
    });
    let samples = run_full_alpha(draws, thin, &data, state, &prior, seed)?;
    Ok(grid.tv_distance(&samples, TV_BINS))
}

/// With `k` huge the residual factor vanishes and the full-model conditional
/// becomes the concentration conditional with shape raised by `n / 2`.
pub fn measure_alpha_full_large_k_tv(draws: usize, thin: usize, seed: u64) -> Result<f64> {
    let (data, state, prior) = full_fixture(1e12);
    let n = data.len();
    let grid = concentration_grid(prior.shape + n as f64 / 2.0, prior.rate, state.num_clusters(), n);
    let samples = run_full_alpha(draws, thin, &data, state, &prior, seed)?;
    Ok(grid.tv_distance(&samples, TV_BINS))
}

/// Outcome frequencies of repeatedly resampling one mean from a fixed `n = 3`
/// state against the exact normalised allocation weights. Returns the largest
/// `|z|` in binomial standard errors over both the shared-cluster and the
/// singleton case.
pub fn measure_mu_frequencies(draws: usize, seed: u64) -> Result<f64> {
    let prior = default_prior();
    let data = [1.0, 1.5, 4.0];
    let alpha = 1.5;
    let concentration = 0.8;
    let start = fixture(&data, vec![1.2, 3.8], vec![0, 0, 1], alpha, None);
    let kernel_var = prior.k / alpha;
    let dens = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;

    // observation 0 shares a cluster with 1: outcomes {join 1, join 2, new}
    // observation 2 is a singleton: outcomes {join 0/1, new}
    for (i, others) in [(0usize, vec![1usize, 2]), (2, vec![0])] {
        let x = data[i];
        let mut weights: Vec<f64> = others
            .iter()
            .map(|&o| {
                let size = (0..3).filter(|&j| j != i && start.clusters.assignments()[j] == start.clusters.assignments()[o]).count();
                size as f64 * dens(x, start.clusters.mean_of(o), kernel_var)
            })
            .collect();
        weights.push(concentration * dens(x, prior.m, prior.sigma2 + kernel_var));
        let total: f64 = weights.iter().sum();
        let exact: Vec<f64> = weights.iter().map(|w| w / total).collect();

        let mut counts = vec![0usize; exact.len()];
        for _ in 0..draws {
            let mut st = start.clone();
            sample_mu_conditional(i, &mut st, concentration, &data, &prior, &mut rng)?;
            let a = st.clusters.assignments();
            let outcome = others.iter().position(|&o| a[o] == a[i]).unwrap_or(others.len());
            counts[outcome] += 1;
        }
        for (c, p) in counts.iter().zip(&exact) {
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            worst = worst.max(((*c as f64 / draws as f64) - p).abs() / se);
        }
    }
    Ok(worst)
}

fn conditional_checks(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        Check::at_most("alpha kernel update: TV to grid", measure_alpha_kernel_tv(100_000, seed)?, 0.01),
        Check::at_most("alpha' update, d=3 n=10: TV to grid", measure_alpha_prime_tv(100_000, 3, 10, seed)?, 0.01),
        Check::at_most(
            "alpha' one-step invariance: TV to grid",
            measure_alpha_prime_invariance_tv(100_000, 3, 10, seed)?,
            0.01,
        ),
        Check::at_most("alpha' with n=d=1: |z| against prior moments", measure_alpha_prime_single_observation(100_000, seed)?, 3.0),
        Check::at_most("full alpha, n=5: TV to grid", measure_alpha_full_tv(100_000, 10, seed)?, 0.01),
        Check::at_most("full alpha, k -> inf: TV to concentration grid", measure_alpha_full_large_k_tv(100_000, 10, seed)?, 0.01),
        Check::at_most("mu allocation frequencies: max |z|", measure_mu_frequencies(100_000, seed)?, 3.0),
    ])
}
