//! Two-term Bayes-factor estimator for nested models.
//!
//! For a simpler model that fixes `theta = theta0` and a complex model with
//! joint prior over `(theta, psi)`, the Bayes factor factors as
//!
//! ```text
//! B01 = [ dP~(theta | x) / dP(theta) ](theta0)  *  m~(x) / m(x)
//! ```
//!
//! where `~` marks the auxiliary model whose prior is the product of the
//! complex model's `theta` marginal and the simpler model's nuisance prior.
//! The left factor is averaged over draws of `psi` from the auxiliary
//! posterior; the right factor is the average of the Radon-Nikodym derivative
//! `dP0(psi) / dP1(psi | theta)` over draws from the full posterior. Both
//! averages are unbiased, and their product is unbiased for `B01` as long as
//! the two samples are independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdrError, Term};

/// A stateful stream of posterior draws.
///
/// Samplers are handed out already burned in; every call to `next_draw`
/// advances the stream by one retained draw.
pub trait PosteriorSampler {
    type Draw;

    fn next_draw(&mut self) -> Result<&Self::Draw>;
}

/// The two samplers and two Radon-Nikodym evaluators that make up a nested
/// model comparison.
///
/// Implementations must return nonnegative, finite evaluator values for every
/// draw the matching sampler can produce.
pub trait NestedProblem {
    type AuxSampler: PosteriorSampler;
    type FullSampler: PosteriorSampler;

    /// Sampler for the auxiliary (product-prior) posterior, seeded and burned in.
    fn auxiliary_sampler(&self, seed: u64) -> Result<Self::AuxSampler>;

    /// Sampler for the complex model's posterior, seeded and burned in.
    fn full_sampler(&self, seed: u64) -> Result<Self::FullSampler>;

    /// `dP~(theta | psi, x) / dP(theta)` evaluated at `theta0`.
    fn left_value(&self, draw: &<Self::AuxSampler as PosteriorSampler>::Draw) -> f64;

    /// `dP0(psi) / dP1(psi | theta)` evaluated at the drawn `psi`.
    fn right_value(&self, draw: &<Self::FullSampler as PosteriorSampler>::Draw) -> f64;

    /// Natural log of [`NestedProblem::left_value`]. Override when the log can
    /// be computed without underflow.
    fn left_ln_value(&self, draw: &<Self::AuxSampler as PosteriorSampler>::Draw) -> f64 {
        self.left_value(draw).ln()
    }

    fn right_ln_value(&self, draw: &<Self::FullSampler as PosteriorSampler>::Draw) -> f64 {
        self.right_value(draw).ln()
    }
}

/// How evaluator outputs are averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accumulation {
    /// Plain running mean of the evaluator values.
    #[default]
    Linear,
    /// Mean of `exp(ln value)` computed with a max shift, for evaluators whose
    /// values under- or overflow `f64`. The result is the same linear average.
    LogSpace,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub accumulation: Accumulation,
}

/// Monte Carlo average of one term.
///
/// `std_error` is the iid formula `sd / sqrt(N)`. For Markov chain samplers it
/// ignores autocorrelation and is therefore a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorEstimate {
    pub left: TermEstimate,
    pub right: TermEstimate,
    /// Always `left.mean * right.mean`.
    pub b01: f64,
}

impl BayesFactorEstimate {
    pub fn from_terms(left: TermEstimate, right: TermEstimate) -> Self {
        BayesFactorEstimate {
            left,
            right,
            b01: left.mean * right.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub estimates: Vec<BayesFactorEstimate>,
    pub mean_b01: f64,
    /// Sample standard deviation across replicates; zero when only one
    /// replicate exists (see `sd_available`).
    pub sd_b01: f64,
    pub sd_available: bool,
}

impl ReplicateSummary {
    pub fn from_estimates(estimates: Vec<BayesFactorEstimate>) -> Result<Self> {
        if estimates.is_empty() {
            return Err(SdrError::InvalidArgument(
                "a replicate summary needs at least one estimate".into(),
            ));
        }
        let values: Vec<f64> = estimates.iter().map(|e| e.b01).collect();
        let (mean_b01, sd) = mean_and_sd(&values);
        Ok(ReplicateSummary {
            mean_b01,
            sd_b01: sd.unwrap_or(0.0),
            sd_available: sd.is_some(),
            estimates,
        })
    }
}

/// Arithmetic mean and sample standard deviation (`None` for fewer than two values).
pub fn mean_and_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, Some((ss / (n - 1.0)).sqrt()))
}

enum Accumulator {
    Linear { count: usize, mean: f64, m2: f64 },
    Log { values: Vec<f64> },
}

impl Accumulator {
    fn new(accumulation: Accumulation, capacity: usize) -> Self {
        match accumulation {
            Accumulation::Linear => Accumulator::Linear {
                count: 0,
                mean: 0.0,
                m2: 0.0,
            },
            Accumulation::LogSpace => Accumulator::Log {
                values: Vec::with_capacity(capacity),
            },
        }
    }

    fn is_log(&self) -> bool {
        matches!(self, Accumulator::Log { .. })
    }

    fn push(&mut self, value: f64) {
        match self {
            Accumulator::Linear { count, mean, m2 } => {
                *count += 1;
                let delta = value - *mean;
                *mean += delta / *count as f64;
                *m2 += delta * (value - *mean);
            }
            Accumulator::Log { values } => values.push(value),
        }
    }

    fn finish(self) -> TermEstimate {
        match self {
            Accumulator::Linear { count, mean, m2 } => {
                let sd = if count > 1 {
                    (m2.max(0.0) / (count - 1) as f64).sqrt()
                } else {
                    0.0
                };
                TermEstimate {
                    mean,
                    std_error: sd / (count as f64).sqrt(),
                    n_draws: count,
                }
            }
            Accumulator::Log { values } => {
                let count = values.len();
                let shift = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if shift == f64::NEG_INFINITY {
                    return TermEstimate {
                        mean: 0.0,
                        std_error: 0.0,
                        n_draws: count,
                    };
                }
                let mut inner = Accumulator::new(Accumulation::Linear, 0);
                for v in &values {
                    inner.push((v - shift).exp());
                }
                let scaled = inner.finish();
                let scale = shift.exp();
                TermEstimate {
                    mean: scaled.mean * scale,
                    std_error: scaled.std_error * scale,
                    n_draws: count,
                }
            }
        }
    }
}

/// Average an evaluator over `n_draws` draws from `sampler`.
///
/// With [`Accumulation::Linear`] `eval` must return the evaluator value; with
/// [`Accumulation::LogSpace`] it must return its natural log. NaN, infinite,
/// or negative values abort with the index of the offending draw.
pub fn estimate_term<S, F>(
    sampler: &mut S,
    n_draws: usize,
    term: Term,
    accumulation: Accumulation,
    mut eval: F,
) -> Result<TermEstimate>
where
    S: PosteriorSampler,
    F: FnMut(&S::Draw) -> f64,
{
    if n_draws == 0 {
        return Err(SdrError::InvalidArgument("n_draws must be at least 1".into()));
    }
    let mut acc = Accumulator::new(accumulation, n_draws);
    for index in 0..n_draws {
        let draw = sampler.next_draw()?;
        let value = eval(draw);
        let bad = if acc.is_log() {
            value.is_nan() || value == f64::INFINITY
        } else {
            !value.is_finite() || value < 0.0
        };
        if bad {
            return Err(SdrError::BadEvaluation { term, index, value });
        }
        acc.push(value);
    }
    Ok(acc.finish())
}

pub fn estimate_left_term<P: NestedProblem>(
    problem: &P,
    n_draws: usize,
    seed: u64,
) -> Result<TermEstimate> {
    estimate_left_term_with(problem, n_draws, seed, EstimatorOptions::default())
}

pub fn estimate_left_term_with<P: NestedProblem>(
    problem: &P,
    n_draws: usize,
    seed: u64,
    options: EstimatorOptions,
) -> Result<TermEstimate> {
    if n_draws == 0 {
        return Err(SdrError::InvalidArgument("n_draws must be at least 1".into()));
    }
    let mut sampler = problem.auxiliary_sampler(seed)?;
    match options.accumulation {
        Accumulation::Linear => estimate_term(&mut sampler, n_draws, Term::Left, options.accumulation, |d| {
            problem.left_value(d)
        }),
        Accumulation::LogSpace => estimate_term(&mut sampler, n_draws, Term::Left, options.accumulation, |d| {
            problem.left_ln_value(d)
        }),
    }
}

pub fn estimate_right_term<P: NestedProblem>(
    problem: &P,
    n_draws: usize,
    seed: u64,
) -> Result<TermEstimate> {
    estimate_right_term_with(problem, n_draws, seed, EstimatorOptions::default())
}

pub fn estimate_right_term_with<P: NestedProblem>(
    problem: &P,
    n_draws: usize,
    seed: u64,
    options: EstimatorOptions,
) -> Result<TermEstimate> {
    if n_draws == 0 {
        return Err(SdrError::InvalidArgument("n_draws must be at least 1".into()));
    }
    let mut sampler = problem.full_sampler(seed)?;
    match options.accumulation {
        Accumulation::Linear => estimate_term(&mut sampler, n_draws, Term::Right, options.accumulation, |d| {
            problem.right_value(d)
        }),
        Accumulation::LogSpace => estimate_term(&mut sampler, n_draws, Term::Right, options.accumulation, |d| {
            problem.right_ln_value(d)
        }),
    }
}

pub fn estimate_bayes_factor<P: NestedProblem>(
    problem: &P,
    n_draws: usize,
    seed_left: u64,
    seed_right: u64,
) -> Result<BayesFactorEstimate> {
    estimate_bayes_factor_with(problem, n_draws, seed_left, seed_right, EstimatorOptions::default())
}

/// Product of the two term estimates. The seeds must differ: the product is
/// unbiased only when the two samples are independent.
pub fn estimate_bayes_factor_with<P: NestedProblem>(
    problem: &P,
    n_draws: usize,
    seed_left: u64,
    seed_right: u64,
    options: EstimatorOptions,
) -> Result<BayesFactorEstimate> {
    if seed_left == seed_right {
        return Err(SdrError::SharedSeed(seed_left));
    }
    let left = estimate_left_term_with(problem, n_draws, seed_left, options)?;
    let right = estimate_right_term_with(problem, n_draws, seed_right, options)?;
    Ok(BayesFactorEstimate::from_terms(left, right))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateConfig {
    pub n_draws: usize,
    pub replicates: usize,
    pub root_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub options: EstimatorOptions,
}

impl ReplicateConfig {
    pub fn new(n_draws: usize, replicates: usize, root_seed: u64) -> Self {
        ReplicateConfig {
            n_draws,
            replicates,
            root_seed,
            threads: None,
            options: EstimatorOptions::default(),
        }
    }
}

/// Seeds for the left and right term of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSeeds {
    pub left: u64,
    pub right: u64,
}

/// Derive `replicates` seed pairs from a root seed. All `2 * replicates` seeds
/// are pairwise distinct.
pub fn derive_seeds(root_seed: u64, replicates: usize) -> Vec<ReplicateSeeds> {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    let mut seen = std::collections::HashSet::with_capacity(2 * replicates);
    let mut next = |rng: &mut ChaCha8Rng| loop {
        let s: u64 = rng.random();
        if seen.insert(s) {
            return s;
        }
    };
    (0..replicates)
        .map(|_| {
            let left = next(&mut rng);
            let right = next(&mut rng);
            ReplicateSeeds { left, right }
        })
        .collect()
}

/// Run `config.replicates` independent replicates of `run_one`, possibly in
/// parallel, and return the per-replicate outputs in index order.
///
/// The first failing replicate (lowest index) aborts the whole run.
pub fn replicate_with<T, F>(config: &ReplicateConfig, run_one: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, ReplicateSeeds) -> Result<T> + Sync,
{
    if config.replicates == 0 {
        return Err(SdrError::InvalidArgument("replicates must be at least 1".into()));
    }
    if config.n_draws == 0 {
        return Err(SdrError::InvalidArgument("n_draws must be at least 1".into()));
    }
    let seeds = derive_seeds(config.root_seed, config.replicates);
    let run = || -> Vec<Result<T>> {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_one(i, *s))
            .collect()
    };
    let results = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| SdrError::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| SdrError::Replicate {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Repeat the Bayes-factor estimate with independently seeded problems and
/// summarise the spread across replicates.
pub fn replicate<P, F>(problem_factory: F, config: &ReplicateConfig) -> Result<ReplicateSummary>
where
    P: NestedProblem,
    F: Fn(u64) -> Result<P> + Sync,
{
    let estimates = replicate_with(config, |_, seeds| {
        let problem = problem_factory(seeds.left ^ seeds.right.rotate_left(17))?;
        estimate_bayes_factor_with(&problem, config.n_draws, seeds.left, seeds.right, config.options)
    })?;
    ReplicateSummary::from_estimates(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cycles through a fixed list of values.
    struct Cycle {
        values: Vec<f64>,
        pos: usize,
        current: f64,
    }

    impl PosteriorSampler for Cycle {
        type Draw = f64;
        fn next_draw(&mut self) -> Result<&f64> {
            self.current = self.values[self.pos % self.values.len()];
            self.pos += 1;
            Ok(&self.current)
        }
    }

    struct Fixed {
        left: Vec<f64>,
        right: Vec<f64>,
    }

    impl NestedProblem for Fixed {
        type AuxSampler = Cycle;
        type FullSampler = Cycle;
        fn auxiliary_sampler(&self, _seed: u64) -> Result<Cycle> {
            Ok(Cycle { values: self.left.clone(), pos: 0, current: 0.0 })
        }
        fn full_sampler(&self, _seed: u64) -> Result<Cycle> {
            Ok(Cycle { values: self.right.clone(), pos: 0, current: 0.0 })
        }
        fn left_value(&self, d: &f64) -> f64 {
            *d
        }
        fn right_value(&self, d: &f64) -> f64 {
            *d
        }
    }

    #[test]
    fn welford_matches_two_pass() {
        let p = Fixed { left: vec![1.0, 2.0, 3.0, 4.0], right: vec![1.0] };
        let t = estimate_left_term(&p, 4, 0).unwrap();
        assert!((t.mean - 2.5).abs() < 1e-15);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((t.std_error - sd / 2.0).abs() < 1e-15);
        assert_eq!(t.n_draws, 4);
    }

    #[test]
    fn log_space_matches_linear() {
        let p = Fixed { left: vec![0.5, 2.0, 7.0], right: vec![1.0] };
        let opts = EstimatorOptions { accumulation: Accumulation::LogSpace };
        let lin = estimate_left_term(&p, 9, 0).unwrap();
        let log = estimate_left_term_with(&p, 9, 0, opts).unwrap();
        assert!((lin.mean - log.mean).abs() < 1e-12);
        assert!((lin.std_error - log.std_error).abs() < 1e-12);
    }

    #[test]
    fn log_space_accepts_zero_values() {
        let cycle = || Cycle { values: vec![-10.0, -11.0, f64::NEG_INFINITY], pos: 0, current: 0.0 };
        let log = estimate_term(&mut cycle(), 3, Term::Left, Accumulation::LogSpace, |d| *d).unwrap();
        let lin = estimate_term(&mut cycle(), 3, Term::Left, Accumulation::Linear, |d| d.exp()).unwrap();
        assert!((log.mean - lin.mean).abs() <= 1e-15 * lin.mean);
        assert!((log.std_error - lin.std_error).abs() <= 1e-12 * lin.std_error);
    }

    #[test]
    fn bad_values_fail_with_index() {
        for bad in [f64::NAN, f64::INFINITY, -1.0] {
            let p = Fixed { left: vec![1.0, 1.0, bad], right: vec![1.0] };
            match estimate_left_term(&p, 5, 0) {
                Err(SdrError::BadEvaluation { term: Term::Left, index: 2, .. }) => {}
                other => panic!("unexpected {other:?}"),
            }
        }
        let p = Fixed { left: vec![1.0], right: vec![f64::NAN] };
        assert!(matches!(
            estimate_right_term(&p, 3, 0),
            Err(SdrError::BadEvaluation { term: Term::Right, index: 0, .. })
        ));
    }

    #[test]
    fn zero_draws_rejected() {
        let p = Fixed { left: vec![1.0], right: vec![1.0] };
        assert!(matches!(estimate_left_term(&p, 0, 0), Err(SdrError::InvalidArgument(_))));
    }

    #[test]
    fn shared_seed_rejected() {
        let p = Fixed { left: vec![1.0], right: vec![1.0] };
        assert!(matches!(estimate_bayes_factor(&p, 3, 7, 7), Err(SdrError::SharedSeed(7))));
    }

    #[test]
    fn seeds_are_distinct_and_reproducible() {
        let a = derive_seeds(11, 50);
        assert_eq!(a, derive_seeds(11, 50));
        let mut all: Vec<u64> = a.iter().flat_map(|s| [s.left, s.right]).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 100);
        assert_ne!(derive_seeds(12, 1), derive_seeds(11, 1));
    }

    #[test]
    fn single_replicate_flags_missing_sd() {
        let cfg = ReplicateConfig::new(4, 1, 3);
        let s = replicate(|_| Ok(Fixed { left: vec![2.0], right: vec![3.0] }), &cfg).unwrap();
        assert_eq!(s.estimates.len(), 1);
        assert_eq!(s.mean_b01, 6.0);
        assert_eq!(s.sd_b01, 0.0);
        assert!(!s.sd_available);
    }

    #[test]
    fn replicate_failure_names_index() {
        let cfg = ReplicateConfig { threads: Some(2), ..ReplicateConfig::new(2, 4, 3) };
        let err = replicate_with(&cfg, |i, _| if i == 2 { Err(SdrError::Domain("x".into())) } else { Ok(i) })
            .unwrap_err();
        assert!(matches!(err, SdrError::Replicate { index: 2, .. }), "{err}");
    }
}
