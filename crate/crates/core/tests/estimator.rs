use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdr_core::dp::{right_term_value_dp, ChainSettings, DpHyperParams, DpProblem, FullChain};
use sdr_core::oracle::random_discrete_spec;
use sdr_core::selftest::{measure_convergence_slope, measure_repeated};
use sdr_core::validation::{DiscreteNestedSpec, DiscreteProblem, GaussianNestedSpec, GaussianProblem};
use sdr_core::{
    estimate_bayes_factor, estimate_left_term, estimate_right_term, estimate_term, replicate, Accumulation,
    NestedProblem, PosteriorSampler, ReplicateConfig, Result, SdrError, Term,
};

/// Wraps a problem and multiplies its left evaluator by a constant.
struct ScaledLeft<P> {
    inner: P,
    factor: f64,
}

impl<P: NestedProblem> NestedProblem for ScaledLeft<P> {
    type AuxSampler = P::AuxSampler;
    type FullSampler = P::FullSampler;

    fn auxiliary_sampler(&self, seed: u64) -> Result<Self::AuxSampler> {
        self.inner.auxiliary_sampler(seed)
    }
    fn full_sampler(&self, seed: u64) -> Result<Self::FullSampler> {
        self.inner.full_sampler(seed)
    }
    fn left_value(&self, draw: &<P::AuxSampler as PosteriorSampler>::Draw) -> f64 {
        self.factor * self.inner.left_value(draw)
    }
    fn right_value(&self, draw: &<P::FullSampler as PosteriorSampler>::Draw) -> f64 {
        self.inner.right_value(draw)
    }
}

/// Replaces both evaluators by constants.
struct Constant<P> {
    inner: P,
    left: f64,
    right: f64,
}

impl<P: NestedProblem> NestedProblem for Constant<P> {
    type AuxSampler = P::AuxSampler;
    type FullSampler = P::FullSampler;

    fn auxiliary_sampler(&self, seed: u64) -> Result<Self::AuxSampler> {
        self.inner.auxiliary_sampler(seed)
    }
    fn full_sampler(&self, seed: u64) -> Result<Self::FullSampler> {
        self.inner.full_sampler(seed)
    }
    fn left_value(&self, _: &<P::AuxSampler as PosteriorSampler>::Draw) -> f64 {
        self.left
    }
    fn right_value(&self, _: &<P::FullSampler as PosteriorSampler>::Draw) -> f64 {
        self.right
    }
}

fn two_by_two() -> DiscreteProblem {
    DiscreteProblem::new(DiscreteNestedSpec::two_by_two()).unwrap()
}

#[test]
fn constant_evaluators_give_exact_one() {
    let p = Constant { inner: two_by_two(), left: 1.0, right: 1.0 };
    let left = estimate_left_term(&p, 1000, 1).unwrap();
    let right = estimate_right_term(&p, 1000, 2).unwrap();
    assert_eq!((left.mean, left.std_error), (1.0, 0.0));
    assert_eq!((right.mean, right.std_error), (1.0, 0.0));
    assert_eq!(estimate_bayes_factor(&p, 1000, 1, 2).unwrap().b01, 1.0);
}

#[test]
fn constant_evaluators_replicated() {
    let summary = replicate(|_| Ok(Constant { inner: two_by_two(), left: 1.0, right: 1.0 }), &ReplicateConfig::new(200, 30, 5))
        .unwrap();
    assert_eq!(summary.estimates.len(), 30);
    assert_eq!(summary.mean_b01, 1.0);
    assert_eq!(summary.sd_b01, 0.0);
    assert!(summary.sd_available);
}

#[test]
fn single_replicate_flags_missing_sd() {
    let summary = replicate(|_| Ok(two_by_two()), &ReplicateConfig::new(100, 1, 5)).unwrap();
    assert!(!summary.sd_available);
    assert_eq!(summary.sd_b01, 0.0);
}

#[test]
fn shared_seed_rejected() {
    assert!(matches!(estimate_bayes_factor(&two_by_two(), 10, 3, 3), Err(SdrError::SharedSeed(3))));
}

#[test]
fn negative_evaluator_reports_draw_index() {
    let p = Constant { inner: two_by_two(), left: -1.0, right: 1.0 };
    match estimate_left_term(&p, 10, 1) {
        Err(SdrError::BadEvaluation { term: Term::Left, index: 0, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn discrete_terms_within_three_standard_errors() {
    let p = two_by_two();
    let exact = p.spec().exact_terms().unwrap();
    let left = estimate_left_term(&p, 100_000, 11).unwrap();
    let right = estimate_right_term(&p, 100_000, 12).unwrap();
    assert!((left.mean - exact.left).abs() <= 3.0 * left.std_error, "{left:?} vs {}", exact.left);
    assert!((right.mean - exact.right).abs() <= 3.0 * right.std_error, "{right:?} vs {}", exact.right);
}

#[test]
fn discrete_random_spec_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let spec = random_discrete_spec(&mut rng, 3, 4);
    let exact = spec.exact_terms().unwrap();
    let p = DiscreteProblem::new(spec).unwrap();
    let est = estimate_bayes_factor(&p, 100_000, 1, 2).unwrap();
    assert!((est.left.mean - exact.left).abs() <= 3.0 * est.left.std_error);
    assert!((est.right.mean - exact.right).abs() <= 3.0 * est.right.std_error);
}

#[test]
fn discrete_unbiased_over_repetitions() {
    let p = two_by_two();
    let rep = measure_repeated(&p, 1.2, 200, 10_000, 3).unwrap();
    assert!(rep.z().abs() <= 3.0, "{rep:?}");
}

#[test]
fn gaussian_separable_left_term_matches_sddr() {
    let spec = GaussianNestedSpec::reference(0.0);
    let exact = spec.exact_bayes_factor().unwrap();
    let p = GaussianProblem::new(spec).unwrap();
    let left = estimate_left_term(&p, 100_000, 21).unwrap();
    assert!((left.mean - exact).abs() <= 3.0 * left.std_error, "{left:?} vs {exact}");
    let right = estimate_right_term(&p, 1000, 22).unwrap();
    assert_eq!((right.mean, right.std_error), (1.0, 0.0));
}

#[test]
fn gaussian_correlated_product_within_two_percent() {
    let spec = GaussianNestedSpec::reference(0.5);
    let exact = spec.exact_bayes_factor().unwrap();
    let p = GaussianProblem::new(spec).unwrap();
    let est = estimate_bayes_factor(&p, 100_000, 31, 32).unwrap();
    assert!(((est.b01 - exact) / exact).abs() <= 0.02, "{} vs {exact}", est.b01);
}

#[test]
fn scaling_left_evaluator_is_exactly_equivariant() {
    for factor in [4.0, 0.125] {
        let base = estimate_bayes_factor(&two_by_two(), 5000, 1, 2).unwrap();
        let scaled = estimate_bayes_factor(&ScaledLeft { inner: two_by_two(), factor }, 5000, 1, 2).unwrap();
        assert_eq!(scaled.left.mean, factor * base.left.mean);
        assert_eq!(scaled.b01, factor * base.b01);
        assert_eq!(scaled.right, base.right);
    }
}

#[test]
fn identical_seeds_are_bit_identical() {
    let p = GaussianProblem::new(GaussianNestedSpec::reference(0.5)).unwrap();
    let a = estimate_bayes_factor(&p, 2000, 8, 9).unwrap();
    let b = estimate_bayes_factor(&p, 2000, 8, 9).unwrap();
    assert_eq!(a, b);
    let c = estimate_bayes_factor(&p, 2000, 8, 10).unwrap();
    assert_ne!(a.right, c.right);
}

#[test]
fn nonnegative_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let p = DiscreteProblem::new(random_discrete_spec(&mut rng, 3, 3)).unwrap();
        let est = estimate_bayes_factor(&p, 200, 1, 2).unwrap();
        assert!(est.left.mean >= 0.0 && est.right.mean >= 0.0 && est.b01 >= 0.0);
    }
}

#[test]
fn dp_right_term_is_one_when_alpha_equals_alpha0() {
    let prior = DpHyperParams::default().resolve(Default::default()).unwrap();
    let data: Vec<f64> = (0..15).map(|i| 1.5 + 0.25 * i as f64).collect();
    let settings = ChainSettings { burn_in: 50, ..Default::default() };
    let mut chain = FullChain::new(data.into(), prior, &settings, 9).unwrap();
    let est = estimate_term(&mut chain, 500, Term::Right, Accumulation::Linear, |state| {
        let mut forced = state.clone();
        forced.alpha = prior.alpha0;
        right_term_value_dp(&forced, &prior).unwrap()
    })
    .unwrap();
    assert_eq!((est.mean, est.std_error), (1.0, 0.0));
}

#[test]
fn dp_problem_estimate_is_deterministic_and_finite() {
    let prior = DpHyperParams::default().resolve(Default::default()).unwrap();
    let data: Vec<f64> = (0..30).map(|i| if i % 3 == 0 { 2.0 } else { 4.3 } + 0.05 * (i % 5) as f64).collect();
    let p = DpProblem::new(data, prior, ChainSettings { burn_in: 100, ..Default::default() }).unwrap();
    let a = estimate_bayes_factor(&p, 300, 1, 2).unwrap();
    let b = estimate_bayes_factor(&p, 300, 1, 2).unwrap();
    assert_eq!(a, b);
    assert!(a.b01.is_finite() && a.b01 >= 0.0);
}

#[test]
fn convergence_rate_discrete() {
    let p = two_by_two();
    let s = measure_convergence_slope(&p, 1.2, &[1_000, 10_000, 100_000], 40, 5).unwrap();
    assert!((-0.65..=-0.35).contains(&s), "slope {s}");
}

#[test]
fn convergence_rate_gaussian() {
    let spec = GaussianNestedSpec::reference(0.5);
    let exact = spec.exact_bayes_factor().unwrap();
    let p = GaussianProblem::new(spec).unwrap();
    let s = measure_convergence_slope(&p, exact, &[1_000, 10_000, 100_000], 40, 6).unwrap();
    assert!((-0.65..=-0.35).contains(&s), "slope {s}");
}

