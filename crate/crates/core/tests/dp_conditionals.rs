use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdr_core::dp::{
    alpha_kernel_posterior, left_term_value_dp, polya_urn_log_ratio,
    right_term_value_dp, sample_mu_conditional, update_alpha_kernel, ChainState, ClusterState, DpHyperParams, DpPrior,
    GammaParameterization,
};
use sdr_core::oracle::quadrature::integrate;
use sdr_core::selftest;

fn prior() -> DpPrior {
    DpHyperParams::default().resolve(GammaParameterization::ShapeRate).unwrap()
}

fn state(assignments: Vec<usize>, values: Vec<f64>, alpha: f64, alpha_prime: Option<f64>) -> ChainState {
    ChainState { clusters: ClusterState::from_parts(assignments, values).unwrap(), alpha, alpha_prime }
}

#[test]
fn mu_update_frequencies_match_exact_weights() {
    let z = selftest::measure_mu_frequencies(100_000, 1).unwrap();
    assert!(z <= 3.0, "max |z| = {z}");
}

#[test]
fn single_observation_always_opens_singleton() {
    let p = prior();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut st = state(vec![0], vec![0.0], 1.0, None);
    for _ in 0..100 {
        sample_mu_conditional(0, &mut st, 0.5, &[2.0], &p, &mut rng).unwrap();
        assert_eq!(st.num_clusters(), 1);
    }
}

#[test]
fn degenerate_base_measure_pins_new_values() {
    let p = DpPrior { sigma2: 1e-12, ..prior() };
    let data = [1.0, 5.0, 9.0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut opened = 0;
    for _ in 0..2000 {
        let mut st = state(vec![0, 1, 2], vec![1.0, 5.0, 9.0], 1.0, None);
        sample_mu_conditional(1, &mut st, 50.0, &data, &p, &mut rng).unwrap();
        let v = st.clusters.mean_of(1);
        if v != 1.0 && v != 9.0 {
            opened += 1;
            assert!((v - p.m).abs() <= 1e-4, "new value {v}");
        }
    }
    assert!(opened > 0);
}

#[test]
fn old_faithful_kernel_posterior_shape() {
    let p = prior();
    let (shape, _) = alpha_kernel_posterior(272, 10.0, &p);
    assert_eq!(shape, 141.0);
}

#[test]
fn kernel_update_without_data_draws_prior() {
    let p = prior();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut st = state(vec![], vec![], 1.0, None);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            update_alpha_kernel(&mut st, &[], &p, &mut rng).unwrap();
            st.alpha
        })
        .collect();
    let (mean, _) = sdr_core::oracle::stats::mean_var(&draws);
    let se = (p.shape / p.rate.powi(2) / draws.len() as f64).sqrt();
    assert!((mean - p.shape / p.rate).abs() <= 3.0 * se);
}

#[test]
fn kernel_update_moments_match_gamma() {
    let p = prior();
    let data = [1.2, 2.0, 4.4, 4.1, 1.9];
    let mut st = state(vec![0, 0, 1, 1, 0], vec![1.8, 4.3], 1.0, None);
    let s: f64 = data.iter().zip(st.clusters.means()).map(|(x, m)| (x - m).powi(2)).sum();
    let (a, b) = (p.shape + 2.5, p.rate + s / 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            update_alpha_kernel(&mut st, &data, &p, &mut rng).unwrap();
            st.alpha
        })
        .collect();
    let (mean, var) = sdr_core::oracle::stats::mean_var(&draws);
    let (em, ev) = (a / b, a / (b * b));
    let mu4 = 3.0 * a * (a + 2.0) / b.powi(4);
    assert!((mean - em).abs() <= 3.0 * (ev / n as f64).sqrt(), "{mean} vs {em}");
    assert!((var - ev).abs() <= 3.0 * ((mu4 - ev * ev) / n as f64).sqrt(), "{var} vs {ev}");
}

#[test]
fn kernel_update_matches_grid() {
    let tv = selftest::measure_alpha_kernel_tv(100_000, 6).unwrap();
    assert!(tv <= 0.01, "tv {tv}");
}

#[test]
fn alpha_prime_chain_matches_grid() {
    let tv = selftest::measure_alpha_prime_tv(100_000, 3, 10, 7).unwrap();
    assert!(tv <= 0.01, "tv {tv}");
}

#[test]
fn alpha_prime_leaves_grid_invariant() {
    let tv = selftest::measure_alpha_prime_invariance_tv(100_000, 3, 10, 8).unwrap();
    assert!(tv <= 0.01, "tv {tv}");
}

#[test]
fn alpha_prime_single_observation_is_prior() {
    let z = selftest::measure_alpha_prime_single_observation(100_000, 9).unwrap();
    assert!(z <= 3.0, "|z| {z}");
}

#[test]
fn full_alpha_matches_grid() {
    let tv = selftest::measure_alpha_full_tv(100_000, 10, 10).unwrap();
    assert!(tv <= 0.01, "tv {tv}");
}

#[test]
fn full_alpha_large_k_matches_shifted_concentration_grid() {
    let tv = selftest::measure_alpha_full_large_k_tv(100_000, 10, 11).unwrap();
    assert!(tv <= 0.01, "tv {tv}");
}

#[test]
fn polya_ratio_enumeration() {
    let err = selftest::measure_polya_enumeration(8, &selftest::POLYA_PAIRS).unwrap();
    assert!(err <= 1e-10, "rel err {err}");
}

#[test]
fn polya_ratio_frozen_value() {
    // d = 2, n = 5, alpha0 = 0.5, alpha = 3; 40-digit reference
    let v = polya_urn_log_ratio(2, 5, 0.5, 3.0).unwrap().exp();
    assert!((v / 2.370_370_370_370_370_4 - 1.0).abs() <= 1e-13, "{v}");
}

#[test]
fn polya_ratio_single_observation_vanishes() {
    for (a0, a) in [(0.5, 7.0), (3.0, 0.01)] {
        assert!(polya_urn_log_ratio(1, 1, a0, a).unwrap().abs() < 1e-14);
    }
}

#[test]
fn right_term_all_singletons_below_one_for_large_alpha() {
    let p = prior();
    let st = state((0..6).collect(), (0..6).map(f64::from).collect(), 20.0, None);
    assert!(right_term_value_dp(&st, &p).unwrap() < 1.0);
}

#[test]
fn left_term_frozen_value() {
    // alpha0 = 0.5, nu1 = nu2 = 5, n = 2, s = 1, k = 1; 40-digit reference
    let p = prior();
    let data = [1.0, 0.0];
    let st = state(vec![0, 1], vec![1.0 - 0.5f64.sqrt(), 0.5f64.sqrt()], 1.0, Some(1.0));
    assert!((st.clusters.residual_ss(&data) - 1.0).abs() < 1e-15);
    let v = left_term_value_dp(&st, &data, &p).unwrap();
    let reference = 0.689_846_547_029_380_5;
    assert!((v / reference - 1.0).abs() <= 1e-12, "{v}");
}

#[test]
fn left_term_without_data_is_one() {
    let p = prior();
    let st = state(vec![], vec![], 1.0, Some(1.0));
    assert_eq!(left_term_value_dp(&st, &[], &p).unwrap(), 1.0);
}

#[test]
fn kernel_posterior_density_normalises() {
    let p = prior();
    let (a, b) = alpha_kernel_posterior(2, 1.0, &p);
    let ln_norm = a * b.ln() - sdr_core::special::ln_gamma(a);
    let total = integrate(|x| if x > 0.0 { (ln_norm + (a - 1.0) * x.ln() - b * x).exp() } else { 0.0 }, 0.0, 60.0, 1e-12);
    assert!((total - 1.0).abs() <= 1e-6, "{total}");
}
