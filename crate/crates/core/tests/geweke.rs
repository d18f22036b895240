use sdr_core::dp::forward::ModelKind;
use sdr_core::dp::{DpHyperParams, GammaParameterization};
use sdr_core::oracle::geweke::geweke_test;

fn check(kind: ModelKind, seed: u64) {
    let prior = DpHyperParams::default().resolve(GammaParameterization::ShapeRate).unwrap();
    let report = geweke_test(kind, 10, 100_000, &prior, seed).unwrap();
    for c in &report.comparisons {
        assert!(c.z().abs() <= 3.0, "{kind:?} {}: forward {} chain {} z {}", c.name, c.forward_mean, c.chain_mean, c.z());
    }
}

#[test]
fn auxiliary_sampler_passes_geweke() {
    check(ModelKind::Auxiliary, 1);
}

#[test]
fn fixed_concentration_auxiliary_sampler_passes_geweke() {
    check(ModelKind::AuxiliaryFixed, 2);
}

#[test]
fn full_sampler_passes_geweke() {
    check(ModelKind::Full, 3);
}
