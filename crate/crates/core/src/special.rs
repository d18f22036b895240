//! Log densities shared by the samplers and evaluators.

use std::f64::consts::PI;

pub use statrs::function::gamma::ln_gamma;

/// Log density of Gamma(shape, rate) at `x > 0`.
pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Log density of Normal(mean, variance) at `x`.
pub fn normal_ln_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    -0.5 * ((2.0 * PI * variance).ln() + z * z / variance)
}
