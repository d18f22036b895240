//! Dense-grid discretisation of a one-dimensional density.
//!
//! Serves as the reference distribution for the scalar Gibbs updates and as a
//! fallback exact sampler.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct GridDensity {
    lo: f64,
    width: f64,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridDensity {
    /// Midpoint-rule discretisation of `exp(ln_density)` on `(lo, hi]` with
    /// `cells` equal cells, normalised to total mass one.
    pub fn new(lo: f64, hi: f64, cells: usize, ln_density: impl Fn(f64) -> f64) -> Self {
        assert!(hi > lo && cells > 0);
        let width = (hi - lo) / cells as f64;
        let ln: Vec<f64> = (0..cells).map(|c| ln_density(lo + (c as f64 + 0.5) * width)).collect();
        let top = ln.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        assert!(top.is_finite(), "density vanishes on the whole grid");
        let mut probs: Vec<f64> = ln.iter().map(|v| if v.is_nan() { 0.0 } else { (v - top).exp() }).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        GridDensity { lo, width, probs, cdf }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(c, p)| p * (self.lo + (c as f64 + 0.5) * self.width))
            .sum()
    }

    /// Linear interpolation of the inverse CDF.
    pub fn quantile(&self, q: f64) -> f64 {
        let c = self.cdf.partition_point(|&v| v < q).min(self.cdf.len() - 1);
        let below = if c == 0 { 0.0 } else { self.cdf[c - 1] };
        let frac = if self.probs[c] > 0.0 { ((q - below) / self.probs[c]).clamp(0.0, 1.0) } else { 0.0 };
        self.lo + (c as f64 + frac) * self.width
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Bin edges splitting the grid mass into `bins` equal parts (interior
    /// edges only).
    pub fn equiprobable_edges(&self, bins: usize) -> Vec<f64> {
        (1..bins).map(|b| self.quantile(b as f64 / bins as f64)).collect()
    }

    /// Total-variation distance between the empirical distribution of
    /// `samples` and the grid law, both coarsened to `bins` bins of equal grid
    /// mass.
    pub fn tv_distance(&self, samples: &[f64], bins: usize) -> f64 {
        let edges = self.equiprobable_edges(bins);
        let mut counts = vec![0usize; bins];
        for &s in samples {
            counts[edges.partition_point(|&e| e <= s)] += 1;
        }
        let n = samples.len() as f64;
        0.5 * counts.iter().map(|&c| (c as f64 / n - 1.0 / bins as f64).abs()).sum::<f64>()
    }
}
