use rand::Rng;

use crate::error::Result;
use crate::nmr::clamp_admissible;
use crate::quasi::QuasiState;

/// Inverse-CDF sampler over direction tuples, weighted by a nonnegative
/// hidden vector. Building costs one pass over the `𝒩^N` weights; each spin
/// consumes exactly one uniform variate and a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct RouletteWheel {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl RouletteWheel {
    /// Fails with `NegativeQuasiWeight` for inadmissible weights.
    pub fn new(w: &QuasiState) -> Result<Self> {
        let w = clamp_admissible(w)?;
        let mut running = 0.0;
        let cdf: Vec<f64> = w
            .weights()
            .iter()
            .map(|&x| {
                running += x;
                running
            })
            .collect();
        let last_positive = w.weights().iter().rposition(|&x| x > 0.0).unwrap_or(0);
        Ok(RouletteWheel { cdf, last_positive })
    }

    /// Tuple code for a uniform variate `u ∈ [0, 1)`.
    #[inline]
    pub fn select(&self, u: f64) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let target = u * total;
        let idx = self.cdf.partition_point(|&c| c <= target);
        idx.min(self.last_positive)
    }

    #[inline]
    pub fn spin(&self, rng: &mut impl Rng) -> usize {
        self.select(rng.random::<f64>())
    }
}

/// One spin of a freshly built wheel. Prefer [`RouletteWheel`] for repeated
/// draws.
pub fn spin_wheel(w: &QuasiState, rng: &mut impl Rng) -> Result<usize> {
    Ok(RouletteWheel::new(w)?.spin(rng))
}
