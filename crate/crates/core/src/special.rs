//! Log-gamma helpers for Dirichlet-multinomial terms.

/// Natural log of the gamma function for positive arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Numerically stable `ln(sum(exp(xs)))`. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if xs.len() == 1 {
        return xs[0];
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Table of `ln Γ(n + offset)` for integer `n` in `0..=max`, with a fallback to
/// [`ln_gamma`] beyond the table.
///
/// Count-based terms such as `ln Γ(n + η)` are evaluated millions of times per
/// sweep; the table turns each into a lookup.
#[derive(Debug, Clone)]
pub struct LnGammaTable {
    offset: f64,
    values: Vec<f64>,
}

impl LnGammaTable {
    pub fn new(offset: f64, max: usize) -> Self {
        let values = (0..=max).map(|n| ln_gamma(n as f64 + offset)).collect();
        Self { offset, values }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn get(&self, n: u64) -> f64 {
        match self.values.get(n as usize) {
            Some(&v) => v,
            None => ln_gamma(n as f64 + self.offset),
        }
    }

    /// `ln Γ(n + x + offset) - ln Γ(n + offset)`.
    #[inline]
    pub fn rising(&self, n: u64, x: u64) -> f64 {
        self.get(n + x) - self.get(n)
    }
}
