use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Model hyperparameters.
///
/// `gamma` is the restart probability of the path prior, `eta` smooths the
/// per-node word distributions. `alpha` is carried for provenance only; the
/// collapsed sampler has no equation that uses it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub gamma: f64,
    pub eta: f64,
    pub alpha: f64,
}

impl Hyperparameters {
    pub const DEFAULT_ETA: f64 = 0.1;
    pub const DEFAULT_ALPHA: f64 = 1.0;
    /// Low restart probability: deep hierarchies.
    pub const GAMMA_DEEP: f64 = 0.05;
    /// High restart probability: shallow hierarchies.
    pub const GAMMA_SHALLOW: f64 = 0.95;

    pub fn new(gamma: f64, eta: f64, alpha: f64) -> Result<Self> {
        let hp = Self { gamma, eta, alpha };
        hp.validate()?;
        Ok(hp)
    }

    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, Self::DEFAULT_ETA, Self::DEFAULT_ALPHA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta must be > 0, got {}",
                self.eta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            gamma: Self::GAMMA_SHALLOW,
            eta: Self::DEFAULT_ETA,
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// Chain schedule: `iterations` sweeps; after `burn_in` sweeps a sample is
/// collected every `lag` sweeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub lag: usize,
    pub seed: u64,
    /// Words kept per node in each collected sample.
    #[serde(default = "default_top_words")]
    pub top_words: usize,
    /// Keep every token's level in each collected sample.
    #[serde(default)]
    pub keep_levels: bool,
}

fn default_top_words() -> usize {
    7
}

impl GibbsConfig {
    pub fn new(iterations: usize, burn_in: usize, lag: usize, seed: u64) -> Result<Self> {
        let c = Self {
            iterations,
            burn_in,
            lag,
            seed,
            top_words: default_top_words(),
            keep_levels: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.lag == 0 {
            return Err(Error::InvalidParameter("lag must be >= 1".into()));
        }
        Ok(())
    }

    /// Whether the sweep numbered `iteration` (1-based) is collected.
    pub fn collects(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in) % self.lag == 0
    }

    pub fn expected_samples(&self) -> usize {
        (self.iterations - self.burn_in) / self.lag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperparameter_ranges() {
        assert!(Hyperparameters::new(1.5, 0.1, 1.0).is_err());
        assert!(Hyperparameters::new(0.0, 0.1, 1.0).is_err());
        assert!(Hyperparameters::new(0.5, 0.0, 1.0).is_err());
        assert!(Hyperparameters::new(0.5, 0.1, -1.0).is_err());
        assert!(Hyperparameters::new(0.5, 0.1, 1.0).is_ok());
    }

    #[test]
    fn schedule_arithmetic() {
        let c = GibbsConfig::new(1, 0, 1, 0).unwrap();
        assert_eq!((1..=1).filter(|&t| c.collects(t)).count(), 1);
        let c = GibbsConfig::new(5000, 2000, 20, 0).unwrap();
        assert_eq!((1..=5000).filter(|&t| c.collects(t)).count(), 150);
        assert_eq!(c.expected_samples(), 150);
        assert!(GibbsConfig::new(10, 10, 1, 0).is_err());
        assert!(GibbsConfig::new(10, 0, 0, 0).is_err());
    }
}
