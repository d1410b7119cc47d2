use serde::{Deserialize, Serialize};

/// One bin of a histogram over `[0, 1]`, normalized to a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `count / (total * width)`; integrates to one over all bins.
    pub density: f64,
}

/// Index of the equal-width bin of `[0, 1]` holding `x`. One falls in the last bin.
pub(crate) fn bin_index(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}

/// Histogram density of values in `[0, 1]` over `bins` equal-width bins.
pub fn density(values: &[f64], bins: usize) -> Vec<DensityBin> {
    let width = 1.0 / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in values {
        counts[bin_index(x, bins)] += 1;
    }
    let total = values.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| DensityBin {
            lo: i as f64 * width,
            hi: (i + 1) as f64 * width,
            count,
            density: if total > 0.0 {
                count as f64 / (total * width)
            } else {
                0.0
            },
        })
        .collect()
}

/// Mean and standard error of the values falling in one bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `None` for an empty bin.
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(count)`; `None` below two values.
    pub std_err: Option<f64>,
}

/// Groups `(key, value)` pairs by the bin of `key` in `[0, 1]` and summarizes `value`.
pub(crate) fn binned_means(pairs: &[(f64, f64)], bins: usize) -> Vec<BinSummary> {
    let width = 1.0 / bins as f64;
    let mut groups = vec![Vec::new(); bins];
    for &(k, v) in pairs {
        groups[bin_index(k, bins)].push(v);
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let (mean, std_err) = mean_and_std_err(&g);
            BinSummary {
                lo: i as f64 * width,
                hi: (i + 1) as f64 * width,
                count: g.len(),
                mean,
                std_err,
            }
        })
        .collect()
}

pub(crate) fn mean_and_std_err(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

/// Five-number summary plus mean, for box plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl BoxSummary {
    /// Quartiles by linear interpolation between order statistics. `None`
    /// for an empty input.
    pub fn new(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            count: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}
