//! Small statistics toolbox for the Monte Carlo experiments: histograms,
//! Wilson score intervals, chi-square goodness of fit, total-variation
//! distance, median-of-means, and weighted log-log regression.

use std::collections::BTreeMap;
use std::hash::Hash;

use thiserror::Error;

/// Counting histogram over an ordered key type; merging is associative and
/// order-independent, so shards can be folded in any grouping.
#[derive(Clone, Debug, Default)]
pub struct Histogram<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord + Clone + Hash> Histogram<K> {
    pub fn new() -> Self {
        Histogram {
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn record(&mut self, key: K) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.total += other.total;
        self
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn freq(&self, key: &K) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.counts.keys()
    }
}

/// Total-variation distance between two empirical distributions:
/// half the L1 distance over the union of keys.
pub fn tv_distance<K: Ord + Clone + Hash>(a: &Histogram<K>, b: &Histogram<K>) -> f64 {
    let keys: std::collections::BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.freq(k) - b.freq(k)).abs())
        .sum::<f64>()
}

/// TV distance between an empirical histogram and a reference density given
/// as key → probability (missing keys on either side count fully).
pub fn tv_distance_to_density<K: Ord + Clone + Hash>(
    empirical: &Histogram<K>,
    density: &BTreeMap<K, f64>,
) -> f64 {
    let keys: std::collections::BTreeSet<&K> = empirical.keys().chain(density.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (empirical.freq(k) - density.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// z for a central 95% interval.
pub const Z95: f64 = 1.959964;

/// Pearson chi-square statistic against given expected counts.
pub fn chi_square_stat(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Critical value of the chi-square distribution at upper-tail probability
/// 10^-3. Exact table for small degrees of freedom, Wilson–Hilferty
/// approximation (slightly conservative at this tail) above.
pub fn chi_square_crit_1e3(df: usize) -> f64 {
    const TABLE: [f64; 8] = [
        10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124,
    ];
    if df == 0 {
        return 0.0;
    }
    if df <= TABLE.len() {
        return TABLE[df - 1];
    }
    let z = 3.090_232; // standard normal quantile at 1 − 10^-3
    let d = df as f64;
    let t = 1.0 - 2.0 / (9.0 * d) + z * (2.0 / (9.0 * d)).sqrt();
    d * t * t * t
}

/// Chi-square uniformity test: true when the observed counts are consistent
/// with the uniform distribution on their bins at significance 10^-3.
pub fn chi_square_uniform_ok(observed: &[u64]) -> bool {
    let total: u64 = observed.iter().sum();
    let k = observed.len();
    if k <= 1 {
        return true;
    }
    let expected = vec![total as f64 / k as f64; k];
    chi_square_stat(observed, &expected) <= chi_square_crit_1e3(k - 1)
}

/// Median of k block means; robust location estimate for heavy-tailed data.
pub fn median_of_means(values: &[f64], blocks: usize) -> f64 {
    assert!(blocks >= 1 && !values.is_empty());
    let blocks = blocks.min(values.len());
    let mut means: Vec<f64> = (0..blocks)
        .map(|b| {
            let chunk: Vec<&f64> = values
                .iter()
                .skip(b)
                .step_by(blocks)
                .collect();
            chunk.iter().copied().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = means.len() / 2;
    if means.len() % 2 == 1 {
        means[mid]
    } else {
        0.5 * (means[mid - 1] + means[mid])
    }
}

pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("series contains a zero or negative value; widen sampling")]
    AllZeroSeries,
    #[error("need at least {0} points")]
    TooFewPoints(usize),
}

/// Weighted least squares for ln y = a + s·ln x.
///
/// Each point is (x, y, sigma_ln_y) with sigma the standard error of ln y;
/// sigma 0 means an exact point (all points then get equal weight).
pub fn fit_loglog_slope(points: &[(f64, f64, f64)]) -> Result<SlopeFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(3));
    }
    if points.iter().any(|&(x, y, _)| x <= 0.0 || y <= 0.0) {
        return Err(FitError::AllZeroSeries);
    }
    let exact = points.iter().all(|&(_, _, s)| s == 0.0);
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|&(x, y, s)| {
            let w = if exact { 1.0 } else { 1.0 / (s * s).max(1e-12) };
            (x.ln(), y.ln(), w)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(FitError::TooFewPoints(3));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if exact {
        // residual-based estimate
        let n = pts.len() as f64;
        let ss_res: f64 = pts
            .iter()
            .map(|p| {
                let r = p.1 - (intercept + slope * p.0);
                r * r
            })
            .sum();
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        (1.0 / sxx).sqrt()
    };
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_slope() {
        let pts: Vec<(f64, f64, f64)> = (1..=5)
            .map(|k| {
                let x = 10f64.powi(k);
                (x, x.powf(-1.0 / 12.0), 0.0)
            })
            .collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope - (-1.0 / 12.0)).abs() < 1e-9);
    }

    #[test]
    fn constant_series_slope_zero() {
        let pts = vec![(1.0, 2.5, 0.0), (10.0, 2.5, 0.0), (100.0, 2.5, 0.0)];
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn zero_series_rejected() {
        let pts = vec![(1.0, 0.0, 0.0), (10.0, 1.0, 0.0), (100.0, 1.0, 0.0)];
        assert_eq!(
            fit_loglog_slope(&pts).unwrap_err(),
            FitError::AllZeroSeries
        );
    }

    #[test]
    fn wilson_basics() {
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.25);
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi < 0.06);
    }

    #[test]
    fn chi_square_table_and_approx() {
        assert!((chi_square_crit_1e3(5) - 20.515).abs() < 1e-9);
        // Wilson–Hilferty stays within a few percent of the exact df=8 value.
        let approx = {
            let z = 3.090_232f64;
            let d = 9.0f64;
            let t = 1.0 - 2.0 / (9.0 * d) + z * (2.0 / (9.0 * d)).sqrt();
            d * t * t * t
        };
        assert!((approx - 27.877).abs() / 27.877 < 0.02);
    }

    #[test]
    fn mom_resists_outliers() {
        let mut vals = vec![1.0; 160];
        vals[0] = 1e9;
        let m = median_of_means(&vals, 16);
        assert!(m < 2.0);
    }

    #[test]
    fn tv_distance_simple() {
        let mut a = Histogram::new();
        let mut b = Histogram::new();
        for _ in 0..50 {
            a.record(0u32);
            b.record(1u32);
        }
        assert!((tv_distance(&a, &b) - 1.0).abs() < 1e-12);
        let c = a.clone();
        assert_eq!(tv_distance(&a, &c), 0.0);
    }
}
