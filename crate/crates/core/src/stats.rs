//! Sample summaries and the diagnostics used by the experiments.
//!
//! Estimators, for a sample of size `k` with central moments `m2, m3, m4`
//! (divisor `k`):
//!
//! ```text
//! variance      s2 = k m2 / (k - 1)
//! skewness      G1 = g1 sqrt(k (k - 1)) / (k - 2),              g1 = m3 / m2^{3/2}
//! ex. kurtosis  G2 = ((k + 1) g2 + 6) (k - 1) / ((k - 2)(k - 3)), g2 = m4 / m2^2 - 3
//! ```
//!
//! The histogram uses Sturges' rule, `ceil(log2 k) + 1` equal bins over
//! `[min, max]`. The KS distance compares the sample with the normal law of
//! matching mean and variance. For data on a lattice of spacing `h` the
//! normal CDF is evaluated at `v + h/2` against the ECDF at `v` and at
//! `v - h/2` against its left limit, the usual continuity correction.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{CensusError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub rule: &'static str,
    pub low: f64,
    pub width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn sturges(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Histogram {
                rule: "sturges",
                low: 0.0,
                width: 0.0,
                counts: Vec::new(),
            };
        }
        let (lo, hi) = min_max(values);
        let bins = if hi > lo {
            (k as f64).log2().ceil() as usize + 1
        } else {
            1
        };
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let b = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[b] += 1;
        }
        Histogram {
            rule: "sturges",
            low: lo,
            width,
            counts,
        }
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Absent below three observations or for a constant sample.
    pub skewness: Option<f64>,
    /// Absent below four observations or for a constant sample.
    pub excess_kurtosis: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
    /// Absent for a constant sample.
    pub ks_distance: Option<f64>,
    /// Lattice spacing used for the KS continuity correction.
    pub lattice: Option<f64>,
    /// All observations equal.
    pub degenerate: bool,
}

impl SampleStats {
    /// Summary of continuous-valued data.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::compute(values, None)
    }

    /// Summary of integer-valued data.
    pub fn from_counts(values: &[u64]) -> Result<Self> {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        Self::compute(&v, Some(1.0))
    }

    /// `lattice` is the spacing of the support if the data are discrete.
    pub fn compute(values: &[f64], lattice: Option<f64>) -> Result<Self> {
        let k = values.len();
        if k == 0 {
            return Err(CensusError::InvalidInput("statistics of an empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CensusError::InvalidInput("sample contains non-finite values".into()));
        }
        let kf = k as f64;
        let mean = values.iter().sum::<f64>() / kf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= kf;
        m3 /= kf;
        m4 /= kf;
        let (min, max) = min_max(values);
        let degenerate = min == max;
        let variance = if k > 1 { kf * m2 / (kf - 1.0) } else { 0.0 };
        let std_error = (variance / kf).sqrt();
        let skewness = (!degenerate && k >= 3).then(|| {
            let g1 = m3 / m2.powf(1.5);
            g1 * (kf * (kf - 1.0)).sqrt() / (kf - 2.0)
        });
        let excess_kurtosis = (!degenerate && k >= 4).then(|| {
            let g2 = m4 / (m2 * m2) - 3.0;
            ((kf + 1.0) * g2 + 6.0) * (kf - 1.0) / ((kf - 2.0) * (kf - 3.0))
        });
        let ks_distance = if degenerate || k < 2 {
            None
        } else {
            Some(ks_normal(values, mean, variance.sqrt(), lattice))
        };
        Ok(SampleStats {
            count: k as u64,
            mean,
            variance,
            std_error,
            skewness,
            excess_kurtosis,
            min,
            max,
            histogram: Histogram::sturges(values),
            ks_distance,
            lattice,
            degenerate,
        })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Sup distance between the ECDF of `values` and `N(mean, sd^2)`, with the
/// continuity correction when `lattice` is given.
pub fn ks_normal(values: &[f64], mean: f64, sd: f64, lattice: Option<f64>) -> f64 {
    assert!(sd > 0.0);
    let normal = Normal::new(mean, sd).expect("positive standard deviation");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let k = sorted.len() as f64;
    let half = lattice.map_or(0.0, |h| h / 2.0);
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / k;
        let upto = j as f64 / k;
        d = d.max((normal.cdf(v - half) - below).abs());
        d = d.max((upto - normal.cdf(v + half)).abs());
        i = j;
    }
    d
}

/// `(x - mean) / sd` for every value; `None` for a constant sample.
pub fn standardize(values: &[f64]) -> Option<Vec<f64>> {
    let k = values.len() as f64;
    if values.len() < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    if var <= 0.0 {
        return None;
    }
    let sd = var.sqrt();
    Some(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Acceptance thresholds for approximate normality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityPolicy {
    pub max_abs_skewness: f64,
    pub max_abs_excess_kurtosis: f64,
    pub max_ks: f64,
}

impl Default for NormalityPolicy {
    fn default() -> Self {
        NormalityPolicy {
            max_abs_skewness: 0.2,
            max_abs_excess_kurtosis: 0.4,
            max_ks: 0.03,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormalityVerdict {
    pub skewness_ok: bool,
    pub kurtosis_ok: bool,
    pub ks_ok: bool,
}

impl NormalityVerdict {
    pub fn passes(&self) -> bool {
        self.skewness_ok && self.kurtosis_ok && self.ks_ok
    }
}

impl NormalityPolicy {
    /// A degenerate sample fails every check.
    pub fn check(&self, s: &SampleStats) -> NormalityVerdict {
        NormalityVerdict {
            skewness_ok: s.skewness.is_some_and(|g| g.abs() <= self.max_abs_skewness),
            kurtosis_ok: s.excess_kurtosis.is_some_and(|g| g.abs() <= self.max_abs_excess_kurtosis),
            ks_ok: s.ks_distance.is_some_and(|d| d <= self.max_ks),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson goodness of fit of `observed` against cell probabilities.
pub fn chi_square_test(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probabilities.len() || observed.len() < 2 {
        return Err(CensusError::InvalidInput(
            "chi-square needs at least two cells and one probability per cell".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    let psum: f64 = probabilities.iter().sum();
    if total == 0 || (psum - 1.0).abs() > 1e-9 || probabilities.iter().any(|&p| p <= 0.0) {
        return Err(CensusError::InvalidInput(
            "chi-square needs observations and positive probabilities summing to 1".into(),
        ));
    }
    let statistic = observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = observed.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub const Z_95: f64 = 1.959963984540054;
