//! Interval estimates and the few hypothesis tests the experiments need.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
}

impl EstimateWithCI {
    /// Wilson score interval for `successes / n`. With `n = 0` the estimate
    /// is 0 and the interval is `[0, 1]`.
    pub fn proportion(successes: u64, n: u64) -> Self {
        if n == 0 {
            return Self { estimate: 0.0, ci_low: 0.0, ci_high: 1.0, n };
        }
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        Self {
            estimate: p,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
            n,
        }
    }

    /// Normal interval for a mean from a running sum and sum of squares.
    pub fn mean(sum: f64, sum_sq: f64, n: u64) -> Self {
        if n == 0 {
            return Self { estimate: f64::NAN, ci_low: f64::NEG_INFINITY, ci_high: f64::INFINITY, n };
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        let half = Z95 * (var / nf).sqrt();
        Self { estimate: mean, ci_low: mean - half, ci_high: mean + half, n }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0
    }
}

/// One-sided p-value for `H1: p1 > p2` from the pooled two-proportion z
/// test.
pub fn two_proportion_p_value(s1: u64, n1: u64, s2: u64, n2: u64) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let (p1, p2) = (s1 as f64 / n1f, s2 as f64 / n2f);
    let pooled = (s1 + s2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return if p1 > p2 { 0.0 } else { 1.0 };
    }
    let z = (p1 - p2) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    1.0 - normal.cdf(z)
}

/// Pearson goodness-of-fit p-value of `observed` against `probabilities`.
/// Cells with zero probability must have zero count.
pub fn chi_square_p_value(observed: &[u64], probabilities: &[f64]) -> Result<f64> {
    if observed.len() != probabilities.len() || observed.len() < 2 {
        return Err(Error::InvalidParameter("chi-square needs matching cells, at least two".into()));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probabilities) {
        if p == 0.0 {
            if o != 0 {
                return Ok(0.0);
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if cells < 2 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new((cells - 1) as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}
