//! Small sample-statistics helpers shared by the Monte Carlo checks.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl MeanEstimate {
    /// Summarise `samples` in the order given (the sum is sequential so the
    /// result is reproducible bit for bit).
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, std_error: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { n, mean, std_error }
    }

    /// |mean − expected| ≤ max(k·SE, rel·|expected|).
    pub fn agrees_with(&self, expected: f64, k_se: f64, rel: f64) -> bool {
        (self.mean - expected).abs() <= (k_se * self.std_error).max(rel * expected.abs())
    }

    /// Distance to `expected` in standard errors.
    pub fn z_score(&self, expected: f64) -> f64 {
        (self.mean - expected) / self.std_error
    }
}

/// Normal-approximation (Wald) half width for a binomial proportion.
/// Zero when the proportion is 0 or 1.
pub fn proportion_half_width(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    Z95 * (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Sample covariance of paired samples with the standard error of the
/// product-moment estimate.
pub fn covariance_with_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let est = MeanEstimate::from_samples(&prods);
    (est.mean, est.std_error)
}
