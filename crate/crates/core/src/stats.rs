//! Mergeable summary statistics.

use alloc::string::String;

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Streaming `(count, mean, M2)` summary of one observable.
///
/// `push` is Welford's update and `merge` is the pairwise update of Chan et
/// al., so per-worker summaries can be combined in any grouping. Floating
/// point makes the grouping visible in the last bits; callers that need
/// bit-identical output merge in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSummary {
    pub label: String,
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl EstimateSummary {
    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(label: impl Into<String>, values: I) -> Self {
        let mut s = Self::empty(label);
        for v in values {
            s.push(v);
        }
        s
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &EstimateSummary) -> Result<EstimateSummary> {
        if self.label != other.label {
            return Err(Error::LabelMismatch {
                left: self.label.clone(),
                right: other.label.clone(),
            });
        }
        if other.count == 0 {
            return Ok(self.clone());
        }
        if self.count == 0 {
            return Ok(other.clone());
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        Ok(EstimateSummary {
            label: self.label.clone(),
            count: self.count + other.count,
            mean: self.mean + delta * (nb / n),
            m2: self.m2 + other.m2 + delta * delta * (na * nb / n),
        })
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// `sqrt(M2 / (count (count - 1)))`; NaN below two samples.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            libm::sqrt(self.m2 / (self.count as f64 * (self.count - 1) as f64))
        }
    }

    pub fn finish(&self, method: &'static str) -> Estimate {
        Estimate {
            label: self.label.clone(),
            count: self.count,
            mean: self.mean,
            stderr: self.stderr(),
            method,
        }
    }
}

/// A finished point estimate with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub label: String,
    /// Number of independent units (replicates or cycles) behind the value.
    pub count: u64,
    pub mean: f64,
    pub stderr: f64,
    pub method: &'static str,
}

impl Estimate {
    /// Standard error of `self - other` for independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        libm::sqrt(self.stderr * self.stderr + other.stderr * other.stderr)
    }

    /// `|self - other| <= k * combined stderr`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.combined_stderr(other)
    }
}

/// Sample covariance of paired values (denominator `len - 1`).
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let my = ys.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let s: CompensatedSum = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    s.value() / (n - 1) as f64
}
