use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    /// `exp(-(a - b)² / (2σ²))` with σ from the median heuristic unless overridden.
    GaussianMedianHeuristic,
    /// `1` if the values are equal, `0` otherwise.
    DeltaDiscrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: Option<f64>,
}

impl KernelSpec {
    pub fn gaussian() -> Self {
        KernelSpec {
            kind: KernelKind::GaussianMedianHeuristic,
            bandwidth: None,
        }
    }

    pub fn gaussian_with_bandwidth(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("bandwidth must be positive, got {sigma}")));
        }
        Ok(KernelSpec {
            kind: KernelKind::GaussianMedianHeuristic,
            bandwidth: Some(sigma),
        })
    }

    pub fn delta() -> Self {
        KernelSpec {
            kind: KernelKind::DeltaDiscrete,
            bandwidth: None,
        }
    }

    /// Row-major `n x n` Gram matrix of `x`.
    pub(crate) fn gram(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let mut k = vec![0.0; n * n];
        match self.kind {
            KernelKind::GaussianMedianHeuristic => {
                let sigma = match self.bandwidth {
                    Some(s) if s > 0.0 => s,
                    Some(s) => return Err(Error::invalid(format!("bandwidth must be positive, got {s}"))),
                    None => median_heuristic(x)?,
                };
                let scale = -1.0 / (2.0 * sigma * sigma);
                for i in 0..n {
                    k[i * n + i] = 1.0;
                    for j in i + 1..n {
                        let d = x[i] - x[j];
                        let v = (scale * d * d).exp();
                        k[i * n + j] = v;
                        k[j * n + i] = v;
                    }
                }
            }
            KernelKind::DeltaDiscrete => {
                for i in 0..n {
                    for j in 0..n {
                        k[i * n + j] = if x[i] == x[j] { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        Ok(k)
    }
}

/// Median of the pairwise distances `|x_i - x_j|`, `i < j`.
///
/// Constant input (median 0) falls back to 1.0.
pub fn median_heuristic(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("median heuristic needs at least 2 points"));
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push((x[i] - x[j]).abs());
        }
    }
    let m = d.len();
    let mid = m / 2;
    let (lower, upper, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    };
    Ok(if median > 0.0 { median } else { 1.0 })
}
