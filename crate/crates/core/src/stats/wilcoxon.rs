use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::PValue;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum WilcoxonMode {
    /// Normal approximation without continuity or tie correction.
    #[default]
    Normal,
    /// Exact null distribution of W⁺ by enumeration; at most 25 non-zero differences.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Number of non-zero differences.
    pub n: usize,
    /// Sum of (mid-)ranks of positive differences.
    pub w_plus: f64,
    pub z: f64,
    pub p: PValue,
}

/// Two-sided signed-rank test of `values` against the location `mu0`,
/// normal approximation.
pub fn wilcoxon_signed_rank(values: &[f64], mu0: f64) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(values, mu0, WilcoxonMode::Normal)
}

pub fn wilcoxon_signed_rank_with(values: &[f64], mu0: f64, mode: WilcoxonMode) -> Result<WilcoxonResult> {
    if values.len() < 6 {
        return Err(Error::invalid(format!(
            "signed-rank test needs at least 6 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) || !mu0.is_finite() {
        return Err(Error::invalid("signed-rank inputs must be finite"));
    }
    let mut diffs: Vec<f64> = values
        .iter()
        .map(|v| v - mu0)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::Degenerate("all differences from mu0 are zero".into()));
    }
    diffs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));

    // Mid-ranks, kept doubled so they stay integral.
    let n = diffs.len();
    let mut doubled_ranks = vec![0u64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        let doubled = (i + 1 + j + 1) as u64;
        doubled_ranks[i..=j].fill(doubled);
        i = j + 1;
    }
    let w_plus_doubled: u64 = diffs
        .iter()
        .zip(&doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w_plus = w_plus_doubled as f64 / 2.0;

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    let z = (w_plus - mean) / sd;

    let p = match mode {
        WilcoxonMode::Normal => {
            let normal = Normal::standard();
            PValue::analytic(2.0 * normal.sf(z.abs()))
        }
        WilcoxonMode::Exact => {
            if n > 25 {
                return Err(Error::invalid(format!(
                    "exact mode supports at most 25 non-zero differences, got {n}"
                )));
            }
            PValue::analytic(exact_two_sided(&doubled_ranks, w_plus_doubled))
        }
    };
    Ok(WilcoxonResult { n, w_plus, z, p })
}

/// Each rank enters W⁺ with probability 1/2 under the null; count subset sums.
fn exact_two_sided(doubled_ranks: &[u64], observed: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (r..counts.len()).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all: f64 = counts.iter().sum();
    let lower: f64 = counts[..=observed as usize].iter().sum::<f64>() / all;
    let upper: f64 = counts[observed as usize..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}
