//! Statistical test battery.
//!
//! Every permutation or Monte-Carlo draw `k` uses its own seed stream
//! `(seed, tag, k)`, so p-values do not depend on thread count or scheduling.

mod hsic;
mod kernel;
mod ks;
mod wilcoxon;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use hsic::{hsic_perm_test, hsic_statistic, HsicTest};
pub use kernel::{median_heuristic, KernelKind, KernelSpec};
pub use ks::{ks_statistic_uniform, ks_uniformity_test};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMode, WilcoxonResult};

/// How a permutation p-value converts its exceedance count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// `(count + 1) / (n + 1)`; never zero.
    #[default]
    AddOne,
    /// `count / n`; reproduces literal zero entries.
    Raw,
}

impl std::str::FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add-one" => Ok(Smoothing::AddOne),
            "raw" => Ok(Smoothing::Raw),
            other => Err(Error::invalid(format!(
                "unknown smoothing `{other}` (expected add-one or raw)"
            ))),
        }
    }
}

impl std::fmt::Display for Smoothing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Smoothing::AddOne => "add-one",
            Smoothing::Raw => "raw",
        })
    }
}

/// A p-value together with how it was obtained.
///
/// `n_permutations` is zero for analytic p-values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PValue {
    pub value: f64,
    pub n_permutations: usize,
    pub smoothing: Smoothing,
}

impl PValue {
    pub fn from_count(exceed: usize, n_permutations: usize, smoothing: Smoothing) -> PValue {
        debug_assert!(exceed <= n_permutations);
        let value = match smoothing {
            Smoothing::AddOne => (exceed + 1) as f64 / (n_permutations + 1) as f64,
            Smoothing::Raw => exceed as f64 / n_permutations as f64,
        };
        PValue {
            value,
            n_permutations,
            smoothing,
        }
    }

    pub fn analytic(value: f64) -> PValue {
        PValue {
            value: value.clamp(0.0, 1.0),
            n_permutations: 0,
            smoothing: Smoothing::Raw,
        }
    }

    /// A p-value taken as given, e.g. a transcribed table entry.
    pub fn given(value: f64) -> Result<PValue> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("p-value {value} outside [0, 1]")));
        }
        Ok(PValue::analytic(value))
    }
}

/// Counts the draws `k in 0..n` for which `exceeds(k, rng_k)` holds, where
/// `rng_k` is the stream `(seed, stream_tag, k)`.
pub fn count_exceedances<F>(n: usize, seed: u64, stream_tag: u64, exceeds: F) -> usize
where
    F: Fn(usize, &mut ChaCha8Rng) -> bool + Sync,
{
    (0..n)
        .into_par_iter()
        .filter(|&k| {
            let mut r = rng::stream(seed, &[stream_tag, k as u64]);
            exceeds(k, &mut r)
        })
        .count()
}
