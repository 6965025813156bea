//! Biased HSIC estimator `trace(K H L H) / n²` and its permutation test.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{count_exceedances, KernelKind, KernelSpec, PValue, Smoothing};
use crate::error::{Error, Result};
use crate::rng::tag;

/// Doubly centred Gram matrix `H K H`.
fn centre(mut k: Vec<f64>, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n)
        .map(|i| k[i * n..(i + 1) * n].iter().sum::<f64>() / nf)
        .collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    for i in 0..n {
        for j in 0..n {
            // K is symmetric, so column means equal row means.
            k[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    k
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::invalid("HSIC needs at least 3 samples"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("HSIC inputs must be finite"));
    }
    Ok(())
}

/// `trace(K H L H) / n²`, clamped at zero against rounding.
pub fn hsic_statistic(x: &[f64], y: &[f64], kx: KernelSpec, ky: KernelSpec) -> Result<f64> {
    check_inputs(x, y)?;
    let n = x.len();
    let kc = centre(kx.gram(x)?, n);
    let l = ky.gram(y)?;
    let s: f64 = kc.iter().zip(&l).map(|(a, b)| a * b).sum();
    Ok((s / (n * n) as f64).max(0.0))
}

/// Precomputed state for repeated evaluation of the statistic under
/// permutations of `y`. Kernel bandwidths are frozen at construction, from
/// the unpermuted data.
pub struct HsicTest {
    n: usize,
    kc: Vec<f64>,
    y: YSide,
}

enum YSide {
    /// Class codes of `y`; the statistic reduces to within-class block sums.
    Classes { codes: Vec<u32>, n_classes: usize },
    Gram(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HsicOutcome {
    pub statistic: f64,
    pub p: PValue,
}

impl HsicTest {
    pub fn new(x: &[f64], y: &[f64], kx: KernelSpec, ky: KernelSpec) -> Result<HsicTest> {
        check_inputs(x, y)?;
        let n = x.len();
        let kc = centre(kx.gram(x)?, n);
        let y = match ky.kind {
            KernelKind::DeltaDiscrete => {
                let mut levels: Vec<f64> = Vec::new();
                let codes = y
                    .iter()
                    .map(|v| match levels.iter().position(|l| l == v) {
                        Some(c) => c as u32,
                        None => {
                            levels.push(*v);
                            (levels.len() - 1) as u32
                        }
                    })
                    .collect();
                YSide::Classes {
                    codes,
                    n_classes: levels.len(),
                }
            }
            KernelKind::GaussianMedianHeuristic => YSide::Gram(ky.gram(y)?),
        };
        Ok(HsicTest { n, kc, y })
    }

    fn block_sum(&self, members: &[usize]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for (a, &i) in members.iter().enumerate() {
            let row = &self.kc[i * n..(i + 1) * n];
            let mut acc = 0.5 * row[i];
            for &j in &members[a + 1..] {
                acc += row[j];
            }
            s += acc;
        }
        2.0 * s
    }

    /// Statistic with `y` relabelled through `perm` (`y'_i = y_{perm[i]}`).
    fn statistic_for(&self, perm: &[usize]) -> f64 {
        let n = self.n;
        let s = match &self.y {
            YSide::Classes { codes, n_classes } => {
                let mut members: Vec<Vec<usize>> = vec![Vec::new(); *n_classes];
                for (i, &p) in perm.iter().enumerate() {
                    members[codes[p] as usize].push(i);
                }
                if *n_classes == 2 {
                    // For a doubly centred K the two within-class block sums coincide.
                    let small = members.iter().min_by_key(|m| m.len()).unwrap();
                    2.0 * self.block_sum(small)
                } else {
                    members.iter().map(|m| self.block_sum(m)).sum()
                }
            }
            YSide::Gram(l) => {
                let mut s = 0.0;
                for i in 0..n {
                    let lrow = &l[perm[i] * n..(perm[i] + 1) * n];
                    let krow = &self.kc[i * n..(i + 1) * n];
                    for j in 0..n {
                        s += krow[j] * lrow[perm[j]];
                    }
                }
                s
            }
        };
        (s / (n * n) as f64).max(0.0)
    }

    pub fn observed(&self) -> f64 {
        let id: Vec<usize> = (0..self.n).collect();
        self.statistic_for(&id)
    }

    /// Permutation p-value over `n_perm` relabellings of `y`.
    pub fn permutation_test(&self, n_perm: usize, seed: u64, smoothing: Smoothing) -> Result<HsicOutcome> {
        if n_perm == 0 {
            return Err(Error::invalid("need at least one permutation"));
        }
        let observed = self.observed();
        // Relative slack so a permutation that reproduces the observed
        // labelling counts as a tie despite summation-order rounding.
        let threshold = observed - 1e-12 * observed.abs().max(1e-300);
        let exceed = count_exceedances(n_perm, seed, tag::PERMUTATION, |_, r| {
            let mut perm: Vec<usize> = (0..self.n).collect();
            perm.shuffle(r);
            self.statistic_for(&perm) >= threshold
        });
        Ok(HsicOutcome {
            statistic: observed,
            p: PValue::from_count(exceed, n_perm, smoothing),
        })
    }
}

/// HSIC permutation test of `x ⫫ y`, permuting `y`; add-one smoothing.
pub fn hsic_perm_test(
    x: &[f64],
    y: &[f64],
    kx: KernelSpec,
    ky: KernelSpec,
    n_perm: usize,
    seed: u64,
) -> Result<PValue> {
    Ok(HsicTest::new(x, y, kx, ky)?
        .permutation_test(n_perm, seed, Smoothing::AddOne)?
        .p)
}
