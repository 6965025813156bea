use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{permutation_importance, ForestConfig};
use crate::rng::{self, tag};
use crate::stats::{ks_statistic_uniform, ks_uniformity_test, HsicTest, KernelSpec, PValue, Smoothing};
use crate::synth::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Encoding,
    Decoding,
}

impl Side {
    fn tag(self) -> u64 {
        match self {
            Side::Encoding => tag::ENCODING,
            Side::Decoding => tag::DECODING,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "encoding" | "enc" => Ok(Side::Encoding),
            "decoding" | "dec" => Ok(Side::Decoding),
            other => Err(Error::invalid(format!(
                "unknown side `{other}` (expected encoding or decoding)"
            ))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Encoding => "encoding",
            Side::Decoding => "decoding",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RelevanceDecision {
    Relevant,
    Irrelevant,
    Indeterminate,
}

/// Group-level decision thresholds: relevant below `alpha`, irrelevant above
/// `beta`, indeterminate in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            alpha: 0.05,
            beta: 0.10,
        }
    }
}

impl Thresholds {
    pub fn new(alpha: f64, beta: f64) -> Result<Thresholds> {
        if !(0.0 < alpha && alpha < beta && beta < 1.0) {
            return Err(Error::invalid(format!(
                "need 0 < alpha < beta < 1, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Thresholds { alpha, beta })
    }

    pub fn decide(&self, p: f64) -> RelevanceDecision {
        if p < self.alpha {
            RelevanceDecision::Relevant
        } else if p > self.beta {
            RelevanceDecision::Irrelevant
        } else {
            RelevanceDecision::Indeterminate
        }
    }
}

/// Subjects × features table of p-values for one analysis side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelevanceMatrix {
    side: Side,
    features: Vec<String>,
    subjects: Vec<String>,
    /// Row per subject.
    values: Vec<Vec<f64>>,
    /// Permutations behind each entry; zero for transcribed values.
    n_permutations: usize,
    smoothing: Option<Smoothing>,
}

impl RelevanceMatrix {
    pub fn new(side: Side, features: Vec<String>, subjects: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if features.is_empty() || values.is_empty() {
            return Err(Error::invalid("relevance matrix is empty"));
        }
        if subjects.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} subject labels for {} rows",
                subjects.len(),
                values.len()
            )));
        }
        for (s, row) in values.iter().enumerate() {
            if row.len() != features.len() {
                return Err(Error::invalid(format!(
                    "row {} has {} entries, expected {}",
                    s + 1,
                    row.len(),
                    features.len()
                )));
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                return Err(Error::invalid(format!(
                    "p-value {v} outside [0, 1] at row {}, feature `{}`",
                    s + 1,
                    features[j]
                )));
            }
        }
        Ok(RelevanceMatrix {
            side,
            features,
            subjects,
            values,
            n_permutations: 0,
            smoothing: None,
        })
    }

    fn from_pvalues(side: Side, features: Vec<String>, rows: Vec<Vec<PValue>>) -> Result<Self> {
        let subjects = (1..=rows.len()).map(|s| s.to_string()).collect();
        let n_permutations = rows[0][0].n_permutations;
        let smoothing = Some(rows[0][0].smoothing);
        let values = rows.into_iter().map(|r| r.into_iter().map(|p| p.value).collect()).collect();
        let mut m = RelevanceMatrix::new(side, features, subjects, values)?;
        m.n_permutations = n_permutations;
        m.smoothing = smoothing;
        Ok(m)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn n_subjects(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

pub(crate) fn check_cohort(cohort: &[Dataset]) -> Result<()> {
    let Some(first) = cohort.first() else {
        return Err(Error::invalid("cohort is empty"));
    };
    for (s, ds) in cohort.iter().enumerate().skip(1) {
        if !first.same_schema(ds) {
            return Err(Error::invalid(format!(
                "subject {} has features {:?}, subject 1 has {:?}",
                s + 1,
                ds.feature_names(),
                first.feature_names()
            )));
        }
    }
    Ok(())
}

/// HSIC permutation p-value of every feature against the condition, per
/// subject. Subject `s`, feature `j` uses the seed `(seed, ENCODING, s, j)`.
pub fn encoding_relevance(cohort: &[Dataset], n_perm: usize, seed: u64, smoothing: Smoothing) -> Result<RelevanceMatrix> {
    check_cohort(cohort)?;
    let rows: Vec<Vec<PValue>> = cohort
        .par_iter()
        .enumerate()
        .map(|(s, ds)| {
            let c = ds.condition_f64();
            (0..ds.d())
                .map(|j| {
                    let test = HsicTest::new(&ds.column(j), &c, KernelSpec::gaussian(), KernelSpec::delta())?;
                    let sub = rng::derive_seed(seed, &[tag::ENCODING, s as u64, j as u64]);
                    Ok(test.permutation_test(n_perm, sub, smoothing)?.p)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    RelevanceMatrix::from_pvalues(Side::Encoding, cohort[0].feature_names().to_vec(), rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodingRelevance {
    pub matrix: RelevanceMatrix,
    /// Cross-validated percent correct per subject.
    pub pe_star: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Permutation-importance p-values per subject. Subject `s` uses the seed
/// `(seed, DECODING, s)`.
pub fn decoding_relevance(
    cohort: &[Dataset],
    config: &ForestConfig,
    n_perm: usize,
    seed: u64,
    smoothing: Smoothing,
) -> Result<DecodingRelevance> {
    check_cohort(cohort)?;
    let outs = cohort
        .par_iter()
        .enumerate()
        .map(|(s, ds)| permutation_importance(ds, config, n_perm, rng::derive_seed(seed, &[tag::DECODING, s as u64]), smoothing))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    for (s, o) in outs.iter().enumerate() {
        warnings.extend(o.warnings.iter().map(|w| format!("subject {}: {w}", s + 1)));
    }
    let pe_star = outs.iter().map(|o| o.pe_star).collect();
    let rows = outs.into_iter().map(|o| o.p_values).collect();
    Ok(DecodingRelevance {
        matrix: RelevanceMatrix::from_pvalues(Side::Decoding, cohort[0].feature_names().to_vec(), rows)?,
        pe_star,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDecision {
    pub feature: String,
    pub ks_statistic: f64,
    pub p: PValue,
    pub decision: RelevanceDecision,
}

/// Monte-Carlo KS test of uniformity on each feature column. Feature `j`
/// uses the seed `(seed, AGGREGATE, side, j)`.
pub fn group_aggregate(
    matrix: &RelevanceMatrix,
    thresholds: Thresholds,
    n_mc: usize,
    seed: u64,
    smoothing: Smoothing,
) -> Result<Vec<GroupDecision>> {
    Thresholds::new(thresholds.alpha, thresholds.beta)?;
    (0..matrix.features.len())
        .map(|j| {
            let col = matrix.column(j);
            let sub = rng::derive_seed(seed, &[tag::AGGREGATE, matrix.side.tag(), j as u64]);
            let p = ks_uniformity_test(&col, n_mc, sub, smoothing)?;
            Ok(GroupDecision {
                feature: matrix.features[j].clone(),
                ks_statistic: ks_statistic_uniform(&col)?,
                p,
                decision: thresholds.decide(p.value),
            })
        })
        .collect()
}
