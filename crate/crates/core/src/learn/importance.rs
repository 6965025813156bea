use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::cv::{cross_validate, CvOutcome};
use super::forest::Forest;
use super::ForestConfig;
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::stats::{PValue, Smoothing};
use crate::synth::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceOutcome {
    pub pe_star: f64,
    /// Per feature: fraction of permutations whose accuracy reaches PE*.
    pub p_values: Vec<PValue>,
    /// Per feature: mean accuracy over the permutations.
    pub mean_permuted_pe: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Split thresholds on one feature across a forest, with per-tree ranks.
struct FeatureCuts {
    thresholds: Vec<f64>,
    ranks: Vec<Vec<u32>>,
}

impl FeatureCuts {
    fn new(forest: &Forest, j: usize) -> FeatureCuts {
        let mut thresholds = Vec::new();
        for tree in forest.trees() {
            tree.thresholds_on(j, &mut thresholds);
        }
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let ranks = forest.trees().iter().map(|t| t.ranks_on(j, &thresholds)).collect();
        FeatureCuts { thresholds, ranks }
    }

    fn segment(&self, v: f64) -> u32 {
        self.thresholds.partition_point(|&b| b < v) as u32
    }
}

/// Forest vote on one row as a step function of the value of one feature,
/// stored as the segments where the majority class changes.
struct Profile {
    flips: Vec<(u32, u8)>,
}

impl Profile {
    fn build(forest: &Forest, cuts: &FeatureCuts, row: &[f64], j: usize) -> Profile {
        let m = cuts.thresholds.len() as u32;
        let mut ranges = Vec::new();
        let mut events: Vec<(u32, i32)> = Vec::new();
        for (tree, ranks) in forest.trees().iter().zip(&cuts.ranks) {
            ranges.clear();
            tree.profile(row, j, ranks, m, &mut ranges);
            for &(first, last, c) in &ranges {
                if c == 1 {
                    events.push((first, 1));
                    if last < m {
                        events.push((last + 1, -1));
                    }
                }
            }
        }
        events.sort_unstable_by_key(|e| e.0);
        let n_trees = forest.trees().len() as i32;
        let mut flips = Vec::new();
        let mut ones = 0;
        let mut k = 0;
        if events.first().is_none_or(|e| e.0 > 0) {
            flips.push((0, 0));
        }
        while k < events.len() {
            let at = events[k].0;
            while k < events.len() && events[k].0 == at {
                ones += events[k].1;
                k += 1;
            }
            let class = u8::from(2 * ones > n_trees);
            if flips.last().is_none_or(|&(_, c)| c != class) {
                flips.push((at, class));
            }
        }
        Profile { flips }
    }

    fn predict(&self, segment: u32) -> u8 {
        self.flips[self.flips.partition_point(|f| f.0 <= segment) - 1].1
    }
}

struct FeatureProfiles {
    /// Per fold, the cuts of its forest on this feature.
    cuts: Vec<Option<FeatureCuts>>,
    fold_of: Vec<usize>,
    rows: Vec<Option<Profile>>,
}

impl FeatureProfiles {
    fn predict(&self, i: usize, v: f64) -> Option<u8> {
        let cuts = self.cuts[self.fold_of[i]].as_ref()?;
        Some(self.rows[i].as_ref()?.predict(cuts.segment(v)))
    }
}

/// Vote profiles of every row for every feature, under its held-out forest.
fn profiles(data: &Dataset, cv: &CvOutcome) -> Vec<FeatureProfiles> {
    let mut fold_of = vec![0; data.n()];
    for (f, fold) in cv.folds.iter().enumerate() {
        for &i in &fold.test {
            fold_of[i] = f;
        }
    }
    (0..data.d())
        .into_par_iter()
        .map(|j| {
            let cuts: Vec<Option<FeatureCuts>> = cv
                .folds
                .iter()
                .map(|fold| fold.forest.as_ref().map(|f| FeatureCuts::new(f, j)))
                .collect();
            let rows = (0..data.n())
                .map(|i| {
                    let fold = &cv.folds[fold_of[i]];
                    let forest = fold.forest.as_ref()?;
                    let c = cuts[fold_of[i]].as_ref()?;
                    Some(Profile::build(forest, c, data.row(i), j))
                })
                .collect();
            FeatureProfiles {
                cuts,
                fold_of: fold_of.clone(),
                rows,
            }
        })
        .collect()
}

/// Correct held-out predictions after permuting column `j` with
/// permutation `k`.
fn permuted_correct(data: &Dataset, prof: &FeatureProfiles, j: usize, k: usize, seed: u64) -> usize {
    let n = data.n();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(
        seed,
        &[tag::FEATURE, j as u64, tag::PERMUTATION, k as u64],
    ));
    let cond = data.condition();
    (0..n)
        .filter(|&i| prof.predict(i, data.value(perm[i], j)) == Some(cond[i]))
        .count()
}

/// Permutation importance on cross-validation fold forests.
///
/// The fold forests are trained once. For feature `j` and permutation `k`
/// the column is permuted over all rows (stream `(seed, FEATURE, j,
/// PERMUTATION, k)`) and every row is re-predicted by its own held-out fold
/// forest. `p_j` is the smoothed fraction of permutations whose accuracy is
/// at least PE*, so a small value marks a relevant feature.
pub fn permutation_importance(
    data: &Dataset,
    config: &ForestConfig,
    n_perm: usize,
    seed: u64,
    smoothing: Smoothing,
) -> Result<ImportanceOutcome> {
    if n_perm == 0 {
        return Err(Error::invalid("need at least one permutation"));
    }
    let cv = cross_validate(data, config, seed)?;
    importance_from_cv(data, &cv, n_perm, seed, smoothing)
}

pub(crate) fn importance_from_cv(
    data: &Dataset,
    cv: &CvOutcome,
    n_perm: usize,
    seed: u64,
    smoothing: Smoothing,
) -> Result<ImportanceOutcome> {
    let prof = profiles(data, cv);
    let n = data.n() as f64;
    let per_feature: Vec<(PValue, f64)> = (0..data.d())
        .map(|j| {
            let counts: Vec<usize> = (0..n_perm)
                .into_par_iter()
                .map(|k| permuted_correct(data, &prof[j], j, k, seed))
                .collect();
            let exceed = counts.iter().filter(|&&c| c >= cv.correct).count();
            let mean = 100.0 * counts.iter().sum::<usize>() as f64 / (n * n_perm as f64);
            (PValue::from_count(exceed, n_perm, smoothing), mean)
        })
        .collect();
    Ok(ImportanceOutcome {
        pe_star: cv.pe_star,
        p_values: per_feature.iter().map(|x| x.0).collect(),
        mean_permuted_pe: per_feature.iter().map(|x| x.1).collect(),
        warnings: cv.warnings.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::CvScheme;
    use rand::Rng;

    fn informative(n: usize, seed: u64) -> Dataset {
        let mut r = rng::stream(seed, &[]);
        let mut x = Vec::with_capacity(n * 3);
        let mut cond = Vec::with_capacity(n);
        for _ in 0..n {
            let c: u8 = r.random_range(0..2);
            x.push(f64::from(c) + 0.7 * r.random::<f64>());
            x.push(r.random::<f64>());
            x.push(2.5);
            cond.push(c);
        }
        Dataset::new(cond, x, vec!["sig".into(), "noise".into(), "flat".into()]).unwrap()
    }

    #[test]
    fn profile_matches_naive_repredict() {
        let data = informative(60, 3);
        let config = ForestConfig {
            n_trees: 15,
            mtry: Some(2),
            cv: CvScheme::KFold(4),
        };
        let cv = cross_validate(&data, &config, 5).unwrap();
        let prof = profiles(&data, &cv);
        for j in 0..3 {
            // Identity "permutation" must reproduce the fold predictions.
            for i in 0..data.n() {
                assert_eq!(prof[j].predict(i, data.value(i, j)), cv.predictions[i]);
            }
            for k in 0..5 {
                let mut perm: Vec<usize> = (0..data.n()).collect();
                perm.shuffle(&mut rng::stream(5, &[tag::FEATURE, j as u64, tag::PERMUTATION, k as u64]));
                let mut naive = 0;
                for fold in &cv.folds {
                    let forest = fold.forest.as_ref().unwrap();
                    for &i in &fold.test {
                        let mut row = data.row(i).to_vec();
                        row[j] = data.value(perm[i], j);
                        naive += usize::from(forest.predict(&row).unwrap() == data.condition()[i]);
                    }
                }
                assert_eq!(permuted_correct(&data, &prof[j], j, k, 5), naive);
            }
        }
    }

    #[test]
    fn relevant_noise_and_unused_features() {
        let data = informative(150, 8);
        let config = ForestConfig {
            n_trees: 30,
            mtry: Some(2),
            cv: CvScheme::KFold(5),
        };
        let out = permutation_importance(&data, &config, 99, 2, Smoothing::AddOne).unwrap();
        assert!(out.pe_star > 80.0);
        assert!(out.p_values[0].value < 0.05);
        // A constant feature is never split on, so every permutation ties PE*.
        assert_eq!(out.p_values[2].value, 1.0);
        assert_eq!(out.mean_permuted_pe[2], out.pe_star);
    }

    #[test]
    fn deterministic() {
        let data = informative(40, 1);
        let config = ForestConfig {
            n_trees: 10,
            mtry: None,
            cv: CvScheme::LeaveOneOut,
        };
        let a = permutation_importance(&data, &config, 20, 7, Smoothing::AddOne).unwrap();
        let b = permutation_importance(&data, &config, 20, 7, Smoothing::AddOne).unwrap();
        assert_eq!(a, b);
    }
}
