use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::forest::{fit_forest_rows, Forest};
use super::{CvScheme, ForestConfig};
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::synth::Dataset;

/// One cross-validation fold: held-out rows and the forest trained on the
/// rest. `forest` is `None` when the training rows held a single class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fold {
    pub test: Vec<usize>,
    #[serde(skip)]
    pub forest: Option<Forest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvOutcome {
    /// Percent of rows predicted correctly by their held-out fold forest.
    pub pe_star: f64,
    pub correct: usize,
    /// Held-out prediction per row; `None` for rows of skipped folds.
    pub predictions: Vec<Option<u8>>,
    pub folds: Vec<Fold>,
    pub warnings: Vec<String>,
}

fn fold_partition(n: usize, scheme: CvScheme, seed: u64) -> Result<Vec<Vec<usize>>> {
    match scheme {
        CvScheme::LeaveOneOut => Ok((0..n).map(|i| vec![i]).collect()),
        CvScheme::KFold(k) => {
            if k < 2 || k > n {
                return Err(Error::invalid(format!("cannot split {n} rows into {k} folds")));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng::stream(seed, &[tag::FOLD_ASSIGN]));
            let mut folds = vec![Vec::new(); k];
            for (pos, &row) in order.iter().enumerate() {
                folds[pos % k].push(row);
            }
            for f in &mut folds {
                f.sort_unstable();
            }
            Ok(folds)
        }
    }
}

/// Cross-validated accuracy under `config.cv`. Fold `f` trains its forest
/// with the seed derived from `(seed, FOLD, f)`.
pub fn cross_validate(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<CvOutcome> {
    let n = data.n();
    if n < 4 {
        return Err(Error::invalid(format!("cross-validation needs at least 4 rows, got {n}")));
    }
    config.validate(data.d())?;
    let parts = fold_partition(n, config.cv, seed)?;
    let folds: Vec<Fold> = parts
        .into_par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut held = vec![false; n];
            for &i in &test {
                held[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !held[i]).collect();
            let fold_seed = rng::derive_seed(seed, &[tag::FOLD, f as u64]);
            let ones = train.iter().filter(|&&i| data.condition()[i] == 1).count();
            let forest = if ones == 0 || ones == train.len() {
                None
            } else {
                Some(fit_forest_rows(data, &train, config, fold_seed)?)
            };
            Ok(Fold { test, forest })
        })
        .collect::<Result<_>>()?;

    let mut predictions = vec![None; n];
    let mut warnings = Vec::new();
    for (f, fold) in folds.iter().enumerate() {
        match &fold.forest {
            Some(forest) => {
                for &i in &fold.test {
                    predictions[i] = Some(forest.predict(data.row(i))?);
                }
            }
            None => warnings.push(format!(
                "fold {f}: training rows contain a single class; {} held-out rows counted as errors",
                fold.test.len()
            )),
        }
    }
    let cond = data.condition();
    let correct = (0..n).filter(|&i| predictions[i] == Some(cond[i])).count();
    Ok(CvOutcome {
        pe_star: 100.0 * correct as f64 / n as f64,
        correct,
        predictions,
        folds,
        warnings,
    })
}

/// Cross-validated percent correct (PE*). Leave-one-out unless `config.cv`
/// selects k-fold.
pub fn loo_accuracy(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<f64> {
    Ok(cross_validate(data, config, seed)?.pe_star)
}
