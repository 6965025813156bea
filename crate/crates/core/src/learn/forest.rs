use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::tree::{self, Tree};
use super::ForestConfig;
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::synth::Dataset;

/// Bagged ensemble of fully grown Gini trees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forest {
    trees: Vec<Tree>,
    seed: u64,
    config: ForestConfig,
    n_features: usize,
}

/// Bootstrap multiplicities (indexed by dataset row) for tree `t`.
pub(crate) fn bootstrap(n: usize, rows: &[usize], r: &mut impl Rng) -> Vec<u32> {
    let mut w = vec![0u32; n];
    for _ in 0..rows.len() {
        w[rows[r.random_range(0..rows.len())]] += 1;
    }
    w
}

pub fn fit_forest(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<Forest> {
    let rows: Vec<usize> = (0..data.n()).collect();
    fit_forest_rows(data, &rows, config, seed)
}

/// Fits a forest on the subset `rows` of `data`. Tree `t` draws its bootstrap
/// and split candidates from the stream `(seed, TREE, t)`.
pub fn fit_forest_rows(data: &Dataset, rows: &[usize], config: &ForestConfig, seed: u64) -> Result<Forest> {
    let mtry = config.validate(data.d())?;
    if let Some(&bad) = rows.iter().find(|&&r| r >= data.n()) {
        return Err(Error::invalid(format!("row {bad} out of range")));
    }
    let cond = data.condition();
    let ones = rows.iter().filter(|&&r| cond[r] == 1).count();
    if ones == 0 || ones == rows.len() {
        return Err(Error::invalid("training rows contain a single class"));
    }
    let presorted = tree::presort(data, rows);
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, &[tag::TREE, t as u64]);
            let w = bootstrap(data.n(), rows, &mut r);
            tree::grow(data, &presorted, &w, mtry, &mut r)
        })
        .collect();
    Ok(Forest {
        trees,
        seed,
        config: *config,
        n_features: data.d(),
    })
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Number of trees voting for class 1.
    pub fn votes(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.n_features {
            return Err(Error::invalid(format!(
                "row has {} values, forest expects {}",
                row.len(),
                self.n_features
            )));
        }
        Ok(self.trees.iter().filter(|t| t.predict(row) == 1).count())
    }

    /// Majority vote; an even split goes to class 0.
    pub fn predict(&self, row: &[f64]) -> Result<u8> {
        let ones = self.votes(row)?;
        Ok(u8::from(2 * ones > self.trees.len()))
    }

    pub fn uses_feature(&self, j: usize) -> bool {
        self.trees.iter().any(|t| t.uses_feature(j))
    }
}
