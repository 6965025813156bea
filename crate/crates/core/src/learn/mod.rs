//! Random-forest classifier, cross-validated accuracy and permutation
//! feature importance.

mod cv;
mod forest;
mod importance;
mod tree;

use serde::Serialize;

use crate::error::{Error, Result};

pub use cv::{cross_validate, loo_accuracy, CvOutcome, Fold};
pub use forest::{fit_forest, fit_forest_rows, Forest};
pub use importance::{permutation_importance, ImportanceOutcome};
pub use tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvScheme {
    LeaveOneOut,
    KFold(usize),
}

impl std::str::FromStr for CvScheme {
    type Err = Error;

    /// `loo` or `kfold:K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("loo") {
            return Ok(CvScheme::LeaveOneOut);
        }
        if let Some(k) = s.strip_prefix("kfold:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::invalid(format!("bad fold count in `{s}`")))?;
            if k < 2 {
                return Err(Error::invalid("k-fold needs at least 2 folds"));
            }
            return Ok(CvScheme::KFold(k));
        }
        Err(Error::invalid(format!("unknown cv scheme `{s}` (expected loo or kfold:K)")))
    }
}

impl std::fmt::Display for CvScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CvScheme::LeaveOneOut => f.write_str("loo"),
            CvScheme::KFold(k) => write!(f, "kfold:{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `⌊√d⌋`.
    pub mtry: Option<usize>,
    pub cv: CvScheme,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            mtry: None,
            cv: CvScheme::LeaveOneOut,
        }
    }
}

impl ForestConfig {
    /// Effective `mtry` for `d` features.
    pub fn mtry_for(&self, d: usize) -> Result<usize> {
        let m = match self.mtry {
            Some(m) => m,
            None => ((d as f64).sqrt().floor() as usize).max(1),
        };
        if m == 0 || m > d {
            return Err(Error::invalid(format!("mtry {m} outside 1..={d}")));
        }
        Ok(m)
    }

    pub(crate) fn validate(&self, d: usize) -> Result<usize> {
        if self.n_trees == 0 {
            return Err(Error::invalid("forest needs at least one tree"));
        }
        self.mtry_for(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mtry_defaults() {
        let c = ForestConfig::default();
        assert_eq!(c.mtry_for(6).unwrap(), 2);
        assert_eq!(c.mtry_for(1).unwrap(), 1);
        assert_eq!(c.mtry_for(3).unwrap(), 1);
        assert_eq!(c.mtry_for(9).unwrap(), 3);
        let bad = ForestConfig {
            mtry: Some(4),
            ..c
        };
        assert!(bad.mtry_for(3).is_err());
    }

    #[test]
    fn cv_scheme_parsing() {
        assert_eq!("loo".parse::<CvScheme>().unwrap(), CvScheme::LeaveOneOut);
        assert_eq!("kfold:5".parse::<CvScheme>().unwrap(), CvScheme::KFold(5));
        assert!("kfold:1".parse::<CvScheme>().is_err());
        assert!("holdout".parse::<CvScheme>().is_err());
        assert_eq!(CvScheme::KFold(7).to_string(), "kfold:7");
    }
}
