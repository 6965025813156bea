use serde::Serialize;

use crate::error::{Error, Result};

/// One subject's table: a binary condition column plus `d` real features.
///
/// Features are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    condition: Vec<u8>,
    features: Vec<f64>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(condition: Vec<u8>, features: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let n = condition.len();
        let d = names.len();
        if n < 2 {
            return Err(Error::invalid(format!("dataset needs at least 2 rows, got {n}")));
        }
        if d == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        if features.len() != n * d {
            return Err(Error::invalid(format!(
                "feature matrix has {} cells, expected {n} x {d}",
                features.len()
            )));
        }
        if let Some(bad) = condition.iter().find(|&&c| c > 1) {
            return Err(Error::invalid(format!("condition label {bad} is not binary")));
        }
        if !condition.contains(&0) || !condition.contains(&1) {
            return Err(Error::Degenerate(
                "condition column contains a single class".into(),
            ));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, feature `{}`",
                pos / d + 1,
                names[pos % d]
            )));
        }
        for (k, name) in names.iter().enumerate() {
            if names[..k].contains(name) {
                return Err(Error::invalid(format!("duplicate feature name `{name}`")));
            }
        }
        Ok(Dataset {
            condition,
            features,
            names,
        })
    }

    /// Number of rows (trials).
    pub fn n(&self) -> usize {
        self.condition.len()
    }

    /// Number of features.
    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn condition(&self) -> &[u8] {
        &self.condition
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.d() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.value(i, j)).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.names.iter().position(|n| n == name).map(|j| self.column(j))
    }

    /// Condition labels as reals (0.0 / 1.0).
    pub fn condition_f64(&self) -> Vec<f64> {
        self.condition.iter().map(|&c| f64::from(c)).collect()
    }

    /// Same rows with the condition column replaced; used for label-shuffling tests.
    pub fn with_condition(&self, condition: Vec<u8>) -> Result<Self> {
        Dataset::new(condition, self.features.clone(), self.names.clone())
    }

    /// Appends a feature column.
    pub fn with_extra_feature(&self, name: &str, values: &[f64]) -> Result<Self> {
        if values.len() != self.n() {
            return Err(Error::invalid("extra column length does not match rows"));
        }
        let d = self.d();
        let mut features = Vec::with_capacity(self.n() * (d + 1));
        for (i, v) in values.iter().enumerate() {
            features.extend_from_slice(self.row(i));
            features.push(*v);
        }
        let mut names = self.names.clone();
        names.push(name.to_owned());
        Dataset::new(self.condition.clone(), features, names)
    }

    /// CSV export: header `condition,feat1,...,featd`, one row per trial.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so export followed by import is lossless.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n() * (self.d() + 1) * 12);
        out.push_str("condition");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.n() {
            out.push_str(if self.condition[i] == 1 { "1" } else { "0" });
            for v in self.row(i) {
                out.push(',');
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    /// True when both datasets list the same feature names in the same order.
    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.names == other.names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_invariants() {
        let names = vec!["a".to_string()];
        assert!(Dataset::new(vec![0], vec![1.0], names.clone()).is_err());
        assert!(matches!(
            Dataset::new(vec![1, 1], vec![1.0, 2.0], names.clone()),
            Err(Error::Degenerate(_))
        ));
        assert!(Dataset::new(vec![0, 1], vec![1.0], names.clone()).is_err());
        assert!(Dataset::new(vec![0, 2], vec![1.0, 2.0], names.clone()).is_err());
        assert!(Dataset::new(vec![0, 1], vec![1.0, f64::NAN], names.clone()).is_err());
        let ok = Dataset::new(vec![0, 1], vec![1.0, 2.0], names).unwrap();
        assert_eq!(ok.column(0), vec![1.0, 2.0]);
    }

    #[test]
    fn csv_layout() {
        let ds = Dataset::new(
            vec![0, 1],
            vec![1.0, -0.5, 0.1, 3e-7],
            vec!["X1".into(), "X2".into()],
        )
        .unwrap();
        assert_eq!(ds.to_csv(), "condition,X1,X2\n0,1.0,-0.5\n1,0.1,3e-7\n");
    }
}
