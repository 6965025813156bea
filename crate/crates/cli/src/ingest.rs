//! CSV readers for subject tables and p-value matrices.

use std::path::{Path, PathBuf};

use causalrel::pipeline::{RelevanceMatrix, Side};
use causalrel::synth::Dataset;

use crate::error::{CliError, Result};

/// Condition labels seen so far across a cohort.
///
/// `0`/`1` labels are taken at face value. Any other pair of strings is
/// coded by first occurrence over the whole cohort, so every subject shares
/// one coding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum LabelMap {
    #[default]
    Unset,
    Numeric,
    Named(Vec<String>),
}

impl LabelMap {
    fn code(&mut self, label: &str) -> std::result::Result<u8, String> {
        let numeric = matches!(label, "0" | "1");
        match self {
            LabelMap::Unset if numeric => {
                *self = LabelMap::Numeric;
                self.code(label)
            }
            LabelMap::Unset => {
                *self = LabelMap::Named(vec![label.to_owned()]);
                Ok(0)
            }
            LabelMap::Numeric if numeric => Ok(u8::from(label == "1")),
            LabelMap::Numeric => Err(format!("label `{label}` mixed with 0/1 labels")),
            LabelMap::Named(names) => {
                if let Some(k) = names.iter().position(|n| n == label) {
                    return Ok(k as u8);
                }
                if names.len() == 2 {
                    return Err(format!(
                        "third condition label `{label}` (already have `{}` and `{}`)",
                        names[0], names[1]
                    ));
                }
                names.push(label.to_owned());
                Ok(1)
            }
        }
    }

    /// `"left=0, right=1"`, or `None` for 0/1 labels.
    pub fn describe(&self) -> Option<String> {
        match self {
            LabelMap::Named(names) => Some(
                names
                    .iter()
                    .enumerate()
                    .map(|(k, n)| format!("{n}={k}"))
                    .collect::<Vec<_>>()
                    .join(", "),
            ),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFile {
    pub path: PathBuf,
    pub data: Dataset,
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let at = e.position().map_or(String::new(), |p| format!(":{}", p.line()));
    CliError::input(format!("{}{at}: {e}", path.display()))
}

fn headers(path: &Path, rdr: &mut csv::Reader<std::fs::File>) -> Result<Vec<String>> {
    let h = rdr.headers().map_err(|e| csv_error(path, e))?;
    if h.is_empty() || h.iter().all(str::is_empty) {
        return Err(CliError::input(format!("{}:1: missing header row", path.display())));
    }
    Ok(h.iter().map(str::to_owned).collect())
}

fn parse_cell(path: &Path, line: u64, col: usize, header: &str, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::input(format!(
            "{}:{line}: column {col} (`{header}`): `{cell}` is not a finite number",
            path.display()
        ))),
    }
}

fn check_width(path: &Path, line: u64, found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(CliError::input(format!(
            "{}:{line}: {found} fields, header has {expected}",
            path.display()
        )));
    }
    Ok(())
}

/// Reads one subject table: header row, `condition` first, then features.
pub fn read_subject(path: &Path, labels: &mut LabelMap) -> Result<SubjectFile> {
    let mut rdr = reader(path)?;
    let header = headers(path, &mut rdr)?;
    if header[0] != "condition" {
        return Err(CliError::input(format!(
            "{}:1: first column must be `condition`, found `{}`",
            path.display(),
            header[0]
        )));
    }
    if header.len() < 2 {
        return Err(CliError::input(format!("{}:1: no feature columns", path.display())));
    }
    let d = header.len() - 1;
    let mut condition = Vec::new();
    let mut features = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        check_width(path, line, rec.len(), header.len())?;
        let code = labels.code(&rec[0]).map_err(|m| {
            CliError::input(format!("{}:{line}: column 1 (`condition`): {m}", path.display()))
        })?;
        condition.push(code);
        for j in 1..=d {
            features.push(parse_cell(path, line, j + 1, &header[j], &rec[j])?);
        }
    }
    let data = Dataset::new(condition, features, header[1..].to_vec()).map_err(|e| CliError::from(e).context(path.display()))?;
    Ok(SubjectFile {
        path: path.to_owned(),
        data,
    })
}

/// Reads every file in order and checks that they share one schema.
pub fn read_cohort(paths: &[PathBuf]) -> Result<(Vec<SubjectFile>, LabelMap)> {
    if paths.is_empty() {
        return Err(CliError::input("no subject files given"));
    }
    let mut labels = LabelMap::default();
    let mut files: Vec<SubjectFile> = Vec::with_capacity(paths.len());
    for p in paths {
        let f = read_subject(p, &mut labels)?;
        if let Some(first) = files.first() {
            if !first.data.same_schema(&f.data) {
                return Err(CliError::input(format!(
                    "schema mismatch: {} has features [{}] but {} has [{}]",
                    f.path.display(),
                    f.data.feature_names().join(", "),
                    first.path.display(),
                    first.data.feature_names().join(", ")
                )));
            }
        }
        files.push(f);
    }
    Ok((files, labels))
}

/// Reads a p-value matrix: one row per subject, one column per feature, and
/// optionally a leading `subject` column.
pub fn read_matrix(path: &Path, side: Side) -> Result<RelevanceMatrix> {
    let mut rdr = reader(path)?;
    let header = headers(path, &mut rdr)?;
    let labelled = header[0].eq_ignore_ascii_case("subject");
    let first = usize::from(labelled);
    if header.len() <= first {
        return Err(CliError::input(format!("{}:1: no feature columns", path.display())));
    }
    let mut subjects = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        check_width(path, line, rec.len(), header.len())?;
        subjects.push(if labelled { rec[0].to_owned() } else { (rows.len() + 1).to_string() });
        let mut row = Vec::with_capacity(header.len() - first);
        for j in first..header.len() {
            let v = parse_cell(path, line, j + 1, &header[j], &rec[j])?;
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::input(format!(
                    "{}:{line}: column {} (`{}`): p-value {v} outside [0, 1]",
                    path.display(),
                    j + 1,
                    header[j]
                )));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    RelevanceMatrix::new(side, header[first..].to_vec(), subjects, rows).map_err(|e| CliError::from(e).context(path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_coding() {
        let mut m = LabelMap::default();
        assert_eq!(m.code("1"), Ok(1));
        assert_eq!(m.code("0"), Ok(0));
        assert!(m.code("left").is_err());
        let mut m = LabelMap::default();
        assert_eq!(m.code("right"), Ok(0));
        assert_eq!(m.code("left"), Ok(1));
        assert_eq!(m.code("right"), Ok(0));
        assert!(m.code("up").is_err());
        assert_eq!(m.describe().unwrap(), "right=0, left=1");
    }
}
